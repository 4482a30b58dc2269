#include "fewshot/normalize.h"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <stdexcept>

#include "fewshot/unicode.h"

namespace fewshot {
namespace {

constexpr char32_t kAlif = U'ا';
constexpr char32_t kAlifHamzaAbove = U'أ';
constexpr char32_t kAlifHamzaBelow = U'إ';
constexpr char32_t kAlifMadda = U'آ';
constexpr char32_t kAlifWasla = U'ٱ';
constexpr char32_t kWawHamza = U'ؤ';
constexpr char32_t kYehHamza = U'ئ';
constexpr char32_t kHamza = U'ء';
constexpr char32_t kWaw = U'و';
constexpr char32_t kYeh = U'ي';

bool is_alif_variant(char32_t c) {
  return c == kAlifHamzaAbove || c == kAlifHamzaBelow || c == kAlifMadda ||
         c == kAlifWasla;
}

bool is_diacritic(char32_t c) {
  return (c >= U'ً' && c <= U'ٟ') || c == U'ٰ';
}

bool is_punctuation(char32_t c) {
  // ؟ ، ؛ are Po already; listed so the set does not depend on the
  // Unicode version.
  if (c == U'؟' || c == U'،' || c == U'؛') return true;
  switch (u_charType(static_cast<UChar32>(c))) {
    case U_DASH_PUNCTUATION:
    case U_START_PUNCTUATION:
    case U_END_PUNCTUATION:
    case U_CONNECTOR_PUNCTUATION:
    case U_OTHER_PUNCTUATION:
    case U_INITIAL_PUNCTUATION:
    case U_FINAL_PUNCTUATION:
      return true;
    default:
      return false;
  }
}

std::string compose_nfc(const std::string& text) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) {
    throw std::runtime_error(std::string("ICU NFC unavailable: ") +
                             u_errorName(status));
  }
  icu::UnicodeString composed =
      nfc->normalize(icu::UnicodeString::fromUTF8(text), status);
  if (U_FAILURE(status)) {
    throw std::runtime_error(std::string("NFC normalization failed: ") +
                             u_errorName(status));
  }
  std::string out;
  composed.toUTF8String(out);
  return out;
}

std::string normalize_once(const std::string& input,
                           const NormalizationOptions& options) {
  std::u32string text =
      utf8_to_utf32(options.compose ? compose_nfc(input) : input);

  std::u32string folded;
  folded.reserve(text.size());
  for (char32_t c : text) {
    if (options.fold_alif && is_alif_variant(c)) c = kAlif;
    if (options.fold_hamza_carriers) {
      if (c == kHamza) continue;
      if (c == kWawHamza) c = kWaw;
      if (c == kYehHamza) c = kYeh;
    }
    if (options.strip_diacritics && is_diacritic(c)) continue;
    if (options.strip_punctuation && is_punctuation(c)) continue;
    folded.push_back(c);
  }

  if (!options.collapse_whitespace) return utf32_to_utf8(folded);

  std::u32string collapsed;
  collapsed.reserve(folded.size());
  bool pending_space = false;
  for (char32_t c : folded) {
    if (u_isUWhiteSpace(static_cast<UChar32>(c))) {
      pending_space = !collapsed.empty();
      continue;
    }
    if (pending_space) collapsed.push_back(U' ');
    pending_space = false;
    collapsed.push_back(c);
  }
  return utf32_to_utf8(collapsed);
}

}  // namespace

std::string normalize_text(std::string_view text,
                           const NormalizationOptions& options) {
  std::string current(text);
  // Every pass that changes the text either shortens it or only folds
  // letters produced by a composition, so this converges in a few rounds.
  for (int pass = 0; pass < 16; ++pass) {
    std::string next = normalize_once(current, options);
    if (next == current) break;
    current = std::move(next);
  }
  return current;
}

}  // namespace fewshot

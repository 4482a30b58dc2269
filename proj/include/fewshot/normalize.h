#ifndef FEWSHOT_NORMALIZE_H_
#define FEWSHOT_NORMALIZE_H_

#include <string>
#include <string_view>

namespace fewshot {

// Text normalization steps. The four core steps run in declaration order and
// are all enabled by default; the two extra foldings are opt-in and run with
// the alif folding step.
struct NormalizationOptions {
  bool compose = true;              // NFC
  bool fold_alif = true;            // أ إ آ ٱ -> ا
  bool strip_punctuation = true;    // general category P*, plus ؟ ، ؛
  bool collapse_whitespace = true;  // runs -> one space, trimmed

  bool fold_hamza_carriers = false;  // ؤ -> و, ئ -> ي, drop standalone ء
  bool strip_diacritics = false;     // tashkeel U+064B..U+065F and U+0670

  bool operator==(const NormalizationOptions&) const = default;
};

// Applies the enabled steps. The pass is repeated until a fixed point is
// reached, which makes the function idempotent even when punctuation removal
// or alif folding exposes a new canonical composition.
std::string normalize_text(std::string_view text,
                           const NormalizationOptions& options = {});

}  // namespace fewshot

#endif  // FEWSHOT_NORMALIZE_H_

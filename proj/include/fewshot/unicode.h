#ifndef FEWSHOT_UNICODE_H_
#define FEWSHOT_UNICODE_H_

#include <string>
#include <string_view>

namespace fewshot {

// Decodes UTF-8 into code points. Ill-formed sequences become U+FFFD.
std::u32string utf8_to_utf32(std::string_view utf8);

std::string utf32_to_utf8(std::u32string_view text);

// Appends the UTF-8 encoding of one code point.
void append_utf8(char32_t cp, std::string& out);

}  // namespace fewshot

#endif  // FEWSHOT_UNICODE_H_

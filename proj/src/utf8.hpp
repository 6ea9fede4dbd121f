#pragma once

#include <string>
#include <string_view>

namespace mathenc::detail {

/// Decodes UTF-8; invalid bytes become U+FFFD.
std::u32string utf8_decode(std::string_view s);
std::string utf8_encode(std::u32string_view s);
void utf8_append(std::string& out, char32_t cp);
std::size_t utf8_length(std::string_view s);

}  // namespace mathenc::detail

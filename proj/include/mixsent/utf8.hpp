// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mixsent {

// Minimal UTF-8 codec. Invalid byte sequences decode to U+FFFD so that
// text-handling stays total on arbitrary input.
std::vector<char32_t> utf8_decode(std::string_view text);
void utf8_append(std::string& out, char32_t cp);
std::string utf8_encode(std::span<const char32_t> codepoints);

}  // namespace mixsent

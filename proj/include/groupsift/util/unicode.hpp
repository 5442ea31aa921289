#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace groupsift::util {

/// Coarse codepoint classes, just enough for tokenization, script-majority
/// language detection and emoji-only checks. This is deliberately not a full
/// Unicode property database.
enum class CpClass {
    latin_letter,       // ASCII letters + Latin-1/Extended letters
    devanagari,         // U+0900..U+097F (minus danda punctuation)
    telugu,             // U+0C00..U+0C7F
    tamil,              // U+0B80..U+0BFF
    digit,              // ASCII 0-9
    emoji,              // pictographs, emoticons, dingbats, flags, modifiers
    separator,          // whitespace, punctuation, general symbols
    other_word          // any other codepoint; treated as part of a word token
};

struct Decoded {
    char32_t cp;
    std::size_t len; // bytes consumed (>=1; invalid sequences consume 1 byte as U+FFFD)
};

/// Decode one UTF-8 codepoint at `pos`. Invalid bytes decode to U+FFFD with len 1.
Decoded decode_utf8(std::string_view s, std::size_t pos);

void append_utf8(std::string& out, char32_t cp);

CpClass classify_codepoint(char32_t cp);

/// ASCII + Latin-1 lowercase; other codepoints pass through.
char32_t fold_case(char32_t cp);

inline bool is_word_class(CpClass c) {
    return c == CpClass::latin_letter || c == CpClass::devanagari || c == CpClass::telugu ||
           c == CpClass::tamil || c == CpClass::digit || c == CpClass::other_word;
}

/// Number of codepoints in a UTF-8 string.
std::size_t codepoint_count(std::string_view s);

} // namespace groupsift::util

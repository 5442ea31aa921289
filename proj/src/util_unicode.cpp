#include "groupsift/util/unicode.hpp"

namespace groupsift::util {

Decoded decode_utf8(std::string_view s, std::size_t pos) {
    const auto b0 = static_cast<unsigned char>(s[pos]);
    if (b0 < 0x80) return {b0, 1};

    auto cont = [&](std::size_t i) {
        return pos + i < s.size() &&
               (static_cast<unsigned char>(s[pos + i]) & 0xc0) == 0x80;
    };
    auto bits = [&](std::size_t i) {
        return static_cast<char32_t>(static_cast<unsigned char>(s[pos + i]) & 0x3f);
    };

    if ((b0 & 0xe0) == 0xc0 && cont(1)) {
        char32_t cp = (static_cast<char32_t>(b0 & 0x1f) << 6) | bits(1);
        if (cp >= 0x80) return {cp, 2};
    } else if ((b0 & 0xf0) == 0xe0 && cont(1) && cont(2)) {
        char32_t cp = (static_cast<char32_t>(b0 & 0x0f) << 12) | (bits(1) << 6) | bits(2);
        if (cp >= 0x800 && !(cp >= 0xd800 && cp <= 0xdfff)) return {cp, 3};
    } else if ((b0 & 0xf8) == 0xf0 && cont(1) && cont(2) && cont(3)) {
        char32_t cp = (static_cast<char32_t>(b0 & 0x07) << 18) | (bits(1) << 12) |
                      (bits(2) << 6) | bits(3);
        if (cp >= 0x10000 && cp <= 0x10ffff) return {cp, 4};
    }
    return {0xfffd, 1};
}

void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else {
        out.push_back(static_cast<char>(0xf0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    }
}

namespace {

bool is_emoji_cp(char32_t cp) {
    // Pictographic blocks commonly used in chat apps. Includes flags, skin-tone
    // modifiers and variation selectors so "emoji-only" survives modifier noise.
    return (cp >= 0x1f000 && cp <= 0x1faff) || // mahjong..symbols-extended-A
           (cp >= 0x2600 && cp <= 0x27bf) ||   // misc symbols + dingbats
           (cp >= 0x2b00 && cp <= 0x2bff) ||   // misc symbols and arrows (stars)
           cp == 0x2764 ||                     // heavy black heart (inside 27xx anyway)
           cp == 0xfe0e || cp == 0xfe0f ||     // variation selectors
           cp == 0x20e3;                       // combining enclosing keycap
}

bool is_separator_cp(char32_t cp) {
    if (cp == '\t' || cp == '\n' || cp == '\r' || cp == ' ') return true;
    if (cp < 0x80) {
        // ASCII: anything that is not a letter or digit separates tokens.
        bool alnum = (cp >= '0' && cp <= '9') || (cp >= 'A' && cp <= 'Z') ||
                     (cp >= 'a' && cp <= 'z');
        return !alnum;
    }
    if (cp >= 0xa0 && cp <= 0xbf) return true;      // Latin-1 punctuation block
    if (cp == 0xd7 || cp == 0xf7) return true;      // multiplication/division signs
    if (cp >= 0x2000 && cp <= 0x206f) return true;  // general punctuation (incl. ZWJ/ZWNJ)
    if (cp == 0x0964 || cp == 0x0965) return true;  // danda, double danda
    if (cp >= 0x3000 && cp <= 0x303f) return true;  // CJK punctuation
    if (cp >= 0x2190 && cp <= 0x21ff) return true;  // arrows
    return false;
}

} // namespace

CpClass classify_codepoint(char32_t cp) {
    if (cp >= '0' && cp <= '9') return CpClass::digit;
    if ((cp >= 'A' && cp <= 'Z') || (cp >= 'a' && cp <= 'z')) return CpClass::latin_letter;
    if (is_emoji_cp(cp)) return CpClass::emoji;
    if (is_separator_cp(cp)) return CpClass::separator;
    if (cp >= 0x0900 && cp <= 0x097f) return CpClass::devanagari;
    if (cp >= 0x0c00 && cp <= 0x0c7f) return CpClass::telugu;
    if (cp >= 0x0b80 && cp <= 0x0bff) return CpClass::tamil;
    // Latin-1 / Latin Extended letters.
    if ((cp >= 0xc0 && cp <= 0xff) || (cp >= 0x100 && cp <= 0x17f)) return CpClass::latin_letter;
    return CpClass::other_word;
}

char32_t fold_case(char32_t cp) {
    if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
    if (cp >= 0xc0 && cp <= 0xde && cp != 0xd7) return cp + 0x20; // Latin-1 uppercase
    return cp;
}

std::size_t codepoint_count(std::string_view s) {
    std::size_t n = 0, i = 0;
    while (i < s.size()) {
        i += decode_utf8(s, i).len;
        ++n;
    }
    return n;
}

} // namespace groupsift::util

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace groupsift::util {

/// One URL occurrence inside a text. `raw` is the matched substring with
/// trailing sentence punctuation trimmed; `host` is the lowercased host with
/// scheme, credentials, port and path stripped.
struct UrlSpan {
    std::size_t begin = 0;
    std::size_t end = 0; // one past the last byte of `raw`
    std::string raw;
    std::string host;
};

/// Recognize URLs by grammar:
///   - "http://" or "https://" prefix (case-insensitive scheme), or
///   - "www." prefix, or
///   - a bare messaging-invite host ("chat.whatsapp.com/...").
/// A candidate only starts at a word boundary (preceding char not alphanumeric)
/// and its host must look like a hostname (dotted labels of [a-z0-9-], alpha TLD).
/// Unparseable candidates are skipped, never fatal.
std::vector<UrlSpan> scan_urls(std::string_view text);

/// `text` with every URL span replaced by a single space.
std::string strip_urls(std::string_view text, const std::vector<UrlSpan>& spans);

} // namespace groupsift::util

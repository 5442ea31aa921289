#include "groupsift/util/urlscan.hpp"

#include <cctype>

namespace groupsift::util {

namespace {

bool is_url_char(char c) {
    if (std::isalnum(static_cast<unsigned char>(c))) return true;
    static constexpr std::string_view extra = "-._~:/?#[]@!$&'()*+,;=%";
    return extra.find(c) != std::string_view::npos;
}

bool starts_with_ci(std::string_view s, std::size_t pos, std::string_view prefix) {
    if (pos + prefix.size() > s.size()) return false;
    for (std::size_t i = 0; i < prefix.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(s[pos + i])) != prefix[i]) return false;
    }
    return true;
}

bool boundary_ok(std::string_view s, std::size_t pos) {
    if (pos == 0) return true;
    return !std::isalnum(static_cast<unsigned char>(s[pos - 1]));
}

// Lowercase a host candidate and check it looks like a hostname:
// dotted labels of [a-z0-9-], at least one dot, alphabetic final label of >= 2 chars.
bool valid_host(std::string& host) {
    for (char& c : host) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (host.empty() || host.front() == '.' || host.back() == '.') return false;
    std::size_t last_dot = std::string::npos;
    std::size_t label_len = 0;
    for (std::size_t i = 0; i < host.size(); ++i) {
        char c = host[i];
        if (c == '.') {
            if (label_len == 0) return false;
            last_dot = i;
            label_len = 0;
        } else if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-') {
            ++label_len;
        } else {
            return false;
        }
    }
    if (last_dot == std::string::npos) return false;
    std::string_view tld = std::string_view(host).substr(last_dot + 1);
    if (tld.size() < 2) return false;
    for (char c : tld) {
        if (c < 'a' || c > 'z') return false;
    }
    return true;
}

} // namespace

std::vector<UrlSpan> scan_urls(std::string_view text) {
    std::vector<UrlSpan> out;
    std::size_t i = 0;
    while (i < text.size()) {
        std::size_t scheme_len = 0;
        bool matched = false;
        if (boundary_ok(text, i)) {
            if (starts_with_ci(text, i, "https://")) {
                scheme_len = 8;
                matched = true;
            } else if (starts_with_ci(text, i, "http://")) {
                scheme_len = 7;
                matched = true;
            } else if (starts_with_ci(text, i, "www.")) {
                matched = true;
            } else if (starts_with_ci(text, i, "chat.whatsapp.com")) {
                matched = true;
            }
        }
        if (!matched) {
            ++i;
            continue;
        }

        std::size_t end = i;
        while (end < text.size() && is_url_char(text[end])) ++end;
        // Trim trailing sentence punctuation and unbalanced closers.
        while (end > i) {
            char c = text[end - 1];
            if (c == '.' || c == ',' || c == ';' || c == '!' || c == '?' || c == ')' ||
                c == ']' || c == '\'' || c == ':') {
                --end;
            } else {
                break;
            }
        }
        std::string raw(text.substr(i, end - i));
        if (raw.size() <= scheme_len) {
            ++i;
            continue;
        }

        std::string rest = raw.substr(scheme_len);
        // Strip credentials ("user@host"), then cut at path/query/fragment/port.
        std::size_t path_cut = rest.find_first_of("/?#");
        std::string authority = rest.substr(0, path_cut);
        if (std::size_t at = authority.rfind('@'); at != std::string::npos) {
            authority = authority.substr(at + 1);
        }
        if (std::size_t colon = authority.find(':'); colon != std::string::npos) {
            authority = authority.substr(0, colon);
        }
        if (!valid_host(authority)) {
            // Not a plausible hostname; skip this candidate and move on.
            i += scheme_len > 0 ? scheme_len : 1;
            continue;
        }
        out.push_back(UrlSpan{i, end, std::move(raw), std::move(authority)});
        i = end;
    }
    return out;
}

std::string strip_urls(std::string_view text, const std::vector<UrlSpan>& spans) {
    std::string out;
    out.reserve(text.size());
    std::size_t pos = 0;
    for (const auto& sp : spans) {
        out.append(text.substr(pos, sp.begin - pos));
        out.push_back(' ');
        pos = sp.end;
    }
    out.append(text.substr(pos));
    return out;
}

} // namespace groupsift::util

#include "groupsift/signals.hpp"

#include "groupsift/util/urlscan.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <stdexcept>

namespace groupsift {

std::vector<UrlRecord> extract_urls(std::string_view text) {
    std::vector<UrlRecord> out;
    for (auto& span : util::scan_urls(text)) {
        out.push_back(UrlRecord{std::move(span.raw), std::move(span.host), std::nullopt,
                                std::nullopt});
    }
    return out;
}

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

// A phone match must not butt up against an identifier, a decimal number, a
// hash-tag or another '+'.
bool phone_boundary_ok(std::string_view s, std::size_t pos) {
    if (pos == 0) return true;
    char p = s[pos - 1];
    if (std::isalnum(static_cast<unsigned char>(p))) return false;
    return p != '#' && p != '+' && p != '.';
}

struct DigitRun {
    std::string digits;        // concatenated digits over all groups
    std::size_t end = 0;       // one past the last digit consumed
    std::size_t first_group_end = 0;
};

// Collect digit groups starting at `pos`, where groups are joined by a single
// space or dash that is itself followed by a digit.
DigitRun collect_digits(std::string_view s, std::size_t pos) {
    DigitRun run;
    std::size_t i = pos;
    bool first = true;
    while (i < s.size() && is_digit(s[i])) {
        while (i < s.size() && is_digit(s[i])) {
            run.digits.push_back(s[i]);
            ++i;
        }
        if (first) {
            run.first_group_end = i;
            first = false;
        }
        if (i + 1 < s.size() && (s[i] == ' ' || s[i] == '-') && is_digit(s[i + 1])) {
            ++i; // consume the separator and continue with the next group
        } else {
            break;
        }
    }
    run.end = i;
    return run;
}

// Reject matches that end right before a decimal tail like "...3210.5".
bool phone_tail_ok(std::string_view s, std::size_t end) {
    if (end < s.size() && s[end] == '.' && end + 1 < s.size() && is_digit(s[end + 1])) {
        return false;
    }
    return true;
}

struct RawPhone {
    std::string country_code;
    std::string subscriber;
};

std::vector<RawPhone> scan_phones(std::string_view text, const std::string& domestic_cc) {
    std::vector<RawPhone> out;
    std::size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        if (c == '+' && i + 1 < text.size() && is_digit(text[i + 1]) &&
            phone_boundary_ok(text, i)) {
            DigitRun run = collect_digits(text, i + 1);
            if (run.digits.size() <= 15 && phone_tail_ok(text, run.end)) {
                if (auto split = split_e164(run.digits);
                    split && split->second.size() >= 7 && split->second.size() <= 12) {
                    out.push_back(RawPhone{split->first, split->second});
                    i = run.end;
                    continue;
                }
            }
            ++i; // failed '+' parse; the digits behind it are fenced off by the
                 // boundary rule, so a plain increment is enough
            continue;
        }
        if (is_digit(c) && phone_boundary_ok(text, i)) {
            DigitRun run = collect_digits(text, i);
            if (run.digits.size() == 10 && run.digits[0] >= '6' && run.digits[0] <= '9' &&
                phone_tail_ok(text, run.end)) {
                out.push_back(RawPhone{domestic_cc, run.digits});
                i = run.end;
                continue;
            }
            // Not a phone; retry from the group after the first one.
            i = run.first_group_end;
            continue;
        }
        ++i;
    }
    return out;
}

std::string text_without_urls(std::string_view text) {
    auto urls = util::scan_urls(text);
    if (urls.empty()) return std::string(text);
    return util::strip_urls(text, urls);
}

} // namespace

std::vector<PhoneMention> extract_phone_numbers(std::string_view text, const Anonymizer& anon) {
    // Digits inside URLs are link payload, not phone mentions.
    std::string stripped = text_without_urls(text);
    std::vector<PhoneMention> out;
    for (const auto& raw : scan_phones(stripped, anon.domestic_cc())) {
        out.push_back(PhoneMention{raw.country_code, anon.digest_subscriber(raw.subscriber)});
    }
    return out;
}

ContentSignal encode_signal(std::string_view text) {
    ContentSignal sig;
    auto urls = util::scan_urls(text);
    sig.has_url = !urls.empty();
    std::string stripped = urls.empty() ? std::string(text) : util::strip_urls(text, urls);
    // Presence only: the country code used for bare numbers is irrelevant here.
    sig.has_phone = !scan_phones(stripped, "91").empty();
    return sig;
}

bool verify_signal(std::string_view text, ContentSignal claimed) {
    return encode_signal(text) == claimed;
}

std::vector<ContentSignal> encode_signals(std::span<const Message> messages, ExecMode mode) {
    std::vector<ContentSignal> out(messages.size());
    util::parallel_for(messages.size(), mode,
                       [&](std::size_t i) { out[i] = encode_signal(messages[i].text); });
    return out;
}

OfflineReputationMap OfflineReputationMap::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open reputation map: " + path);
    std::vector<std::pair<std::string, LookupOutcome>> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        std::size_t t1 = line.find('\t');
        std::size_t t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
        if (t1 == std::string::npos || t2 == std::string::npos) {
            throw std::runtime_error("reputation map " + path + ": line " +
                                     std::to_string(line_no) +
                                     " needs domain<TAB>category<TAB>engines");
        }
        std::string domain = line.substr(0, t1);
        for (char& ch : domain) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        LookupOutcome o;
        o.status = LookupOutcome::Status::found;
        o.category = line.substr(t1 + 1, t2 - t1 - 1);
        try {
            o.engines_flagged = std::stoi(line.substr(t2 + 1));
        } catch (const std::exception&) {
            throw std::runtime_error("reputation map " + path + ": line " +
                                     std::to_string(line_no) + " has a non-numeric engine count");
        }
        if (o.engines_flagged < 0) {
            throw std::runtime_error("reputation map " + path + ": line " +
                                     std::to_string(line_no) + " has a negative engine count");
        }
        entries.emplace_back(std::move(domain), std::move(o));
    }
    return from_entries(std::move(entries));
}

OfflineReputationMap OfflineReputationMap::from_entries(
    std::vector<std::pair<std::string, LookupOutcome>> entries) {
    OfflineReputationMap m;
    m.map_ = std::move(entries);
    std::sort(m.map_.begin(), m.map_.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    return m;
}

std::vector<LookupOutcome> OfflineReputationMap::lookup(std::span<const std::string> domains) {
    std::vector<LookupOutcome> out;
    out.reserve(domains.size());
    for (const auto& d : domains) {
        auto it = std::lower_bound(map_.begin(), map_.end(), d,
                                   [](const auto& e, const std::string& key) { return e.first < key; });
        if (it != map_.end() && it->first == d) {
            out.push_back(it->second);
        } else {
            out.push_back(LookupOutcome{LookupOutcome::Status::missing, "", 0});
        }
    }
    return out;
}

void categorize_urls(std::vector<UrlRecord>& records, ReputationClient& client) {
    std::vector<std::string> domains;
    domains.reserve(records.size());
    for (const auto& r : records) domains.push_back(r.domain);
    std::sort(domains.begin(), domains.end());
    domains.erase(std::unique(domains.begin(), domains.end()), domains.end());

    auto outcomes = client.lookup(domains);
    if (outcomes.size() != domains.size()) {
        throw std::runtime_error("reputation client returned a short batch");
    }
    for (auto& r : records) {
        auto it = std::lower_bound(domains.begin(), domains.end(), r.domain);
        const LookupOutcome& o = outcomes[static_cast<std::size_t>(it - domains.begin())];
        switch (o.status) {
            case LookupOutcome::Status::found:
                r.category = o.category;
                r.engines_flagged = o.engines_flagged;
                break;
            case LookupOutcome::Status::missing:
                r.category = "uncategorized";
                r.engines_flagged = 0;
                break;
            case LookupOutcome::Status::failed:
                // Per-domain isolation: mark and keep going.
                r.category = "lookup_failed";
                r.engines_flagged = 0;
                break;
        }
    }
}

MaliciousnessBuckets maliciousness_buckets(std::span<const UrlRecord> records, int lo, int hi) {
    MaliciousnessBuckets b;
    for (const auto& r : records) {
        int engines = r.engines_flagged.value_or(0);
        if (engines >= lo) {
            ++b.flagged_3plus;
            if (engines >= hi) ++b.flagged_9plus;
        } else {
            ++b.clean;
        }
    }
    return b;
}

} // namespace groupsift

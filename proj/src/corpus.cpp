#include "groupsift/corpus.hpp"

#include "groupsift/util/hash.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace groupsift {

using nlohmann::json;

std::string_view lang_name(Lang l) {
    switch (l) {
        case Lang::hi: return "hi";
        case Lang::en: return "en";
        case Lang::te: return "te";
        case Lang::ta: return "ta";
        case Lang::other: return "other";
    }
    return "other";
}

std::optional<Lang> lang_from_name(std::string_view name) {
    if (name == "hi") return Lang::hi;
    if (name == "en") return Lang::en;
    if (name == "te") return Lang::te;
    if (name == "ta") return Lang::ta;
    if (name == "other") return Lang::other;
    return std::nullopt;
}

std::string_view action_kind_name(ActionKind k) {
    switch (k) {
        case ActionKind::added: return "added";
        case ActionKind::added_by_admin: return "added_by_admin";
        case ActionKind::joined_via_link: return "joined_via_link";
        case ActionKind::left: return "left";
        case ActionKind::removed: return "removed";
        case ActionKind::number_changed: return "number_changed";
    }
    return "added";
}

std::optional<ActionKind> action_kind_from_name(std::string_view name) {
    if (name == "added") return ActionKind::added;
    if (name == "added_by_admin") return ActionKind::added_by_admin;
    if (name == "joined_via_link") return ActionKind::joined_via_link;
    if (name == "left") return ActionKind::left;
    if (name == "removed") return ActionKind::removed;
    if (name == "number_changed") return ActionKind::number_changed;
    return std::nullopt;
}

void Corpus::finalize() {
    std::stable_sort(messages.begin(), messages.end(), [](const Message& a, const Message& b) {
        if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
        return a.msg_id < b.msg_id;
    });
    std::stable_sort(events.begin(), events.end(), [](const ActionEvent& a, const ActionEvent& b) {
        return a.timestamp < b.timestamp;
    });
    groups.clear();
    for (const auto& m : messages) groups.insert(m.group_id);
    for (const auto& e : events) groups.insert(e.group_id);
}

namespace {

// Assigned ITU E.164 country calling codes, used for longest-prefix splitting.
constexpr std::array kCountryCodes = {
    "1",   "7",   "20",  "27",  "30",  "31",  "32",  "33",  "34",  "36",  "39",  "40",
    "41",  "43",  "44",  "45",  "46",  "47",  "48",  "49",  "51",  "52",  "53",  "54",
    "55",  "56",  "57",  "58",  "60",  "61",  "62",  "63",  "64",  "65",  "66",  "81",
    "82",  "84",  "86",  "90",  "91",  "92",  "93",  "94",  "95",  "98",  "211", "212",
    "213", "216", "218", "220", "221", "222", "223", "224", "225", "226", "227", "228",
    "229", "230", "231", "232", "233", "234", "235", "236", "237", "238", "239", "240",
    "241", "242", "243", "244", "245", "246", "247", "248", "249", "250", "251", "252",
    "253", "254", "255", "256", "257", "258", "260", "261", "262", "263", "264", "265",
    "266", "267", "268", "269", "290", "291", "297", "298", "299", "350", "351", "352",
    "353", "354", "355", "356", "357", "358", "359", "370", "371", "372", "373", "374",
    "375", "376", "377", "378", "379", "380", "381", "382", "383", "385", "386", "387",
    "389", "420", "421", "423", "500", "501", "502", "503", "504", "505", "506", "507",
    "508", "509", "590", "591", "592", "593", "594", "595", "596", "597", "598", "599",
    "670", "672", "673", "674", "675", "676", "677", "678", "679", "680", "681", "682",
    "683", "685", "686", "687", "688", "689", "690", "691", "692", "800", "808", "850",
    "852", "853", "855", "856", "870", "878", "880", "881", "882", "883", "886", "888",
    "960", "961", "962", "963", "964", "965", "966", "967", "968", "970", "971", "972",
    "973", "974", "975", "976", "977", "979", "992", "993", "994", "995", "996", "998",
};

bool is_assigned_code(std::string_view code) {
    for (std::string_view c : kCountryCodes) {
        if (c == code) return true;
    }
    return false;
}

bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    return std::all_of(s.begin(), s.end(),
                       [](unsigned char c) { return std::isdigit(c) != 0; });
}

bool valid_digest(std::string_view s) {
    if (s.size() != 64) return false;
    return std::all_of(s.begin(), s.end(), [](unsigned char c) {
        return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
    });
}

} // namespace

std::optional<std::pair<std::string, std::string>> split_e164(std::string_view digits) {
    for (std::size_t len = 3; len >= 1; --len) {
        if (digits.size() <= len) continue; // subscriber part must be non-empty
        std::string_view prefix = digits.substr(0, len);
        if (is_assigned_code(prefix)) {
            return std::make_pair(std::string(prefix), std::string(digits.substr(len)));
        }
    }
    return std::nullopt;
}

Anonymizer::Anonymizer(std::string salt, std::string domestic_cc)
    : salt_(std::move(salt)), domestic_cc_(std::move(domestic_cc)) {}

std::string Anonymizer::digest_subscriber(std::string_view subscriber_digits) const {
    std::string buf;
    buf.reserve(subscriber_digits.size() + salt_.size());
    buf.append(subscriber_digits);
    buf.append(salt_);
    return util::sha256_hex(buf);
}

UserRef Anonymizer::anonymize(std::string_view raw_number) const {
    std::string cleaned;
    cleaned.reserve(raw_number.size());
    for (char c : raw_number) {
        if (c == ' ' || c == '-' || c == '(' || c == ')') continue;
        cleaned.push_back(c);
    }
    if (cleaned.empty()) throw std::invalid_argument("empty phone number");

    if (cleaned.front() == '+') {
        std::string_view digits = std::string_view(cleaned).substr(1);
        if (!all_digits(digits)) {
            throw std::invalid_argument("non-digit characters in number: " + cleaned);
        }
        if (digits.size() > 15) {
            throw std::invalid_argument("number longer than 15 digits: " + cleaned);
        }
        auto split = split_e164(digits);
        if (!split) {
            throw std::invalid_argument("no assigned country code matches: " + cleaned);
        }
        return UserRef{split->first, digest_subscriber(split->second)};
    }

    // Bare numbers: the dataset's domestic convention is 10 subscriber digits.
    if (all_digits(cleaned) && cleaned.size() == 10) {
        return UserRef{domestic_cc_, digest_subscriber(cleaned)};
    }
    throw std::invalid_argument("unrecognized number format: " + cleaned);
}

namespace {

json user_to_json(const UserRef& u) {
    return json{{"cc", u.country_code}, {"digest", u.digest}};
}

// Parse a sender/user field: raw "+digits" string or canonical {cc,digest}.
UserRef parse_user(const json& j, const Anonymizer& anon) {
    if (j.is_string()) {
        return anon.anonymize(j.get<std::string>());
    }
    if (j.is_object()) {
        if (!j.contains("cc") || !j.contains("digest") || !j["cc"].is_string() ||
            !j["digest"].is_string()) {
            throw std::invalid_argument("canonical user needs string cc and digest");
        }
        std::string cc = j["cc"].get<std::string>();
        std::string digest = j["digest"].get<std::string>();
        if (!all_digits(cc) || cc.size() > 3 || !is_assigned_code(cc)) {
            throw std::invalid_argument("bad country code: " + cc);
        }
        if (!valid_digest(digest)) {
            throw std::invalid_argument("digest must be 64 lowercase hex chars");
        }
        return UserRef{std::move(cc), std::move(digest)};
    }
    throw std::invalid_argument("user must be a string or {cc,digest} object");
}

} // namespace

IngestResult ingest_stream(std::istream& in, const Anonymizer& anon) {
    if (!in) throw std::runtime_error("ingest: unreadable input stream");

    IngestResult result;
    std::unordered_set<std::string> seen_ids;
    std::string line;
    std::size_t line_no = 0;

    auto fail = [&](std::string field, std::string reason) {
        result.errors.push_back(IngestError{line_no, std::move(field), std::move(reason)});
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;

        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            fail("json", "line is not a JSON object");
            continue;
        }
        if (!j.contains("type") || !j["type"].is_string()) {
            fail("type", "missing record type");
            continue;
        }
        const std::string type = j["type"].get<std::string>();

        if (type == "msg") {
            Message m;
            if (!j.contains("id") || !j["id"].is_string() || j["id"].get<std::string>().empty()) {
                fail("id", "missing or empty message id");
                continue;
            }
            m.msg_id = j["id"].get<std::string>();
            if (!seen_ids.insert(m.msg_id).second) {
                fail("id", "duplicate message id: " + m.msg_id);
                continue;
            }
            if (!j.contains("group") || !j["group"].is_string() ||
                j["group"].get<std::string>().empty()) {
                fail("group", "missing or empty group id");
                continue;
            }
            m.group_id = j["group"].get<std::string>();
            if (!j.contains("ts") || !j["ts"].is_number_integer() ||
                j["ts"].get<std::int64_t>() <= 0) {
                fail("ts", "timestamp must be a positive integer");
                continue;
            }
            m.timestamp = j["ts"].get<std::int64_t>();
            if (!j.contains("sender")) {
                fail("sender", "missing sender");
                continue;
            }
            try {
                m.sender = parse_user(j["sender"], anon);
            } catch (const std::invalid_argument& e) {
                fail("sender", e.what());
                continue;
            }
            if (!j.contains("text") || !j["text"].is_string()) {
                fail("text", "missing text");
                continue;
            }
            m.text = j["text"].get<std::string>();
            m.media_placeholder = j.value("media", false);
            if (m.text.empty() && !m.media_placeholder) {
                fail("text", "empty text without media placeholder flag");
                continue;
            }
            if (j.contains("lang")) {
                if (auto l = j["lang"].is_string()
                                 ? lang_from_name(j["lang"].get<std::string>())
                                 : std::nullopt) {
                    m.language = *l;
                } else {
                    fail("lang", "unknown language tag");
                    continue;
                }
            }
            result.corpus.messages.push_back(std::move(m));
        } else if (type == "act") {
            ActionEvent e;
            if (!j.contains("group") || !j["group"].is_string() ||
                j["group"].get<std::string>().empty()) {
                fail("group", "missing or empty group id");
                continue;
            }
            e.group_id = j["group"].get<std::string>();
            if (!j.contains("kind") || !j["kind"].is_string()) {
                fail("kind", "missing action kind");
                continue;
            }
            auto kind = action_kind_from_name(j["kind"].get<std::string>());
            if (!kind) {
                fail("kind", "unknown action kind: " + j["kind"].get<std::string>());
                continue;
            }
            e.kind = *kind;
            if (!j.contains("ts") || !j["ts"].is_number_integer() ||
                j["ts"].get<std::int64_t>() <= 0) {
                fail("ts", "timestamp must be a positive integer");
                continue;
            }
            e.timestamp = j["ts"].get<std::int64_t>();
            if (!j.contains("user")) {
                fail("user", "missing subject user");
                continue;
            }
            try {
                e.subject = parse_user(j["user"], anon);
            } catch (const std::invalid_argument& ex) {
                fail("user", ex.what());
                continue;
            }
            if (e.kind == ActionKind::number_changed) {
                if (!j.contains("new_user")) {
                    fail("new_user", "number_changed requires new_user");
                    continue;
                }
                try {
                    e.new_identity = parse_user(j["new_user"], anon);
                } catch (const std::invalid_argument& ex) {
                    fail("new_user", ex.what());
                    continue;
                }
            } else if (j.contains("new_user")) {
                fail("new_user", "new_user only valid for number_changed");
                continue;
            }
            result.corpus.events.push_back(std::move(e));
        } else {
            fail("type", "unknown record type: " + type);
        }
    }

    result.corpus.finalize();
    return result;
}

IngestResult ingest_file(const std::string& path, const Anonymizer& anon) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("ingest: cannot open " + path);
    return ingest_stream(in, anon);
}

void write_corpus(const Corpus& corpus, std::ostream& out) {
    for (const auto& m : corpus.messages) {
        json j{{"type", "msg"}, {"id", m.msg_id},      {"group", m.group_id},
               {"ts", m.timestamp}, {"sender", user_to_json(m.sender)}, {"text", m.text}};
        if (m.media_placeholder) j["media"] = true;
        if (m.language) j["lang"] = std::string(lang_name(*m.language));
        out << j.dump() << '\n';
    }
    for (const auto& e : corpus.events) {
        json j{{"type", "act"},
               {"group", e.group_id},
               {"kind", std::string(action_kind_name(e.kind))},
               {"ts", e.timestamp},
               {"user", user_to_json(e.subject)}};
        if (e.new_identity) j["new_user"] = user_to_json(*e.new_identity);
        out << j.dump() << '\n';
    }
}

void write_corpus_file(const Corpus& corpus, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    write_corpus(corpus, out);
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + path);
}

} // namespace groupsift

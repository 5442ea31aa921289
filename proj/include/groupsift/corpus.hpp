#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace groupsift {

/// Language tag attached by script-majority detection.
enum class Lang { hi, en, te, ta, other };

std::string_view lang_name(Lang l);
std::optional<Lang> lang_from_name(std::string_view name);

/// Pseudonymous user identity: the country code stays in the clear for
/// origin analyses, the subscriber digits are replaced by a salted one-way
/// digest. Raw numbers never appear in any persisted structure.
struct UserRef {
    std::string country_code; // 1-3 digits
    std::string digest;       // 64 lowercase hex chars

    /// Stable map/set key ("<cc>:<digest>").
    std::string key() const { return country_code + ":" + digest; }

    auto operator<=>(const UserRef&) const = default;
};

enum class ActionKind {
    added,
    added_by_admin,
    joined_via_link,
    left,
    removed,
    number_changed
};

std::string_view action_kind_name(ActionKind k);
std::optional<ActionKind> action_kind_from_name(std::string_view name);

struct Message {
    std::string msg_id;
    std::string group_id;
    UserRef sender;
    std::int64_t timestamp = 0; // epoch seconds, > 0
    std::string text;           // may be empty only if media_placeholder
    bool media_placeholder = false;
    std::optional<Lang> language;

    bool operator==(const Message&) const = default;
};

struct ActionEvent {
    std::string group_id;
    UserRef subject;
    ActionKind kind = ActionKind::added;
    std::int64_t timestamp = 0;
    std::optional<UserRef> new_identity; // present iff kind == number_changed

    bool operator==(const ActionEvent&) const = default;
};

struct Corpus {
    std::vector<Message> messages;
    std::vector<ActionEvent> events;
    std::set<std::string> groups;

    /// Sort both lists by timestamp (messages tie-break on id; events keep
    /// input order on ties) and rebuild the group set.
    void finalize();

    bool operator==(const Corpus&) const = default;
};

/// Longest-prefix match against the ITU country-code table.
/// Returns {country_code, subscriber_digits}; nullopt when no assigned code
/// prefixes the digits or the subscriber part would be empty.
std::optional<std::pair<std::string, std::string>> split_e164(std::string_view digits);

/// Salted one-way anonymization of phone-number identities.
class Anonymizer {
public:
    explicit Anonymizer(std::string salt, std::string domestic_cc = "91");

    /// Accepts "+<cc><subscriber>" (international) or a bare 10-digit domestic
    /// number (assigned the domestic country code). Spaces, dashes and
    /// parentheses are stripped first. Throws std::invalid_argument on
    /// malformed input.
    UserRef anonymize(std::string_view raw_number) const;

    /// digest = sha256(subscriber_digits || salt); exposed for phone-mention
    /// hashing so mentions join the same pseudonym space as senders.
    std::string digest_subscriber(std::string_view subscriber_digits) const;

    const std::string& domestic_cc() const { return domestic_cc_; }
    const std::string& salt() const { return salt_; }

private:
    std::string salt_;
    std::string domestic_cc_;
};

struct IngestError {
    std::size_t line_no = 0; // 1-based
    std::string field;
    std::string reason;
};

struct IngestResult {
    Corpus corpus;
    std::vector<IngestError> errors;
};

/// Parse line-delimited JSON records. Messages carry either a raw "+digits"
/// sender (anonymized on the way in) or an already-canonical {"cc","digest"}
/// object, so serializing and re-ingesting is a fixed point. Invalid lines are
/// collected into the error report and skipped; only an unreadable stream is
/// fatal.
IngestResult ingest_stream(std::istream& in, const Anonymizer& anon);
IngestResult ingest_file(const std::string& path, const Anonymizer& anon);

/// Canonical serialization: messages first (sorted), then events, one JSON
/// object per line, fixed key order.
void write_corpus(const Corpus& corpus, std::ostream& out);
void write_corpus_file(const Corpus& corpus, const std::string& path);

} // namespace groupsift

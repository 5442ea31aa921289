#pragma once

#include "groupsift/corpus.hpp"
#include "groupsift/util/parallel.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace groupsift {

/// The 2-bit per-message content signal: bit 0 = contains a URL, bit 1 =
/// contains a phone number. Values 0..3; value 0 is a "simple" message.
struct ContentSignal {
    bool has_url = false;
    bool has_phone = false;

    int value() const { return (has_url ? 1 : 0) | (has_phone ? 2 : 0); }
    static ContentSignal from_value(int v) { return {(v & 1) != 0, (v & 2) != 0}; }

    bool operator==(const ContentSignal&) const = default;
};

struct UrlRecord {
    std::string raw;    // matched substring
    std::string domain; // lowercased host, scheme/credentials/port/path stripped
    std::optional<std::string> category;
    std::optional<int> engines_flagged; // >= 0 when known

    bool operator==(const UrlRecord&) const = default;
};

/// URL occurrences in order of appearance. Grammar: http/https scheme, a
/// "www." prefix, or a bare messaging-invite host; candidates must start at a
/// word boundary and parse to a plausible hostname, otherwise they are skipped.
std::vector<UrlRecord> extract_urls(std::string_view text);

/// A phone number seen inside message text, hashed into the same pseudonym
/// space as senders (same salt, same digest construction).
struct PhoneMention {
    std::string country_code;
    std::string digest;

    bool operator==(const PhoneMention&) const = default;
};

/// Phone-number grammar: "+<country code>" followed by 7-12 subscriber digits,
/// or a bare 10-digit number starting 6-9; digit groups may be separated by a
/// single space or dash. A match must not be preceded by an alphanumeric, '#',
/// '+' or '.', and must not be followed by another digit (or a decimal tail).
std::vector<PhoneMention> extract_phone_numbers(std::string_view text, const Anonymizer& anon);

/// Signal encoding needs only presence, not identities, so it takes no salt.
ContentSignal encode_signal(std::string_view text);

/// True iff a fresh encode of `text` reproduces `claimed` exactly.
bool verify_signal(std::string_view text, ContentSignal claimed);

/// Batch kernel over many texts (exposed serial/parallel for tests and bench).
std::vector<ContentSignal> encode_signals(std::span<const Message> messages,
                                          ExecMode mode = ExecMode::parallel);

/// Domain-reputation lookups. Implementations must isolate per-domain
/// failures: one failed domain never aborts the batch.
struct LookupOutcome {
    enum class Status { found, missing, failed };
    Status status = Status::missing;
    std::string category;
    int engines_flagged = 0;
};

class ReputationClient {
public:
    virtual ~ReputationClient() = default;
    virtual std::vector<LookupOutcome> lookup(std::span<const std::string> domains) = 0;
};

/// Offline client over a "domain<TAB>category<TAB>engines_flagged" map file.
class OfflineReputationMap final : public ReputationClient {
public:
    static OfflineReputationMap load(const std::string& path);
    static OfflineReputationMap from_entries(
        std::vector<std::pair<std::string, LookupOutcome>> entries);

    std::vector<LookupOutcome> lookup(std::span<const std::string> domains) override;

    std::size_t size() const { return map_.size(); }

private:
    std::vector<std::pair<std::string, LookupOutcome>> map_; // sorted by domain
};

/// Fill category/engines_flagged on the records: found entries copy the map
/// values, missing domains become "uncategorized" with 0 engines, failed
/// lookups are marked "lookup_failed" (engines 0) and processing continues.
void categorize_urls(std::vector<UrlRecord>& records, ReputationClient& client);

struct MaliciousnessBuckets {
    std::uint64_t flagged_3plus = 0; // engines >= lo (includes the 9plus rows)
    std::uint64_t flagged_9plus = 0; // engines >= hi
    std::uint64_t clean = 0;         // engines < lo or unknown
};

MaliciousnessBuckets maliciousness_buckets(std::span<const UrlRecord> records, int lo = 3,
                                           int hi = 9);

} // namespace groupsift

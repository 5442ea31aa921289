#pragma once

// Descriptive analytics over a clustered, labeled corpus: campaign timelines,
// sender lifetimes, join/departure attribution, pre-removal behavior, and
// country distribution. All day values are UTC days since the Unix epoch.

#include "groupsift/corpus.hpp"
#include "groupsift/dedup.hpp"
#include "groupsift/labeling.hpp"
#include "groupsift/signals.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace groupsift {

struct ClusterTimeline {
    std::string cluster_id;
    std::int64_t first_day = 0;
    std::int64_t last_day = 0;
    std::map<std::int64_t, std::uint64_t> daily_counts;
    std::map<std::int64_t, std::set<std::string>> senders_per_day; // user keys
    std::set<std::string> all_senders;
};

std::vector<ClusterTimeline> build_timelines(const Corpus& corpus,
                                             const std::vector<MessageCluster>& clusters);

// Days between first and last sighting (0 for a single-day cluster).
std::int64_t cluster_lifetime_days(const ClusterTimeline& t);

struct ActiveDays {
    std::uint64_t count = 0;
    double fraction = 0.0; // count / (lifetime + 1)
};

// Days on which the cluster produced at least `min_msgs` messages.
ActiveDays active_days(const ClusterTimeline& t, std::uint64_t min_msgs = 10);

// For each active day (ordered), the fraction of the cluster's distinct
// senders that posted it that day.
std::vector<double> phones_active_fraction(const ClusterTimeline& t,
                                           std::uint64_t min_msgs = 10);

struct UserLifetime {
    std::string user_key;
    std::int64_t first_day = 0;
    std::int64_t last_day = 0;
};

// First-to-last observed activity (messages sent, membership events as
// subject or incoming identity), sorted by user key.
std::vector<UserLifetime> user_lifetimes(const Corpus& corpus);

// Departure reason x join method, split by junk verdict. A departure is
// attributed to the subject's most recent prior join in the same group;
// departures with no observed join fall in the "unknown" column.
struct JoinLeaveTable {
    // rows: left, number_changed, removed
    // cols: joined_via_link, added, added_by_admin, unknown
    std::array<std::array<std::uint64_t, 4>, 3> junk{};
    std::array<std::array<std::uint64_t, 4>, 3> non_junk{};

    static const std::array<std::string_view, 3>& row_names();
    static const std::array<std::string_view, 4>& col_names();
    // Row counts as fractions summing to 1 (all zeros if the row is empty).
    static std::array<double, 4> normalize(const std::array<std::uint64_t, 4>& row);
};

JoinLeaveTable join_leave_table(const Corpus& corpus,
                                const std::vector<SenderVerdict>& verdicts);

// Classifies each removed user's latest action strictly before the removal:
// a message in a junk-labeled cluster (split by content signal into
// junk_url / junk_phone / junk_plain), any other message (other_post), a
// membership event (membership), or nothing observed (none).
struct PreRemovalBreakdown {
    std::map<std::string, std::uint64_t> counts;
    std::uint64_t total = 0;
};

PreRemovalBreakdown pre_removal_actions(const Corpus& corpus,
                                        const std::vector<MessageCluster>& clusters,
                                        const std::set<std::string>& junk_cluster_ids,
                                        std::span<const ContentSignal> signals);

struct CountryRow {
    std::string country_code;
    std::uint64_t junk_users = 0;
    std::uint64_t non_junk_users = 0;
};

// Distinct users per country code, split by verdict (no verdict counts as
// non-junk). Sorted by country code.
std::vector<CountryRow> country_distribution(const Corpus& corpus,
                                             const std::vector<SenderVerdict>& verdicts);

// Writes the full analytics bundle as TSV files into `out_dir` (created if
// missing) and returns the paths written, in a fixed order.
std::vector<std::string> emit_report(const Corpus& corpus, const std::vector<MessageCluster>& clusters,
                                     const std::vector<LabeledCluster>& labels,
                                     const std::vector<SenderVerdict>& verdicts,
                                     std::span<const ContentSignal> signals,
                                     const std::string& out_dir);

} // namespace groupsift

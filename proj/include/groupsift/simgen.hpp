#pragma once

// Synthetic corpus generator with ground truth. Produces a raw ingest stream
// (pre-anonymization records), the matching anonymized corpus, an offline
// domain-reputation map, and a truth bundle (which phones are junk senders,
// which messages belong to which campaign template, low-entropy fillers,
// domain flag counts) so the whole pipeline can be scored end to end.

#include "groupsift/corpus.hpp"

#include <json_fwd.hpp>

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace groupsift {

/// Day 0 of every simulation maps to this UTC epoch day, so truth day fields
/// compare directly against epoch_day() over generated timestamps.
inline constexpr std::int64_t kSimBaseDay = 19000;

struct CampaignKnobs {
    std::size_t templates = 20;          // one campaign per template
    std::size_t variants_per_template = 10;
    double mutation_jaccard_floor = 0.8; // variants stay this similar to the template
    std::size_t phones_per_campaign = 5; // rotated through contiguous day blocks
    double active_day_prob = 0.4;        // fraction of the span with activity
    std::size_t span_days = 30;
    std::size_t groups_per_campaign = 2;
};

struct BehaviorKnobs {
    double junk_link_join_prob = 0.8;  // junk senders join via invite link
    double legit_link_join_prob = 0.4;
    std::string admin_removal_policy = "after_url_junk"; // or "never"
    std::size_t evasive_junk_senders = 0; // humans whose seed phone is removed twice
    double removal_prob = 0.9;         // chance an eligible junk post triggers removal
    double foreign_junk_prob = 0.0;    // per-human chance their phones are foreign
    double junk_url_prob = 0.6;        // per-campaign chance the template carries a URL
    double junk_phone_prob = 0.3;      // per-campaign chance of a contact number
    double legit_url_prob = 0.05;      // per-post chance a legit message links out
    double legit_junk_prob = 0.0;      // chance a legit human forwards one junk variant
    double junk_leave_prob = 0.2;
    double legit_leave_prob = 0.3;
    double flagged3_junk_domain_rate = 0.26; // junk domains flagged by >= 3 engines
    double flagged9_junk_domain_rate = 0.15; // subset flagged by >= 9 engines
};

struct SimConfig {
    std::size_t n_groups = 10;
    std::size_t n_users = 500;
    double junk_sender_fraction = 0.1;
    CampaignKnobs campaign;
    BehaviorKnobs behavior;
    double low_entropy_rate = 0.1; // fraction of the final stream that is filler
    std::uint64_t seed = 1;
    std::size_t horizon_days = 60;
    double legit_messages_mean = 6.0; // Poisson mean posts per legit human
    std::size_t legit_groups_max = 3;
    std::string salt = "simsalt";

    nlohmann::json to_json() const;
    /// Missing keys keep their defaults, so partial config files are valid.
    static SimConfig from_json(const nlohmann::json& j);
};

struct TruthPhone {
    std::string country_code;
    std::string digest;
    std::string raw; // raw number as emitted into the ingest stream
    std::size_t human = 0;
    bool junk = false;
    std::vector<std::string> campaign_ids;
    /// Epoch day of the first substantive post (campaign or conversational
    /// content). Low-entropy fillers do not count: they are filtered before
    /// clustering, so a filler-only phone is invisible to the pipeline and is
    /// excluded from verdict scoring. -1 when nothing substantive was posted.
    std::int64_t first_post_day = -1;
    std::int64_t last_post_day = -1;
};

struct TruthCampaign {
    std::string id;
    std::size_t human = 0;
    std::vector<std::string> group_ids;
    std::vector<std::string> phone_keys;          // rotation order
    std::vector<std::int64_t> schedule_days;      // epoch days with planned posts
    std::vector<std::int64_t> active_days_expected; // days with >= 10 planted posts
    std::vector<std::string> msg_ids;
    std::string domain; // empty when the template has no URL
    bool has_url = false;
    bool has_phone = false;
};

struct GroundTruth {
    std::uint64_t seed = 0;
    std::map<std::string, TruthPhone> phones; // key = UserRef::key()
    std::vector<TruthCampaign> campaigns;
    std::set<std::string> low_entropy_msg_ids;
    std::set<std::string> junk_msg_ids; // campaign posts + legit forwards
    std::vector<std::string> evasive_seed_phone_keys;
    std::set<std::string> planted_junk_words;
    std::map<std::string, int> junk_domain_engines;
    // msg id -> content class: "tmpl:<campaign>", "pool:<lang>:<i>", "low:<kind>:<i>"
    std::map<std::string, std::string> msg_truth_class;

    nlohmann::json to_json() const;
    static GroundTruth from_json(const nlohmann::json& j);
};

struct SimResult {
    SimConfig config;
    std::vector<std::string> raw_lines;        // ingest records, one JSON per line
    Corpus corpus;                             // the same data, already anonymized
    GroundTruth truth;
    std::vector<std::string> reputation_lines; // offline reputation map rows (TSV)
};

/// Deterministic for a fixed config (independent per-purpose RNG streams).
/// Throws std::invalid_argument for infeasible configurations, e.g. more junk
/// senders than campaign templates, a campaign span longer than the horizon,
/// or evasive seeding with fewer than two groups per campaign.
SimResult generate(const SimConfig& cfg, const std::string& data_dir = "");

/// One line per element, newline-terminated.
void write_lines(const std::vector<std::string>& lines, const std::string& path);

} // namespace groupsift

#pragma once

#include "groupsift/corpus.hpp"
#include "groupsift/dedup.hpp"
#include "groupsift/textprep.hpp"

#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace groupsift {

/// Users removed from at least `min_groups` distinct groups: the seed set of
/// evasive junk senders.
std::set<UserRef> seed_users(std::span<const ActionEvent> events, int min_groups = 2);

struct CurationList {
    std::set<std::string> allow;
    std::set<std::string> deny;

    /// One term per line; '-' prefix denies, optional '+' prefix (or none) allows.
    static CurationList load(const std::string& path);
};

struct JunkDictionary {
    std::set<std::string> words;
    int min_count = 5;
};

/// Words occurring at least `min_count` times across the junk-labeled messages,
/// minus every bundled stopword list, minus denied terms, plus allowed terms.
/// Throws std::invalid_argument when `junk_messages` is empty.
JunkDictionary build_dictionary(std::span<const TokenizedMessage> junk_messages,
                                const StopwordTable& stopwords, int min_count = 5,
                                const CurationList* curation = nullptr);

enum class LabelSource { seed_manual, dictionary_candidate, external };

std::string_view label_source_name(LabelSource s);

struct LabeledCluster {
    std::string cluster_id;
    bool junk = false;
    LabelSource source = LabelSource::seed_manual;

    bool operator==(const LabeledCluster&) const = default;
};

/// Clusters containing at least one message sent by a seed user.
std::vector<LabeledCluster> seed_label(std::span<const MessageCluster> clusters,
                                       const std::set<UserRef>& seeds,
                                       const std::unordered_map<std::string, std::string>&
                                           msg_to_sender_key);

/// Clusters where any member message contains at least one dictionary word.
std::vector<LabeledCluster> dictionary_label(
    std::span<const MessageCluster> clusters, const JunkDictionary& dict,
    const std::unordered_map<std::string, const TokenizedMessage*>& tokens_by_msg);

/// Union of label sets; on conflicts for the same cluster, seed labels win
/// over dictionary candidates. Output sorted by cluster id.
std::vector<LabeledCluster> merge_labels(std::span<const LabeledCluster> seed_labels,
                                         std::span<const LabeledCluster> dict_labels);

/// "cluster_id<TAB>junk|non_junk" per line.
std::vector<std::pair<std::string, bool>> load_review_file(const std::string& path);

/// Reviewer decisions override any automatic label (source becomes external);
/// unreviewed clusters keep their labels.
void apply_review(std::vector<LabeledCluster>& labels,
                  std::span<const std::pair<std::string, bool>> review);

/// Junk threshold as an exact rational so the strict ">" boundary does not
/// depend on floating-point rounding: junk iff junk_count * den > num * total.
struct VerdictParams {
    std::int64_t threshold_num = 1;
    std::int64_t threshold_den = 2;

    /// Parse a decimal like "0.5" into an exact rational.
    static VerdictParams from_decimal(const std::string& text);
};

struct SenderVerdict {
    UserRef user;
    std::uint64_t total_messages = 0; // messages that map to a cluster
    std::uint64_t junk_messages = 0;  // of those, in junk-labeled clusters
    double junk_fraction = 0.0;
    bool is_junk_sender = false;

    bool operator==(const SenderVerdict&) const = default;
};

/// Per-sender verdicts over the messages that map to clusters. Clusters with
/// no label count as non-junk; senders with no clustered messages are skipped.
/// Output sorted by user key.
std::vector<SenderVerdict> sender_verdicts(
    std::span<const Message> messages,
    const std::unordered_map<std::string, std::string>& msg_to_cluster,
    std::span<const LabeledCluster> labels, const VerdictParams& params = {});

} // namespace groupsift

#include "groupsift/scoring.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace groupsift {

Scorecard score_against_truth(const PipelineOutputs& outputs, const GroundTruth& truth) {
    if (outputs.seed != truth.seed) {
        throw std::invalid_argument("score: mismatched run ids (outputs seed " +
                                    std::to_string(outputs.seed) + ", truth seed " +
                                    std::to_string(truth.seed) + ")");
    }
    Scorecard card;

    // Campaign recall: each campaign's surviving messages should co-locate.
    double recall_sum = 0.0;
    std::size_t campaigns_scored = 0;
    for (const TruthCampaign& campaign : truth.campaigns) {
        std::map<std::size_t, std::size_t> per_cluster;
        std::size_t survived = 0;
        for (const std::string& id : campaign.msg_ids) {
            auto it = outputs.msg_to_cluster.find(id);
            if (it == outputs.msg_to_cluster.end()) continue;
            ++survived;
            per_cluster[it->second] += 1;
        }
        if (survived == 0) continue;
        std::size_t best = 0;
        for (const auto& [cluster, count] : per_cluster) best = std::max(best, count);
        recall_sum += static_cast<double>(best) / static_cast<double>(survived);
        ++campaigns_scored;
    }
    card.cluster_recall =
        campaigns_scored == 0 ? 1.0 : recall_sum / static_cast<double>(campaigns_scored);

    // Purity: within each cluster, the share of the majority truth class,
    // weighted by how many classed messages the cluster holds.
    std::size_t majority_total = 0;
    std::size_t classed_total = 0;
    for (const MessageCluster& cluster : outputs.clusters) {
        std::map<std::string, std::size_t> class_counts;
        for (const std::string& id : cluster.member_msg_ids) {
            auto it = truth.msg_truth_class.find(id);
            if (it != truth.msg_truth_class.end()) class_counts[it->second] += 1;
        }
        std::size_t members = 0;
        std::size_t majority = 0;
        for (const auto& [cls, count] : class_counts) {
            members += count;
            majority = std::max(majority, count);
        }
        majority_total += majority;
        classed_total += members;
    }
    card.cluster_purity = classed_total == 0
                              ? 1.0
                              : static_cast<double>(majority_total) /
                                    static_cast<double>(classed_total);

    // Verdicts are judged only against phones that actually posted; a junk
    // phone that never sent a message is invisible to the pipeline by design.
    std::set<std::string> truth_junk;
    for (const auto& [key, phone] : truth.phones) {
        if (phone.junk && phone.first_post_day >= 0) truth_junk.insert(key);
    }
    std::size_t predicted = 0;
    std::size_t hits = 0;
    for (const SenderVerdict& v : outputs.verdicts) {
        if (!v.is_junk_sender) continue;
        ++predicted;
        if (truth_junk.count(v.user.key())) ++hits;
    }
    card.verdict_precision =
        predicted == 0 ? 1.0 : static_cast<double>(hits) / static_cast<double>(predicted);
    card.verdict_recall = truth_junk.empty()
                              ? 1.0
                              : static_cast<double>(hits) /
                                    static_cast<double>(truth_junk.size());

    card.extras["campaigns_scored"] = static_cast<double>(campaigns_scored);
    card.extras["campaigns_total"] = static_cast<double>(truth.campaigns.size());
    card.extras["clusters"] = static_cast<double>(outputs.clusters.size());
    card.extras["messages_clustered"] = static_cast<double>(outputs.msg_to_cluster.size());
    card.extras["truth_junk_senders"] = static_cast<double>(truth_junk.size());
    card.extras["predicted_junk_senders"] = static_cast<double>(predicted);
    return card;
}

} // namespace groupsift

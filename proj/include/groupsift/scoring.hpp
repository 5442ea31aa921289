#pragma once

// Scores a pipeline run against simulator ground truth: how well clustering
// recovered the planted campaigns and how accurate the junk-sender verdicts
// are. Vacuous cases (nothing to score on one axis) count as perfect so a
// metric only drops when there is real evidence against it; a broken pipeline
// still fails because the opposing metric (recall vs precision) collapses.

#include "groupsift/dedup.hpp"
#include "groupsift/labeling.hpp"
#include "groupsift/simgen.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

namespace groupsift {

struct PipelineOutputs {
    std::uint64_t seed = 0; // must match the truth bundle's seed
    std::vector<MessageCluster> clusters;
    /// msg id -> index into clusters, for every message that was clustered.
    std::unordered_map<std::string, std::size_t> msg_to_cluster;
    std::vector<SenderVerdict> verdicts;
};

struct Scorecard {
    /// Mean over campaigns of (largest single-cluster share of the campaign's
    /// surviving messages). 1.0 means every campaign landed in one cluster.
    double cluster_recall = 0.0;
    /// Clustered-message-weighted mean of per-cluster majority-class share,
    /// judged against the simulator's per-message content classes.
    double cluster_purity = 0.0;
    double verdict_precision = 0.0; // flagged senders that are truly junk
    double verdict_recall = 0.0;    // truly junk senders (that posted) flagged
    std::map<std::string, double> extras; // scoring diagnostics (counts)
};

/// Throws std::invalid_argument when outputs.seed != truth.seed ("mismatched
/// run ids") — scoring one run against another run's truth is always a bug.
Scorecard score_against_truth(const PipelineOutputs& outputs, const GroundTruth& truth);

} // namespace groupsift

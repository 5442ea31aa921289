#pragma once

// Per-deployment classifier training: one metadata model per group, trained
// against junk-sender verdicts, plus an aggregate feature-importance report
// contrasting runs with and without the content-signal counters.

#include "groupsift/corpus.hpp"
#include "groupsift/detect.hpp"
#include "groupsift/labeling.hpp"
#include "groupsift/model.hpp"
#include "groupsift/signals.hpp"
#include "groupsift/util/parallel.hpp"

#include <map>
#include <span>
#include <string>
#include <vector>

namespace groupsift {

struct PerGroupConfig {
    TrainConfig train;
    // Groups with fewer profiled users than this are skipped outright.
    std::size_t min_users = 10;
};

struct GroupModelOutcome {
    std::string group_id;
    bool trained = false;
    // When !trained: "single_class" (no positive or no negative user at all)
    // or "too_few_users" (below min_users, a class with fewer than two users,
    // or a training partition under the 20-sample floor).
    std::string skip_reason;
    std::size_t n_users = 0;
    std::size_t n_junk_users = 0;
    EvalReport eval; // valid only when trained
};

struct PerGroupSummary {
    std::vector<GroupModelOutcome> outcomes; // sorted by group id
    std::size_t trained_groups = 0;
    std::size_t skipped_groups = 0;
    double skip_rate = 0.0;
    // Mean and sample standard deviation (n-1) over trained groups.
    double mean_accuracy = 0.0;
    double sd_accuracy = 0.0;
    double mean_f1 = 0.0;
    double sd_f1 = 0.0;
};

// Trains one classifier per group on per-group metadata profiles plus one
// extra column: the content-model junk fraction for the user (keyed by
// UserRef::key(); absent users read 0). Labels come from verdicts; users
// without a verdict count as non-junk. Groups are processed in parallel under
// `mode`; the inner model fit always runs serially so results are identical
// across modes.
PerGroupSummary train_per_group(const Corpus& corpus, std::span<const ContentSignal> signals,
                                const std::vector<SenderVerdict>& verdicts,
                                const std::map<std::string, double>& junk_fraction_by_user,
                                const PerGroupConfig& cfg,
                                ExecMode mode = ExecMode::parallel);

struct ImportanceReport {
    std::map<std::string, double> with_signal;    // feature -> normalized importance
    std::map<std::string, double> without_signal; // ablation: signal counters collapsed
    EvalReport eval_with;
    EvalReport eval_without;
};

// Trains two global random forests on metadata profiles labeled by verdicts
// (full feature set, removal count included) and reports their normalized
// importances side by side.
ImportanceReport importance_report(const Corpus& corpus, std::span<const ContentSignal> signals,
                                   const std::vector<SenderVerdict>& verdicts,
                                   const TrainConfig& cfg, ExecMode mode = ExecMode::parallel);

} // namespace groupsift

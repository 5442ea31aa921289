#include "groupsift/pergroup.hpp"

#include "groupsift/util/hash.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace groupsift {

namespace {

struct MeanSd {
    double mean = 0.0;
    double sd = 0.0;
};

MeanSd mean_sd(const std::vector<double>& xs) {
    MeanSd out;
    if (xs.empty()) return out;
    for (double x : xs) out.mean += x;
    out.mean /= static_cast<double>(xs.size());
    if (xs.size() < 2) return out;
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    return out;
}

std::map<std::string, int> verdict_labels(const std::vector<SenderVerdict>& verdicts) {
    std::map<std::string, int> labels;
    for (const SenderVerdict& v : verdicts) labels[v.user.key()] = v.is_junk_sender ? 1 : 0;
    return labels;
}

// Builds the feature matrix + labels for one group's profiles. The extra
// content column goes last so metadata feature indices stay stable.
void assemble_group(const std::vector<MetadataProfile>& profiles,
                    const std::map<std::string, int>& labels,
                    const std::map<std::string, double>& junk_fraction_by_user,
                    FeatureMatrix& X, std::vector<int>& y) {
    FeatureSpec spec; // with_signal, include_removed: verdict labels leak nothing
    FeatureMatrix base = build_feature_matrix(profiles, spec);
    X.cols = base.cols + 1;
    X.feature_names = base.feature_names;
    X.feature_names.push_back("content_junk_fraction");
    X.rows = 0;
    X.data.clear();
    y.clear();
    std::vector<float> row(X.cols);
    for (std::size_t i = 0; i < profiles.size(); ++i) {
        auto src = base.row(i);
        std::copy(src.begin(), src.end(), row.begin());
        const std::string key = profiles[i].user.key();
        auto jit = junk_fraction_by_user.find(key);
        row[X.cols - 1] = jit == junk_fraction_by_user.end()
                              ? 0.0f
                              : static_cast<float>(jit->second);
        X.push_row(row);
        auto lit = labels.find(key);
        y.push_back(lit == labels.end() ? 0 : lit->second);
    }
}

} // namespace

PerGroupSummary train_per_group(const Corpus& corpus, std::span<const ContentSignal> signals,
                                const std::vector<SenderVerdict>& verdicts,
                                const std::map<std::string, double>& junk_fraction_by_user,
                                const PerGroupConfig& cfg, ExecMode mode) {
    ProfileOptions opts;
    opts.scope = ProfileScope::per_group;
    const std::vector<MetadataProfile> profiles = build_profiles(corpus, signals, opts);

    std::map<std::string, std::vector<MetadataProfile>> by_group;
    for (const MetadataProfile& p : profiles) by_group[p.group_id].push_back(p);

    const std::map<std::string, int> labels = verdict_labels(verdicts);

    std::vector<const std::pair<const std::string, std::vector<MetadataProfile>>*> groups;
    groups.reserve(by_group.size());
    for (const auto& entry : by_group) groups.push_back(&entry);

    PerGroupSummary summary;
    summary.outcomes.resize(groups.size());
    util::parallel_for(groups.size(), mode, [&](std::size_t gi) {
        const auto& [group_id, group_profiles] = *groups[gi];
        GroupModelOutcome& out = summary.outcomes[gi];
        out.group_id = group_id;
        out.n_users = group_profiles.size();

        FeatureMatrix X;
        std::vector<int> y;
        assemble_group(group_profiles, labels, junk_fraction_by_user, X, y);
        std::size_t pos = 0;
        for (int label : y) pos += static_cast<std::size_t>(label);
        out.n_junk_users = pos;
        const std::size_t neg = y.size() - pos;

        if (pos == 0 || neg == 0) {
            out.skip_reason = "single_class";
            return;
        }
        if (group_profiles.size() < cfg.min_users || pos < 2 || neg < 2) {
            out.skip_reason = "too_few_users";
            return;
        }

        TrainConfig tc = cfg.train;
        tc.seed = util::splitmix64(cfg.train.seed ^ util::stable_hash64(group_id));
        const SplitIndices split = stratified_split(y, tc.split, tc.seed);
        if (split.train.size() < 20) {
            out.skip_reason = "too_few_users";
            return;
        }
        const FeatureMatrix Xtr = matrix_rows(X, split.train);
        const FeatureMatrix Xte = matrix_rows(X, split.test);
        const std::vector<int> ytr = label_rows(y, split.train);
        const std::vector<int> yte = label_rows(y, split.test);
        // Inner fit is serial: the outer loop owns the parallelism, and
        // serial/parallel outputs must stay bit-identical.
        const auto model = train(Xtr, ytr, tc, ExecMode::serial);
        out.eval = evaluate(*model, Xte, yte);
        out.trained = true;
    });

    std::vector<double> accs, f1s;
    for (const GroupModelOutcome& out : summary.outcomes) {
        if (out.trained) {
            ++summary.trained_groups;
            accs.push_back(out.eval.accuracy);
            f1s.push_back(out.eval.f1);
        } else {
            ++summary.skipped_groups;
        }
    }
    if (!summary.outcomes.empty()) {
        summary.skip_rate = static_cast<double>(summary.skipped_groups) /
                            static_cast<double>(summary.outcomes.size());
    }
    const MeanSd acc = mean_sd(accs);
    const MeanSd f1 = mean_sd(f1s);
    summary.mean_accuracy = acc.mean;
    summary.sd_accuracy = acc.sd;
    summary.mean_f1 = f1.mean;
    summary.sd_f1 = f1.sd;
    return summary;
}

ImportanceReport importance_report(const Corpus& corpus, std::span<const ContentSignal> signals,
                                   const std::vector<SenderVerdict>& verdicts,
                                   const TrainConfig& cfg, ExecMode mode) {
    ProfileOptions opts;
    opts.scope = ProfileScope::global;
    const std::vector<MetadataProfile> profiles = build_profiles(corpus, signals, opts);
    if (profiles.empty()) throw std::invalid_argument("importance_report: no profiles");

    const std::map<std::string, int> labels = verdict_labels(verdicts);
    std::vector<int> y;
    y.reserve(profiles.size());
    for (const MetadataProfile& p : profiles) {
        auto it = labels.find(p.user.key());
        y.push_back(it == labels.end() ? 0 : it->second);
    }

    ImportanceReport report;
    bool first = true;
    for (bool with_signal : {true, false}) {
        FeatureSpec spec;
        spec.with_signal = with_signal;
        const FeatureMatrix X = build_feature_matrix(profiles, spec);
        TrainConfig tc = cfg;
        tc.model = ModelKind::random_forest;
        const SplitIndices split = stratified_split(y, tc.split, tc.seed);
        const auto model =
            train(matrix_rows(X, split.train), label_rows(y, split.train), tc, mode);
        const EvalReport eval =
            evaluate(*model, matrix_rows(X, split.test), label_rows(y, split.test));
        if (first) {
            report.with_signal = feature_importance(*model);
            report.eval_with = eval;
        } else {
            report.without_signal = feature_importance(*model);
            report.eval_without = eval;
        }
        first = false;
    }
    return report;
}

} // namespace groupsift

#include "groupsift/model.hpp"

#include "groupsift/util/hash.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>

namespace groupsift {

using nlohmann::json;

std::string_view model_kind_name(ModelKind k) {
    switch (k) {
        case ModelKind::logistic_regression: return "logistic_regression";
        case ModelKind::random_forest: return "random_forest";
        case ModelKind::svm: return "svm";
    }
    return "logistic_regression";
}

EvalReport EvalReport::from_confusion(std::uint64_t tp, std::uint64_t fn, std::uint64_t fp,
                                      std::uint64_t tn) {
    EvalReport r;
    r.tp = tp;
    r.fn = fn;
    r.fp = fp;
    r.tn = tn;
    const double total = static_cast<double>(tp + fn + fp + tn);
    r.accuracy = total > 0 ? static_cast<double>(tp + tn) / total : 0.0;
    r.precision = (tp + fp) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    r.recall = (tp + fn) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    r.f1 = (r.precision + r.recall) > 0
               ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
               : 0.0;
    return r;
}

namespace {

double get_hp(const std::map<std::string, double>& hp, const std::string& key, double dflt) {
    auto it = hp.find(key);
    return it == hp.end() ? dflt : it->second;
}

// Deterministic uniform helpers: std::uniform_*_distribution is
// implementation-defined, so raw engine output is mapped by hand.
std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
    return static_cast<std::size_t>(rng() % n);
}

std::uint64_t tree_seed(std::uint64_t seed, std::size_t t) {
    return util::splitmix64(util::splitmix64(seed) ^
                            (0x9e3779b97f4a7c15ull * (static_cast<std::uint64_t>(t) + 1)));
}

double entropy(double w0, double w1) {
    const double w = w0 + w1;
    if (w <= 0.0) return 0.0;
    double h = 0.0;
    if (w0 > 0.0) {
        const double p = w0 / w;
        h -= p * std::log(p);
    }
    if (w1 > 0.0) {
        const double p = w1 / w;
        h -= p * std::log(p);
    }
    return h;
}

// ---------------------------------------------------------------------------
// Logistic regression (balanced class weights, Adam, L1 via proximal step or
// L2, sklearn-style inverse regularization strength C). Features are
// standardized internally; mean/scale persist with the model.
// ---------------------------------------------------------------------------

class LogisticRegressionModel final : public Model {
public:
    std::vector<double> weights;
    double bias = 0.0;
    std::vector<double> mean, scale;

    ModelKind kind() const override { return ModelKind::logistic_regression; }

    double predict_proba(std::span<const float> x) const override {
        if (x.size() != weights.size()) {
            throw std::invalid_argument("predict: feature width mismatch");
        }
        double z = bias;
        for (std::size_t j = 0; j < weights.size(); ++j) {
            z += weights[j] * ((static_cast<double>(x[j]) - mean[j]) / scale[j]);
        }
        return 1.0 / (1.0 + std::exp(-z));
    }

    int predict(std::span<const float> x) const override {
        return predict_proba(x) >= 0.5 ? 1 : 0;
    }

    nlohmann::json to_json() const override;

    void fit(const FeatureMatrix& X, std::span<const int> y, const TrainConfig& cfg) {
        const std::size_t n = X.rows, d = X.cols;
        const double C = get_hp(cfg.hyperparams, "C", 100.0);
        const int penalty = static_cast<int>(get_hp(cfg.hyperparams, "penalty", 1.0));
        const int max_iter = static_cast<int>(get_hp(cfg.hyperparams, "max_iter", 500.0));
        const double lr = get_hp(cfg.hyperparams, "lr", 0.1);
        if (C <= 0.0) throw std::invalid_argument("lr: C must be positive");
        if (penalty != 1 && penalty != 2) throw std::invalid_argument("lr: penalty must be 1 or 2");

        mean.assign(d, 0.0);
        scale.assign(d, 1.0);
        for (std::size_t i = 0; i < n; ++i) {
            auto row = X.row(i);
            for (std::size_t j = 0; j < d; ++j) mean[j] += row[j];
        }
        for (double& m : mean) m /= static_cast<double>(n);
        std::vector<double> var(d, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            auto row = X.row(i);
            for (std::size_t j = 0; j < d; ++j) {
                const double c = row[j] - mean[j];
                var[j] += c * c;
            }
        }
        for (std::size_t j = 0; j < d; ++j) {
            const double sd = std::sqrt(var[j] / static_cast<double>(n));
            scale[j] = sd > 1e-12 ? sd : 1.0;
        }

        std::uint64_t n1 = 0;
        for (int label : y) n1 += label;
        const std::uint64_t n0 = n - n1;
        const double w1 = static_cast<double>(n) / (2.0 * static_cast<double>(n1));
        const double w0 = static_cast<double>(n) / (2.0 * static_cast<double>(n0));

        weights.assign(d, 0.0);
        bias = 0.0;
        std::vector<double> m1(d + 1, 0.0), m2(d + 1, 0.0);
        const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
        const double lambda = 1.0 / (C * static_cast<double>(n));
        std::vector<double> grad(d + 1);

        for (int iter = 1; iter <= max_iter; ++iter) {
            std::fill(grad.begin(), grad.end(), 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                auto row = X.row(i);
                double z = bias;
                for (std::size_t j = 0; j < d; ++j) {
                    z += weights[j] * ((static_cast<double>(row[j]) - mean[j]) / scale[j]);
                }
                const double p = 1.0 / (1.0 + std::exp(-z));
                const double err = (p - y[i]) * (y[i] ? w1 : w0);
                for (std::size_t j = 0; j < d; ++j) {
                    grad[j] += err * ((static_cast<double>(row[j]) - mean[j]) / scale[j]);
                }
                grad[d] += err;
            }
            for (double& g : grad) g /= static_cast<double>(n);
            if (penalty == 2) {
                for (std::size_t j = 0; j < d; ++j) grad[j] += lambda * weights[j];
            }
            const double bc1 = 1.0 - std::pow(beta1, iter);
            const double bc2 = 1.0 - std::pow(beta2, iter);
            for (std::size_t j = 0; j <= d; ++j) {
                m1[j] = beta1 * m1[j] + (1.0 - beta1) * grad[j];
                m2[j] = beta2 * m2[j] + (1.0 - beta2) * grad[j] * grad[j];
                const double step = lr * (m1[j] / bc1) / (std::sqrt(m2[j] / bc2) + eps);
                if (j < d) {
                    weights[j] -= step;
                } else {
                    bias -= step;
                }
            }
            if (penalty == 1) {
                // Proximal soft-threshold keeps the L1 objective honest under Adam.
                const double thr = lr * lambda;
                for (std::size_t j = 0; j < d; ++j) {
                    if (weights[j] > thr) {
                        weights[j] -= thr;
                    } else if (weights[j] < -thr) {
                        weights[j] += thr;
                    } else {
                        weights[j] = 0.0;
                    }
                }
            }
        }
    }
};

// ---------------------------------------------------------------------------
// Random forest (bootstrap, entropy criterion, sqrt feature subsampling,
// balanced class weights, per-tree seeds so parallel == serial).
// ---------------------------------------------------------------------------

struct TreeNode {
    std::int32_t feature = -1;
    float threshold = 0.0f;
    std::int32_t left = -1;
    std::int32_t right = -1;
    float prob = 0.0f; // junk probability at a leaf
};

struct Tree {
    std::vector<TreeNode> nodes;
};

class RandomForestModel final : public Model {
public:
    std::vector<Tree> trees;
    std::map<std::string, double> importance; // normalized to sum 1

    ModelKind kind() const override { return ModelKind::random_forest; }

    double predict_proba(std::span<const float> x) const override {
        if (feature_names.size() != x.size()) {
            throw std::invalid_argument("predict: feature width mismatch");
        }
        double sum = 0.0;
        for (const Tree& t : trees) {
            std::int32_t node = 0;
            while (t.nodes[static_cast<std::size_t>(node)].feature >= 0) {
                const TreeNode& nd = t.nodes[static_cast<std::size_t>(node)];
                node = x[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left
                                                                               : nd.right;
            }
            sum += t.nodes[static_cast<std::size_t>(node)].prob;
        }
        return sum / static_cast<double>(trees.size());
    }

    int predict(std::span<const float> x) const override {
        return predict_proba(x) >= 0.5 ? 1 : 0;
    }

    nlohmann::json to_json() const override;
};

struct ForestParams {
    int n_estimators = 400;
    int min_samples_split = 2;
    int max_depth = 0; // 0 = unlimited
    double w0 = 1.0, w1 = 1.0;
};

class TreeBuilder {
public:
    TreeBuilder(const FeatureMatrix& X, std::span<const int> y, const ForestParams& params,
                std::uint64_t seed, std::vector<double>& importance_raw)
        : X_(X), y_(y), params_(params), rng_(seed), importance_(importance_raw) {
        k_features_ = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::sqrt(static_cast<double>(X.cols))));
        feature_order_.resize(X.cols);
        std::iota(feature_order_.begin(), feature_order_.end(), 0u);
    }

    Tree build() {
        const std::size_t n = X_.rows;
        indices_.resize(n);
        for (std::size_t i = 0; i < n; ++i) indices_[i] = uniform_index(rng_, n);
        root_weight_ = 0.0;
        for (std::size_t idx : indices_) root_weight_ += y_[idx] ? params_.w1 : params_.w0;
        tree_.nodes.clear();
        build_node(0, n, 0);
        return std::move(tree_);
    }

private:
    static constexpr std::size_t kSortCutoff = 1024;
    static constexpr std::size_t kHistBins = 256;

    std::int32_t make_leaf(double w0, double w1) {
        TreeNode leaf;
        leaf.prob = static_cast<float>(w1 / (w0 + w1));
        tree_.nodes.push_back(leaf);
        return static_cast<std::int32_t>(tree_.nodes.size() - 1);
    }

    struct Split {
        double gain = 0.0;
        std::size_t feature = 0;
        float threshold = 0.0f;
        bool valid = false;
    };

    // Exact scan over sorted values; used for small nodes.
    void best_split_sorted(std::size_t begin, std::size_t end, std::size_t f, double w0,
                           double w1, double h_parent, Split& best) {
        scratch_.clear();
        for (std::size_t i = begin; i < end; ++i) {
            const std::size_t idx = indices_[i];
            scratch_.push_back({X_.row(idx)[f], y_[idx] ? params_.w1 : 0.0,
                                y_[idx] ? 0.0 : params_.w0});
        }
        std::sort(scratch_.begin(), scratch_.end(),
                  [](const ValWeight& a, const ValWeight& b) { return a.value < b.value; });
        const double w_total = w0 + w1;
        double l0 = 0.0, l1 = 0.0;
        for (std::size_t i = 0; i + 1 < scratch_.size(); ++i) {
            l1 += scratch_[i].w_pos;
            l0 += scratch_[i].w_neg;
            if (scratch_[i + 1].value <= scratch_[i].value) continue;
            const double r0 = w0 - l0, r1 = w1 - l1;
            const double h = (l0 + l1) / w_total * entropy(l0, l1) +
                             (r0 + r1) / w_total * entropy(r0, r1);
            const double gain = h_parent - h;
            if (gain > best.gain + 1e-12) {
                best.gain = gain;
                best.feature = f;
                best.threshold =
                    scratch_[i].value + (scratch_[i + 1].value - scratch_[i].value) * 0.5f;
                best.valid = true;
            }
        }
    }

    // Histogram scan for large nodes: 256 equal-width bins bound the cost per
    // node at O(m) while keeping splits deterministic.
    void best_split_hist(std::size_t begin, std::size_t end, std::size_t f, double w0,
                         double w1, double h_parent, Split& best) {
        float lo = X_.row(indices_[begin])[f], hi = lo;
        for (std::size_t i = begin + 1; i < end; ++i) {
            const float v = X_.row(indices_[i])[f];
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (!(hi > lo)) return;
        std::array<double, kHistBins> b0{}, b1{};
        const double width = (static_cast<double>(hi) - lo) / static_cast<double>(kHistBins);
        for (std::size_t i = begin; i < end; ++i) {
            const std::size_t idx = indices_[i];
            const double v = X_.row(idx)[f];
            auto bin = static_cast<std::size_t>((v - lo) / width);
            if (bin >= kHistBins) bin = kHistBins - 1;
            (y_[idx] ? b1 : b0)[bin] += y_[idx] ? params_.w1 : params_.w0;
        }
        const double w_total = w0 + w1;
        double l0 = 0.0, l1 = 0.0;
        for (std::size_t b = 0; b + 1 < kHistBins; ++b) {
            l0 += b0[b];
            l1 += b1[b];
            if (l0 + l1 <= 0.0 || l0 + l1 >= w_total) continue;
            const double r0 = w0 - l0, r1 = w1 - l1;
            const double h = (l0 + l1) / w_total * entropy(l0, l1) +
                             (r0 + r1) / w_total * entropy(r0, r1);
            const double gain = h_parent - h;
            if (gain > best.gain + 1e-12) {
                best.gain = gain;
                best.feature = f;
                best.threshold = static_cast<float>(lo + width * static_cast<double>(b + 1));
                best.valid = true;
            }
        }
    }

    std::int32_t build_node(std::size_t begin, std::size_t end, int depth) {
        double w0 = 0.0, w1 = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            (y_[indices_[i]] ? w1 : w0) += y_[indices_[i]] ? params_.w1 : params_.w0;
        }
        const std::size_t m = end - begin;
        if (w0 == 0.0 || w1 == 0.0 || m < static_cast<std::size_t>(params_.min_samples_split) ||
            (params_.max_depth > 0 && depth >= params_.max_depth)) {
            return make_leaf(w0, w1);
        }

        // Partial Fisher-Yates draw of k features without replacement.
        for (std::size_t i = 0; i < k_features_; ++i) {
            const std::size_t j = i + uniform_index(rng_, feature_order_.size() - i);
            std::swap(feature_order_[i], feature_order_[j]);
        }
        const double h_parent = entropy(w0, w1);
        Split best;
        for (std::size_t i = 0; i < k_features_; ++i) {
            const std::size_t f = feature_order_[i];
            if (m <= kSortCutoff) {
                best_split_sorted(begin, end, f, w0, w1, h_parent, best);
            } else {
                best_split_hist(begin, end, f, w0, w1, h_parent, best);
            }
        }
        if (!best.valid) return make_leaf(w0, w1);

        const auto mid = std::stable_partition(
            indices_.begin() + static_cast<std::ptrdiff_t>(begin),
            indices_.begin() + static_cast<std::ptrdiff_t>(end), [&](std::size_t idx) {
                return X_.row(idx)[best.feature] <= best.threshold;
            });
        const auto mid_pos = static_cast<std::size_t>(mid - indices_.begin());
        if (mid_pos == begin || mid_pos == end) return make_leaf(w0, w1);

        importance_[best.feature] += (w0 + w1) / root_weight_ * best.gain;

        TreeNode node;
        node.feature = static_cast<std::int32_t>(best.feature);
        node.threshold = best.threshold;
        tree_.nodes.push_back(node);
        const auto self = static_cast<std::int32_t>(tree_.nodes.size() - 1);
        const std::int32_t left = build_node(begin, mid_pos, depth + 1);
        const std::int32_t right = build_node(mid_pos, end, depth + 1);
        tree_.nodes[static_cast<std::size_t>(self)].left = left;
        tree_.nodes[static_cast<std::size_t>(self)].right = right;
        return self;
    }

    struct ValWeight {
        float value;
        double w_pos;
        double w_neg;
    };

    const FeatureMatrix& X_;
    std::span<const int> y_;
    ForestParams params_;
    std::mt19937_64 rng_;
    std::vector<double>& importance_;
    std::vector<std::size_t> indices_;
    std::vector<std::size_t> feature_order_;
    std::vector<ValWeight> scratch_;
    std::size_t k_features_ = 1;
    double root_weight_ = 1.0;
    Tree tree_;
};

std::unique_ptr<RandomForestModel> fit_forest(const FeatureMatrix& X, std::span<const int> y,
                                              const TrainConfig& cfg, ExecMode mode) {
    auto model = std::make_unique<RandomForestModel>();
    ForestParams params;
    params.n_estimators = static_cast<int>(get_hp(cfg.hyperparams, "n_estimators", 400.0));
    params.min_samples_split =
        static_cast<int>(get_hp(cfg.hyperparams, "min_samples_split", 2.0));
    params.max_depth = static_cast<int>(get_hp(cfg.hyperparams, "max_depth", 0.0));
    if (params.n_estimators <= 0) throw std::invalid_argument("forest: n_estimators must be > 0");
    if (params.min_samples_split < 2) {
        throw std::invalid_argument("forest: min_samples_split must be >= 2");
    }

    std::uint64_t n1 = 0;
    for (int label : y) n1 += label;
    params.w1 = static_cast<double>(y.size()) / (2.0 * static_cast<double>(n1));
    params.w0 =
        static_cast<double>(y.size()) / (2.0 * static_cast<double>(y.size() - n1));

    const auto n_trees = static_cast<std::size_t>(params.n_estimators);
    model->trees.resize(n_trees);
    std::vector<std::vector<double>> per_tree_importance(n_trees,
                                                         std::vector<double>(X.cols, 0.0));
    util::parallel_for(n_trees, mode, [&](std::size_t t) {
        TreeBuilder builder(X, y, params, tree_seed(cfg.seed, t), per_tree_importance[t]);
        model->trees[t] = builder.build();
    });

    std::vector<double> raw(X.cols, 0.0);
    for (const auto& imp : per_tree_importance) {
        for (std::size_t j = 0; j < X.cols; ++j) raw[j] += imp[j];
    }
    const double total = std::accumulate(raw.begin(), raw.end(), 0.0);
    for (std::size_t j = 0; j < X.cols; ++j) {
        model->importance[X.feature_names[j]] = total > 0.0 ? raw[j] / total : 0.0;
    }
    return model;
}

void validate_training_input(const FeatureMatrix& X, std::span<const int> y) {
    if (X.rows != y.size()) throw std::invalid_argument("train: X rows must match y size");
    if (X.cols == 0) throw std::invalid_argument("train: no feature columns");
    if (X.rows < 20) throw std::invalid_argument("train: need at least 20 samples");
    std::uint64_t n1 = 0;
    for (int label : y) {
        if (label != 0 && label != 1) throw std::invalid_argument("train: labels must be 0/1");
        n1 += label;
    }
    if (n1 == 0 || n1 == y.size()) {
        throw std::invalid_argument("train: both classes must be present");
    }
}

std::unique_ptr<Model> fit_once(const FeatureMatrix& X, std::span<const int> y,
                                const TrainConfig& cfg, ExecMode mode) {
    std::unique_ptr<Model> model;
    switch (cfg.model) {
        case ModelKind::logistic_regression: {
            auto m = std::make_unique<LogisticRegressionModel>();
            m->fit(X, y, cfg);
            model = std::move(m);
            break;
        }
        case ModelKind::random_forest:
            model = fit_forest(X, y, cfg, mode);
            break;
        case ModelKind::svm:
            throw std::invalid_argument(
                "train: svm is declared for interface compatibility but not shipped; "
                "use logistic_regression or random_forest");
    }
    if (!model) throw std::invalid_argument("train: unknown model kind");
    model->feature_names = X.feature_names; // predict validates width against these
    return model;
}

} // namespace

SplitIndices stratified_split(std::span<const int> y, double split, std::uint64_t seed) {
    if (!(split > 0.0 && split < 1.0)) {
        throw std::invalid_argument("split fraction must be in (0, 1)");
    }
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < y.size(); ++i) (y[i] ? pos : neg).push_back(i);

    SplitIndices out;
    std::mt19937_64 rng(util::splitmix64(seed ^ 0x5e7ec7a0b6d9f31bull));
    for (auto* cls : {&neg, &pos}) {
        for (std::size_t i = cls->size(); i > 1; --i) {
            std::swap((*cls)[i - 1], (*cls)[uniform_index(rng, i)]);
        }
        auto n_train = static_cast<std::size_t>(
            std::llround(split * static_cast<double>(cls->size())));
        if (n_train == cls->size() && n_train > 0) --n_train; // keep a test sample
        if (n_train == 0 && cls->size() > 1) n_train = 1;     // and a train sample
        for (std::size_t i = 0; i < cls->size(); ++i) {
            (i < n_train ? out.train : out.test).push_back((*cls)[i]);
        }
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

FeatureMatrix matrix_rows(const FeatureMatrix& X, std::span<const std::size_t> rows) {
    FeatureMatrix out;
    out.cols = X.cols;
    out.feature_names = X.feature_names;
    out.data.reserve(rows.size() * X.cols);
    for (std::size_t r : rows) {
        auto row = X.row(r);
        out.data.insert(out.data.end(), row.begin(), row.end());
    }
    out.rows = rows.size();
    return out;
}

std::vector<int> label_rows(std::span<const int> y, std::span<const std::size_t> rows) {
    std::vector<int> out;
    out.reserve(rows.size());
    for (std::size_t r : rows) out.push_back(y[r]);
    return out;
}

std::unique_ptr<Model> train(const FeatureMatrix& X, std::span<const int> y,
                             const TrainConfig& cfg, ExecMode mode) {
    validate_training_input(X, y);

    std::vector<double> cv_scores;
    if (cfg.folds >= 2) {
        // Shuffled k-fold over the full data, each fold scored by accuracy.
        std::vector<std::size_t> order(X.rows);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::mt19937_64 rng(util::splitmix64(cfg.seed ^ 0xc3a5c85c97cb3127ull));
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[uniform_index(rng, i)]);
        }
        const auto folds = static_cast<std::size_t>(cfg.folds);
        for (std::size_t f = 0; f < folds; ++f) {
            std::vector<std::size_t> train_rows, test_rows;
            for (std::size_t i = 0; i < order.size(); ++i) {
                (i % folds == f ? test_rows : train_rows).push_back(order[i]);
            }
            FeatureMatrix Xtr = matrix_rows(X, train_rows);
            FeatureMatrix Xte = matrix_rows(X, test_rows);
            std::vector<int> ytr = label_rows(y, train_rows);
            std::vector<int> yte = label_rows(y, test_rows);
            std::uint64_t pos = 0;
            for (int label : ytr) pos += label;
            if (pos == 0 || pos == ytr.size() || ytr.size() < 20) {
                cv_scores.push_back(0.0); // degenerate fold; recorded, not hidden
                continue;
            }
            auto fold_model = fit_once(Xtr, ytr, cfg, mode);
            cv_scores.push_back(evaluate(*fold_model, Xte, yte).accuracy);
        }
    }

    auto model = fit_once(X, y, cfg, mode);
    model->feature_names = X.feature_names;
    model->hyperparams = cfg.hyperparams;
    model->seed = cfg.seed;
    model->cv_scores = std::move(cv_scores);
    return model;
}

EvalReport evaluate(const Model& model, const FeatureMatrix& X, std::span<const int> y) {
    if (X.rows != y.size()) throw std::invalid_argument("evaluate: X rows must match y size");
    if (X.rows == 0) throw std::invalid_argument("evaluate: empty test set");
    std::uint64_t tp = 0, fn = 0, fp = 0, tn = 0;
    for (std::size_t i = 0; i < X.rows; ++i) {
        const int pred = model.predict(X.row(i));
        if (y[i] == 1) {
            (pred == 1 ? tp : fn)++;
        } else {
            (pred == 1 ? fp : tn)++;
        }
    }
    return EvalReport::from_confusion(tp, fn, fp, tn);
}

std::map<std::string, double> feature_importance(const Model& model) {
    const auto* forest = dynamic_cast<const RandomForestModel*>(&model);
    if (!forest) {
        throw std::invalid_argument("feature_importance: only defined for random forests");
    }
    return forest->importance;
}

// ---------------------------------------------------------------------------
// Persistence (versioned JSON).
// ---------------------------------------------------------------------------

namespace {

constexpr int kModelFormatVersion = 1;

json model_header(const Model& m) {
    return json{{"format", "groupsift-model"},
                {"version", kModelFormatVersion},
                {"kind", std::string(model_kind_name(m.kind()))},
                {"seed", m.seed},
                {"hyperparams", m.hyperparams},
                {"feature_names", m.feature_names},
                {"cv_scores", m.cv_scores}};
}

} // namespace

json LogisticRegressionModel::to_json() const {
    json j = model_header(*this);
    j["lr"] = json{{"weights", weights}, {"bias", bias}, {"mean", mean}, {"scale", scale}};
    return j;
}

json RandomForestModel::to_json() const {
    json j = model_header(*this);
    json jtrees = json::array();
    for (const Tree& t : trees) {
        json jt = json::array();
        for (const TreeNode& n : t.nodes) {
            jt.push_back(json::array({n.feature, n.threshold, n.left, n.right, n.prob}));
        }
        jtrees.push_back(std::move(jt));
    }
    j["forest"] = json{{"trees", std::move(jtrees)}, {"importance", importance}};
    return j;
}

std::unique_ptr<Model> Model::from_json(const json& j) {
    if (!j.is_object() || j.value("format", "") != "groupsift-model") {
        throw std::runtime_error("model file: not a groupsift model");
    }
    if (j.value("version", -1) != kModelFormatVersion) {
        throw std::runtime_error("model file: unsupported format version");
    }
    const std::string kind = j.at("kind").get<std::string>();
    std::unique_ptr<Model> model;
    if (kind == "logistic_regression") {
        auto m = std::make_unique<LogisticRegressionModel>();
        const json& lr = j.at("lr");
        m->weights = lr.at("weights").get<std::vector<double>>();
        m->bias = lr.at("bias").get<double>();
        m->mean = lr.at("mean").get<std::vector<double>>();
        m->scale = lr.at("scale").get<std::vector<double>>();
        model = std::move(m);
    } else if (kind == "random_forest") {
        auto m = std::make_unique<RandomForestModel>();
        for (const json& jt : j.at("forest").at("trees")) {
            Tree t;
            for (const json& jn : jt) {
                TreeNode n;
                n.feature = jn.at(0).get<std::int32_t>();
                n.threshold = jn.at(1).get<float>();
                n.left = jn.at(2).get<std::int32_t>();
                n.right = jn.at(3).get<std::int32_t>();
                n.prob = jn.at(4).get<float>();
                t.nodes.push_back(n);
            }
            m->trees.push_back(std::move(t));
        }
        for (const auto& [name, value] : j.at("forest").at("importance").items()) {
            m->importance[name] = value.get<double>();
        }
        model = std::move(m);
    } else {
        throw std::runtime_error("model file: unknown kind '" + kind + "'");
    }
    model->feature_names = j.at("feature_names").get<std::vector<std::string>>();
    model->hyperparams = j.at("hyperparams").get<std::map<std::string, double>>();
    model->seed = j.at("seed").get<std::uint64_t>();
    model->cv_scores = j.at("cv_scores").get<std::vector<double>>();
    return model;
}

void save_model(const Model& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << model.to_json().dump(2) << '\n';
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::unique_ptr<Model> load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw std::runtime_error("model file is not valid JSON: " + path);
    return Model::from_json(j);
}

} // namespace groupsift

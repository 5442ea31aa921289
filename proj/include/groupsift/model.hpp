#pragma once

#include "groupsift/detect.hpp"

#include <json_fwd.hpp>

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace groupsift {

enum class ModelKind { logistic_regression, random_forest, svm };

std::string_view model_kind_name(ModelKind k);

/// Training configuration. `hyperparams` mirrors the classifier defaults the
/// deployments use: LR takes "C" (default 100), "penalty" (1=L1, 2=L2,
/// default 1), "max_iter" (500); the forest takes "n_estimators" (400),
/// "min_samples_split" (2), "max_depth" (0 = unlimited). folds <= 1 disables
/// cross-validation; folds >= 2 records k-fold accuracy in cv_scores.
struct TrainConfig {
    double split = 0.8;
    int folds = 5;
    ModelKind model = ModelKind::random_forest;
    std::map<std::string, double> hyperparams;
    std::uint64_t seed = 0;
};

/// Binary-classification quality report. All four metrics are derived from
/// the 2x2 confusion matrix and nothing else.
struct EvalReport {
    std::uint64_t tp = 0, fn = 0, fp = 0, tn = 0;
    double accuracy = 0.0, precision = 0.0, recall = 0.0, f1 = 0.0;

    static EvalReport from_confusion(std::uint64_t tp, std::uint64_t fn, std::uint64_t fp,
                                     std::uint64_t tn);
};

class Model {
public:
    virtual ~Model() = default;
    virtual ModelKind kind() const = 0;
    virtual int predict(std::span<const float> x) const = 0;
    virtual double predict_proba(std::span<const float> x) const = 0;
    virtual nlohmann::json to_json() const = 0;

    /// Versioned round-trip of to_json().
    static std::unique_ptr<Model> from_json(const nlohmann::json& j);

    std::vector<std::string> feature_names;
    std::map<std::string, double> hyperparams;
    std::uint64_t seed = 0;
    std::vector<double> cv_scores;
};

void save_model(const Model& model, const std::string& path);
std::unique_ptr<Model> load_model(const std::string& path);

/// Fit a classifier with balanced class weights. Requires >= 20 samples and
/// both classes present (std::invalid_argument otherwise); ModelKind::svm is
/// declared but not shipped and is rejected with a clear error. Forest trees
/// are independent (seeded per tree), so serial and parallel training produce
/// identical models.
std::unique_ptr<Model> train(const FeatureMatrix& X, std::span<const int> y,
                             const TrainConfig& cfg, ExecMode mode = ExecMode::parallel);

EvalReport evaluate(const Model& model, const FeatureMatrix& X, std::span<const int> y);

/// Mean impurity-decrease importance, normalized to sum to 1.
/// Throws std::invalid_argument for models without one (LR).
std::map<std::string, double> feature_importance(const Model& model);

/// Deterministic stratified split: shuffles each class with `seed` and sends
/// the first `split` fraction to train. Returns row indices.
struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};
SplitIndices stratified_split(std::span<const int> y, double split, std::uint64_t seed);

FeatureMatrix matrix_rows(const FeatureMatrix& X, std::span<const std::size_t> rows);
std::vector<int> label_rows(std::span<const int> y, std::span<const std::size_t> rows);

} // namespace groupsift

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mindpres/corpus.hpp"
#include "mindpres/features.hpp"

namespace mindpres::ml {

enum class ModelKind { naive_bayes, svm_sdca, kmeans, boosted_stumps };

inline constexpr std::array<ModelKind, 4> kAllKinds = {
    ModelKind::naive_bayes, ModelKind::svm_sdca, ModelKind::kmeans, ModelKind::boosted_stumps};

std::string_view to_string(ModelKind kind);
/// Throws ConfigError for an unknown name.
ModelKind kind_from_string(std::string_view name);

struct Dataset {
    std::vector<FeatureVector> vectors;
    std::vector<Label> labels;

    std::size_t size() const { return vectors.size(); }
    bool empty() const { return vectors.empty(); }
};

/// Encodes corpus entries against `vocab`.
Dataset make_dataset(const std::vector<CorpusEntry>& entries, const Vocabulary& vocab);

struct Hyperparams {
    double svm_lambda = 0.01;
    int svm_epochs = 20;
    std::size_t kmeans_k = 2;
    int kmeans_max_iterations = 100;
    /// Independent k-means++ initialisations; the lowest-SSE run is kept.
    int kmeans_restarts = 10;
    int boost_rounds = 50;
};

/// Bernoulli naive Bayes with Laplace (alpha = 1) smoothing. Index 0 is benign,
/// 1 is malicious.
struct NaiveBayesParams {
    std::array<double, 2> log_prior{};
    std::array<std::vector<double>, 2> log_present;
    std::array<std::vector<double>, 2> log_absent;
};

struct LinearSvmParams {
    std::vector<double> weights;
    double bias = 0.0;
};

struct KMeansParams {
    std::vector<std::vector<double>> centroids;
    /// Fraction of malicious training points per cluster.
    std::vector<double> malicious_fraction;
};

/// Votes malicious when the feature bit equals `polarity > 0 ? 1 : 0`.
struct Stump {
    std::size_t feature = 0;
    int polarity = 1;
    double vote = 0.0;
};

struct StumpEnsembleParams {
    std::vector<Stump> stumps;
};

using ModelParams = std::variant<NaiveBayesParams, LinearSvmParams, KMeansParams, StumpEnsembleParams>;

/// Immutable once built; safe to share across threads for scoring.
struct TrainedModel {
    std::string model_id;
    ModelKind kind = ModelKind::naive_bayes;
    ModelParams params;
    Vocabulary vocab;

    /// Malicious score in [0,1]. Throws VocabMismatch if `x` was encoded with
    /// another vocabulary.
    double predict_score(const FeatureVector& x) const;

    /// Throws ModelError when the parameters disagree with `kind` or with the
    /// vocabulary dimension.
    void validate() const;
};

TrainedModel train(const Dataset& data, const Vocabulary& vocab, ModelKind kind,
                   const Hyperparams& hp, std::uint64_t seed);

NaiveBayesParams train_naive_bayes(const Dataset& data, std::size_t dim);

struct SdcaResult {
    LinearSvmParams params;
    /// Dual objective before the first epoch and after each epoch.
    std::vector<double> dual_objective;
};

/// Hinge-loss linear SVM by stochastic dual coordinate ascent. The bias is an
/// extra, regularised, constant-one feature.
SdcaResult train_sdca(const Dataset& data, std::size_t dim, double lambda, int epochs, std::uint64_t seed);

struct KMeansResult {
    std::vector<std::vector<double>> centroids;
    std::vector<std::size_t> assignment;
    /// Within-cluster SSE after each centroid update of the kept run.
    std::vector<double> sse_trace;
    double sse = 0.0;
};

/// k-means++ seeding followed by Lloyd iterations until the assignment is a
/// fixpoint or `max_iterations` is reached.
KMeansResult lloyd(const std::vector<std::vector<double>>& points, std::size_t k, std::uint64_t seed,
                   int max_iterations, int restarts);

StumpEnsembleParams train_boosted_stumps(const Dataset& data, std::size_t dim, int rounds);

struct Confusion {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;
    std::size_t fn = 0;

    std::size_t total() const { return tp + fp + tn + fn; }
    bool operator==(const Confusion&) const = default;
};

struct EvalReport {
    std::string model_id;
    Confusion confusion;
    double accuracy = 0.0;
    /// fp / (fp + tn), 0 when there are no benign samples.
    double false_alarm_rate = 0.0;
};

Confusion tally(const std::vector<bool>& predicted_malicious, const std::vector<Label>& truth);
EvalReport make_report(std::string model_id, const Confusion& confusion);

/// Predicts malicious iff score >= threshold. Throws EmptyDataset.
EvalReport evaluate(const TrainedModel& model, const Dataset& test, double threshold = 0.5);

/// Highest accuracy, then lowest false-alarm rate, then smallest model_id.
/// Throws EmptyInput.
std::string select_best(const std::vector<EvalReport>& reports);

}  // namespace mindpres::ml

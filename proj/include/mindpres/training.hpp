#pragma once

#include <cstdint>
#include <vector>

#include "mindpres/classifiers.hpp"
#include "mindpres/corpus.hpp"
#include "mindpres/evaluator.hpp"

namespace mindpres::evaluator {

struct TrainingOptions {
    double train_fraction = 0.8;
    std::uint64_t seed = 0;
    std::size_t top_k = 64;
    double threshold = 0.5;
    std::vector<ml::ModelKind> kinds{ml::kAllKinds.begin(), ml::kAllKinds.end()};
    ml::Hyperparams hyperparams;
};

struct TrainingOutcome {
    DataSplit split;
    Vocabulary full_vocabulary;
    Vocabulary selected_vocabulary;
    std::vector<ml::TrainedModel> models;
    std::vector<ml::EvalReport> reports;
    std::string selected_id;
    /// Bundle for the selected model.
    ModelBundle bundle;
};

/// Split, build the vocabulary from the training part, keep the top-k
/// features, train every requested kind, evaluate on the held-out part and
/// bundle the best model.
TrainingOutcome train_and_select(const Corpus& corpus, const TrainingOptions& options);

Json training_report_json(const TrainingOutcome& outcome);

}  // namespace mindpres::evaluator

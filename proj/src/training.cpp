#include "mindpres/training.hpp"

#include "mindpres/error.hpp"

namespace mindpres::evaluator {

TrainingOutcome train_and_select(const Corpus& corpus, const TrainingOptions& options)
{
    if (options.kinds.empty()) throw ConfigError("no classifier kinds requested");
    TrainingOutcome out;
    out.split = corpus::split(corpus, options.train_fraction, options.seed);
    const auto train_entries = corpus::select(corpus, out.split.train_ids);
    const auto test_entries = corpus::select(corpus, out.split.test_ids);

    std::vector<AppManifest> train_manifests;
    for (const auto& e : train_entries) train_manifests.push_back(e.manifest);
    out.full_vocabulary = features::build_vocabulary(train_manifests);
    const auto full = ml::make_dataset(train_entries, out.full_vocabulary);
    out.selected_vocabulary = features::select(full.vectors, full.labels, out.full_vocabulary, options.top_k);

    const auto train = ml::make_dataset(train_entries, out.selected_vocabulary);
    const auto test = ml::make_dataset(test_entries, out.selected_vocabulary);
    for (auto kind : options.kinds) {
        out.models.push_back(ml::train(train, out.selected_vocabulary, kind, options.hyperparams, options.seed));
        out.reports.push_back(ml::evaluate(out.models.back(), test, options.threshold));
    }
    out.selected_id = ml::select_best(out.reports);

    for (std::size_t i = 0; i < out.models.size(); ++i) {
        if (out.models[i].model_id != out.selected_id) continue;
        out.bundle.model = out.models[i];
        out.bundle.metadata.seed = options.seed;
        out.bundle.metadata.corpus_hash = corpus::content_hash(corpus);
        out.bundle.metadata.report = out.reports[i];
        break;
    }
    return out;
}

Json training_report_json(const TrainingOutcome& o)
{
    Json j;
    j["split"] = {{"train", o.split.train_ids.size()}, {"test", o.split.test_ids.size()}};
    j["vocabulary"] = {{"full", o.full_vocabulary.size()}, {"selected", o.selected_vocabulary.size()}};
    Json reports = Json::array();
    for (std::size_t i = 0; i < o.reports.size(); ++i) {
        Json r = report_to_json(o.reports[i]);
        r["kind"] = ml::to_string(o.models[i].kind);
        reports.push_back(std::move(r));
    }
    j["reports"] = std::move(reports);
    j["selected"] = o.selected_id;
    return j;
}

}  // namespace mindpres::evaluator

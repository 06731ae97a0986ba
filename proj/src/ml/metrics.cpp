#include <algorithm>

#include "mindpres/classifiers.hpp"
#include "mindpres/error.hpp"

namespace mindpres::ml {

Confusion tally(const std::vector<bool>& predicted_malicious, const std::vector<Label>& truth)
{
    if (predicted_malicious.size() != truth.size()) throw ConfigError("predictions and labels differ in length");
    Confusion c;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const bool actual = truth[i] == Label::malicious;
        if (predicted_malicious[i])
            ++(actual ? c.tp : c.fp);
        else
            ++(actual ? c.fn : c.tn);
    }
    return c;
}

EvalReport make_report(std::string model_id, const Confusion& c)
{
    EvalReport r;
    r.model_id = std::move(model_id);
    r.confusion = c;
    const auto total = c.total();
    r.accuracy = total ? static_cast<double>(c.tp + c.tn) / static_cast<double>(total) : 0.0;
    const auto benign = c.fp + c.tn;
    r.false_alarm_rate = benign ? static_cast<double>(c.fp) / static_cast<double>(benign) : 0.0;
    return r;
}

EvalReport evaluate(const TrainedModel& model, const Dataset& test, double threshold)
{
    if (test.empty()) throw EmptyDataset("evaluation needs a non-empty test set");
    std::vector<bool> predicted;
    predicted.reserve(test.size());
    for (const auto& v : test.vectors) predicted.push_back(model.predict_score(v) >= threshold);
    return make_report(model.model_id, tally(predicted, test.labels));
}

std::string select_best(const std::vector<EvalReport>& reports)
{
    if (reports.empty()) throw EmptyInput("no evaluation reports to choose from");
    const auto best = std::min_element(reports.begin(), reports.end(), [](const EvalReport& a, const EvalReport& b) {
        if (a.accuracy != b.accuracy) return a.accuracy > b.accuracy;
        if (a.false_alarm_rate != b.false_alarm_rate) return a.false_alarm_rate < b.false_alarm_rate;
        return a.model_id < b.model_id;
    });
    return best->model_id;
}

}  // namespace mindpres::ml

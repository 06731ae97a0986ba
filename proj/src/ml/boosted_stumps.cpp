#include <cmath>

#include "mindpres/classifiers.hpp"
#include "mindpres/error.hpp"

namespace mindpres::ml {

namespace {

constexpr double kMaxVote = 10.0;

}  // namespace

StumpEnsembleParams train_boosted_stumps(const Dataset& data, std::size_t dim, int rounds)
{
    if (rounds < 0) throw ConfigError("boosting rounds must be non-negative");
    const std::size_t n = data.size();
    bool has[2] = {false, false};
    for (auto l : data.labels) has[static_cast<int>(l)] = true;
    if (!has[0] || !has[1]) throw InsufficientClasses("boosted stumps need both classes");

    std::vector<double> weight(n, 1.0 / static_cast<double>(n));
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = data.labels[i] == Label::malicious ? 1 : -1;

    StumpEnsembleParams out;
    for (int round = 0; round < rounds && dim > 0; ++round) {
        Stump best;
        double best_err = std::numeric_limits<double>::infinity();
        for (std::size_t f = 0; f < dim; ++f) {
            for (int polarity : {1, -1}) {
                double err = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const int bit = data.vectors[i].bits[f];
                    const int h = (bit == (polarity > 0 ? 1 : 0)) ? 1 : -1;
                    if (h != y[i]) err += weight[i];
                }
                if (err < best_err) {
                    best_err = err;
                    best = {f, polarity, 0.0};
                }
            }
        }
        if (best_err >= 0.5) break;

        if (best_err <= 0.0) {
            best.vote = kMaxVote;
            out.stumps.push_back(best);
            break;
        }
        best.vote = std::min(kMaxVote, 0.5 * std::log((1.0 - best_err) / best_err));
        out.stumps.push_back(best);

        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const int bit = data.vectors[i].bits[best.feature];
            const int h = (bit == (best.polarity > 0 ? 1 : 0)) ? 1 : -1;
            weight[i] *= std::exp(-best.vote * y[i] * h);
            total += weight[i];
        }
        for (auto& w : weight) w /= total;
    }
    return out;
}

}  // namespace mindpres::ml

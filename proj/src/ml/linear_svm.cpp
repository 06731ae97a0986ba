#include <numeric>

#include "mindpres/classifiers.hpp"
#include "mindpres/error.hpp"
#include "mindpres/rng.hpp"

namespace mindpres::ml {

namespace {

double dot_augmented(const LinearSvmParams& w, const std::vector<std::uint8_t>& x)
{
    double s = w.bias;
    for (std::size_t f = 0; f < x.size(); ++f)
        if (x[f]) s += w.weights[f];
    return s;
}

double norm_sq(const LinearSvmParams& w)
{
    double s = w.bias * w.bias;
    for (double v : w.weights) s += v * v;
    return s;
}

}  // namespace

SdcaResult train_sdca(const Dataset& data, std::size_t dim, double lambda, int epochs, std::uint64_t seed)
{
    if (!(lambda > 0.0)) throw ConfigError("svm lambda must be positive");
    if (epochs < 0) throw ConfigError("svm epochs must be non-negative");
    const std::size_t n = data.size();
    bool has[2] = {false, false};
    for (auto l : data.labels) has[static_cast<int>(l)] = true;
    if (!has[0] || !has[1]) throw InsufficientClasses("svm needs both classes");

    const double scale = 1.0 / (lambda * static_cast<double>(n));
    std::vector<double> beta(n, 0.0);
    std::vector<double> sq_norm(n);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = data.labels[i] == Label::malicious ? 1.0 : -1.0;
        const auto& bits = data.vectors[i].bits;
        sq_norm[i] = 1.0 + static_cast<double>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
    }

    SdcaResult result;
    result.params.weights.assign(dim, 0.0);
    auto& w = result.params;
    auto dual = [&] {
        const double sum_beta = std::accumulate(beta.begin(), beta.end(), 0.0);
        return sum_beta / static_cast<double>(n) - 0.5 * lambda * norm_sq(w);
    };
    result.dual_objective.push_back(dual());

    Rng rng(seed);
    std::vector<std::size_t> order(n);
    for (int epoch = 0; epoch < epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        rng.shuffle(order);
        for (std::size_t i : order) {
            const auto& bits = data.vectors[i].bits;
            const double margin = y[i] * dot_augmented(w, bits);
            const double q = sq_norm[i] * scale;
            const double updated = std::clamp(beta[i] + (1.0 - margin) / q, 0.0, 1.0);
            const double delta = updated - beta[i];
            if (delta == 0.0) continue;
            beta[i] = updated;
            const double step = delta * y[i] * scale;
            w.bias += step;
            for (std::size_t f = 0; f < dim; ++f)
                if (bits[f]) w.weights[f] += step;
        }
        result.dual_objective.push_back(dual());
    }
    return result;
}

}  // namespace mindpres::ml

#include <cmath>

#include "mindpres/classifiers.hpp"
#include "mindpres/error.hpp"

namespace mindpres::ml {

NaiveBayesParams train_naive_bayes(const Dataset& data, std::size_t dim)
{
    std::array<double, 2> class_count{0.0, 0.0};
    std::array<std::vector<double>, 2> present{std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0)};
    for (std::size_t s = 0; s < data.size(); ++s) {
        const int c = static_cast<int>(data.labels[s]);
        class_count[c] += 1.0;
        const auto& bits = data.vectors[s].bits;
        for (std::size_t f = 0; f < dim; ++f)
            if (bits[f]) present[c][f] += 1.0;
    }
    if (class_count[0] == 0.0 || class_count[1] == 0.0)
        throw InsufficientClasses("naive Bayes needs both classes");

    NaiveBayesParams p;
    const double n = class_count[0] + class_count[1];
    for (int c = 0; c < 2; ++c) {
        p.log_prior[c] = std::log(class_count[c] / n);
        p.log_present[c].resize(dim);
        p.log_absent[c].resize(dim);
        for (std::size_t f = 0; f < dim; ++f) {
            const double denom = class_count[c] + 2.0;
            p.log_present[c][f] = std::log((present[c][f] + 1.0) / denom);
            p.log_absent[c][f] = std::log((class_count[c] - present[c][f] + 1.0) / denom);
        }
    }
    return p;
}

}  // namespace mindpres::ml

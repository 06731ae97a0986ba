#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace mindpres {

/// Exponentially weighted mean and variance of one per-window metric.
struct MetricBaseline {
    double mean = 0.0;
    double var = 0.0;
    std::uint64_t sample_count = 0;

    /// The first observation initialises the baseline to the window's own
    /// statistics; later ones apply the EWMA update with smoothing `alpha`.
    void observe(double value, double window_variance, double alpha)
    {
        if (sample_count == 0) {
            mean = value;
            var = std::max(0.0, window_variance);
        } else {
            const double diff = value - mean;
            mean += alpha * diff;
            var = (1.0 - alpha) * (var + alpha * diff * diff);
        }
        ++sample_count;
    }

    double z_score(double value, double sigma_min) const
    {
        return (value - mean) / std::max(std::sqrt(var), sigma_min);
    }

    bool operator==(const MetricBaseline&) const = default;
};

}  // namespace mindpres

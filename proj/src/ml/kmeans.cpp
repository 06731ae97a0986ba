#include <limits>

#include "mindpres/classifiers.hpp"
#include "mindpres/error.hpp"
#include "mindpres/rng.hpp"

namespace mindpres::ml {

namespace {

using Point = std::vector<double>;

double dist_sq(const Point& a, const Point& b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

std::size_t nearest(const std::vector<Point>& centroids, const Point& p)
{
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.size(); ++c) {
        const double d = dist_sq(centroids[c], p);
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return best;
}

std::vector<Point> plus_plus_seeding(const std::vector<Point>& points, std::size_t k, Rng& rng)
{
    std::vector<Point> centroids;
    centroids.push_back(points[rng.below(points.size())]);
    std::vector<double> d2(points.size());
    while (centroids.size() < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < points.size(); ++i) {
            d2[i] = dist_sq(points[i], centroids[nearest(centroids, points[i])]);
            total += d2[i];
        }
        if (total <= 0.0) {
            centroids.push_back(points[rng.below(points.size())]);
            continue;
        }
        const double target = rng.uniform() * total;
        double acc = 0.0;
        std::size_t pick = points.size() - 1;
        for (std::size_t i = 0; i < points.size(); ++i) {
            acc += d2[i];
            if (d2[i] > 0.0 && acc > target) {
                pick = i;
                break;
            }
        }
        centroids.push_back(points[pick]);
    }
    return centroids;
}

KMeansResult single_run(const std::vector<Point>& points, std::size_t k, Rng& rng, int max_iterations)
{
    const std::size_t dim = points.front().size();
    KMeansResult r;
    r.centroids = plus_plus_seeding(points, k, rng);
    r.assignment.assign(points.size(), k);

    for (int iter = 0; iter < max_iterations; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < points.size(); ++i) {
            const std::size_t c = nearest(r.centroids, points[i]);
            if (c != r.assignment[i]) {
                r.assignment[i] = c;
                changed = true;
            }
        }
        if (!changed) break;

        std::vector<Point> sums(k, Point(dim, 0.0));
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < points.size(); ++i) {
            ++counts[r.assignment[i]];
            for (std::size_t d = 0; d < dim; ++d) sums[r.assignment[i]][d] += points[i][d];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) continue;  // empty cluster keeps its centroid
            for (std::size_t d = 0; d < dim; ++d) r.centroids[c][d] = sums[c][d] / static_cast<double>(counts[c]);
        }

        double sse = 0.0;
        for (std::size_t i = 0; i < points.size(); ++i) sse += dist_sq(points[i], r.centroids[r.assignment[i]]);
        r.sse_trace.push_back(sse);
    }

    r.sse = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) r.sse += dist_sq(points[i], r.centroids[r.assignment[i]]);
    return r;
}

}  // namespace

KMeansResult lloyd(const std::vector<Point>& points, std::size_t k, std::uint64_t seed, int max_iterations,
                   int restarts)
{
    if (k == 0) throw ConfigError("k-means needs k >= 1");
    if (k > points.size()) throw ConfigError("k-means k exceeds the number of points");
    if (restarts < 1) throw ConfigError("k-means needs at least one restart");
    Rng rng(seed);
    KMeansResult best;
    for (int run = 0; run < restarts; ++run) {
        auto r = single_run(points, k, rng, max_iterations);
        if (run == 0 || r.sse < best.sse) best = std::move(r);
    }
    return best;
}

}  // namespace mindpres::ml

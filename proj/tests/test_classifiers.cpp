#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "mindpres/classifiers.hpp"
#include "mindpres/error.hpp"
#include "oracles.hpp"

using namespace mindpres;

TEST_CASE("naive Bayes equals the counting oracle")
{
    Rng rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        const auto vocab = oracle::synthetic_vocab(1 + rng.below(8));
        const auto data = oracle::random_dataset(rng, vocab, 2 + rng.below(30));
        const auto model = ml::train(data, vocab, ml::ModelKind::naive_bayes, {}, 1);
        for (int q = 0; q < 5; ++q) {
            const auto x = oracle::random_vector(rng, vocab);
            CHECK(std::abs(model.predict_score(x) - oracle::naive_bayes_posterior(data, x)) <= 1e-12);
        }
    }
}

TEST_CASE("naive Bayes hand example")
{
    // Two apps per class; feature present in both malicious and no benign app.
    const auto vocab = oracle::synthetic_vocab(1);
    ml::Dataset d;
    for (int i = 0; i < 4; ++i) {
        d.vectors.push_back({{static_cast<std::uint8_t>(i >= 2)}, vocab.content_hash()});
        d.labels.push_back(i >= 2 ? Label::malicious : Label::benign);
    }
    const auto p = ml::train_naive_bayes(d, 1);
    // P(x=1|mal) = 3/4, P(x=1|ben) = 1/4.
    CHECK(std::exp(p.log_present[1][0]) == doctest::Approx(0.75));
    CHECK(std::exp(p.log_present[0][0]) == doctest::Approx(0.25));
    const auto m = ml::train(d, vocab, ml::ModelKind::naive_bayes, {}, 0);
    CHECK(m.predict_score({{1}, vocab.content_hash()}) == doctest::Approx(0.75));
}

TEST_CASE("SDCA dual objective never decreases")
{
    Rng rng(23);
    for (int trial = 0; trial < 50; ++trial) {
        const auto vocab = oracle::synthetic_vocab(1 + rng.below(12));
        const auto data = oracle::random_dataset(rng, vocab, 4 + rng.below(60));
        const auto r = ml::train_sdca(data, vocab.size(), 0.01 + rng.uniform(), 15, rng.next_u64());
        REQUIRE(r.dual_objective.size() == 16);
        for (std::size_t e = 1; e < r.dual_objective.size(); ++e)
            CHECK(r.dual_objective[e] >= r.dual_objective[e - 1] - 1e-12);
    }
}

TEST_CASE("SDCA separates a separable problem")
{
    const auto vocab = oracle::synthetic_vocab(3);
    ml::Dataset d;
    Rng rng(2);
    for (int i = 0; i < 40; ++i) {
        auto x = oracle::random_vector(rng, vocab);
        const Label y = i % 2 ? Label::malicious : Label::benign;
        x.bits[1] = y == Label::malicious;
        d.vectors.push_back(x);
        d.labels.push_back(y);
    }
    ml::Hyperparams hp;
    hp.svm_epochs = 50;
    const auto m = ml::train(d, vocab, ml::ModelKind::svm_sdca, hp, 5);
    const auto r = ml::evaluate(m, d);
    CHECK(r.accuracy == 1.0);
}

TEST_CASE("k-means matches exhaustive two-partition search")
{
    Rng rng(29);
    for (int trial = 0; trial < 100; ++trial) {
        const auto n = 2 + rng.below(11);
        const auto pts = oracle::planted_two_clusters(rng, n, 1 + rng.below(3));
        const auto r = ml::lloyd(pts, 2, rng.next_u64(), 100, 10);
        CHECK(r.sse == doctest::Approx(oracle::min_two_partition_sse(pts)).epsilon(1e-9));
    }
}

TEST_CASE("k-means SSE trace is non-increasing")
{
    Rng rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::vector<double>> pts;
        const auto n = 3 + rng.below(40);
        for (std::size_t i = 0; i < n; ++i) pts.push_back({rng.uniform(), rng.uniform(), rng.uniform()});
        const auto r = ml::lloyd(pts, 1 + rng.below(4), rng.next_u64(), 100, 1);
        for (std::size_t i = 1; i < r.sse_trace.size(); ++i) CHECK(r.sse_trace[i] <= r.sse_trace[i - 1] + 1e-12);
        CHECK(r.assignment.size() == n);
    }
}

TEST_CASE("boosted stumps: perfect stump stops boosting with capped vote")
{
    const auto vocab = oracle::synthetic_vocab(2);
    ml::Dataset d;
    for (int i = 0; i < 10; ++i) {
        const bool mal = i % 2;
        d.vectors.push_back({{static_cast<std::uint8_t>(mal), 0}, vocab.content_hash()});
        d.labels.push_back(mal ? Label::malicious : Label::benign);
    }
    const auto p = ml::train_boosted_stumps(d, 2, 50);
    REQUIRE(p.stumps.size() == 1);
    CHECK(p.stumps[0].feature == 0);
    CHECK(p.stumps[0].polarity == 1);
    CHECK(p.stumps[0].vote == 10.0);
}

TEST_CASE("boosted stumps: weighted error drives the vote")
{
    // Feature 0 agrees with the label on 8 of 10 samples: eps = 0.2.
    const auto vocab = oracle::synthetic_vocab(1);
    ml::Dataset d;
    for (int i = 0; i < 10; ++i) {
        const bool mal = i < 5;
        const bool bit = (i == 0 || i == 5) ? !mal : mal;
        d.vectors.push_back({{static_cast<std::uint8_t>(bit)}, vocab.content_hash()});
        d.labels.push_back(mal ? Label::malicious : Label::benign);
    }
    const auto p = ml::train_boosted_stumps(d, 1, 1);
    REQUIRE(p.stumps.size() == 1);
    CHECK(p.stumps[0].vote == doctest::Approx(0.5 * std::log(0.8 / 0.2)));
}

TEST_CASE("every kind trains, scores within [0,1] and validates")
{
    Rng rng(37);
    const auto vocab = oracle::synthetic_vocab(6);
    const auto data = oracle::random_dataset(rng, vocab, 40);
    for (auto kind : ml::kAllKinds) {
        const auto m = ml::train(data, vocab, kind, {}, 3);
        CHECK_NOTHROW(m.validate());
        CHECK(m.kind == kind);
        CHECK(m.model_id.rfind(std::string(ml::to_string(kind)), 0) == 0);
        for (const auto& x : data.vectors) {
            const double s = m.predict_score(x);
            CHECK(s >= 0.0);
            CHECK(s <= 1.0);
        }
        CHECK(ml::train(data, vocab, kind, {}, 3).model_id == m.model_id);
    }
}

TEST_CASE("scoring a vector from another vocabulary fails")
{
    Rng rng(1);
    const auto vocab = oracle::synthetic_vocab(3);
    const auto m = ml::train(oracle::random_dataset(rng, vocab, 10), vocab, ml::ModelKind::naive_bayes, {}, 0);
    CHECK_THROWS_AS(m.predict_score({{1, 0, 1}, "elsewhere"}), VocabMismatch);
}

TEST_CASE("kind names round trip")
{
    for (auto kind : ml::kAllKinds) CHECK(ml::kind_from_string(ml::to_string(kind)) == kind);
    CHECK_THROWS_AS(ml::kind_from_string("forest"), ConfigError);
}

TEST_CASE("confusion tally equals enumeration")
{
    Rng rng(41);
    for (int trial = 0; trial < 500; ++trial) {
        const auto n = rng.below(60);
        std::vector<bool> pred;
        std::vector<Label> truth;
        for (std::size_t i = 0; i < n; ++i) {
            pred.push_back(rng.bernoulli(0.5));
            truth.push_back(rng.bernoulli(0.5) ? Label::malicious : Label::benign);
        }
        const auto got = ml::tally(pred, truth);
        const auto want = oracle::enumerate_confusion(pred, truth);
        CHECK(got.tp == want.tp);
        CHECK(got.fp == want.fp);
        CHECK(got.tn == want.tn);
        CHECK(got.fn == want.fn);
        const auto r = ml::make_report("m", got);
        if (n > 0) CHECK(r.accuracy == static_cast<double>(want.tp + want.tn) / static_cast<double>(n));
        if (want.fp + want.tn > 0)
            CHECK(r.false_alarm_rate == static_cast<double>(want.fp) / static_cast<double>(want.fp + want.tn));
        else
            CHECK(r.false_alarm_rate == 0.0);
    }
}

TEST_CASE("evaluate on an empty dataset fails")
{
    Rng rng(1);
    const auto vocab = oracle::synthetic_vocab(2);
    const auto m = ml::train(oracle::random_dataset(rng, vocab, 10), vocab, ml::ModelKind::svm_sdca, {}, 0);
    CHECK_THROWS_AS(ml::evaluate(m, {}), EmptyDataset);
}

TEST_CASE("select_best: accuracy, then false alarms, then id")
{
    auto rep = [](std::string id, double acc, double far) {
        ml::EvalReport r;
        r.model_id = std::move(id);
        r.accuracy = acc;
        r.false_alarm_rate = far;
        return r;
    };
    CHECK(ml::select_best({rep("b", 0.9, 0.2), rep("a", 0.8, 0.0)}) == "b");
    CHECK(ml::select_best({rep("b", 0.9, 0.2), rep("c", 0.9, 0.1)}) == "c");
    CHECK(ml::select_best({rep("z", 0.9, 0.1), rep("y", 0.9, 0.1)}) == "y");
    CHECK_THROWS_AS(ml::select_best({}), EmptyInput);
}

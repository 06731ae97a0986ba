#include <doctest.h>

#include <fstream>
#include <set>

#include "fixtures.hpp"
#include "mindpres/error.hpp"
#include "mindpres/evaluator.hpp"
#include "mindpres/training.hpp"
#include "oracles.hpp"

using namespace mindpres;

TEST_CASE("risk thresholds")
{
    CHECK(risk_from_score(0.7) == RiskLevel::high);
    CHECK(risk_from_score(1.0) == RiskLevel::high);
    CHECK(risk_from_score(0.69999999) == RiskLevel::medium);
    CHECK(risk_from_score(0.3) == RiskLevel::medium);
    CHECK(risk_from_score(std::nextafter(0.3, 0.0)) == RiskLevel::low);
    CHECK(risk_from_score(0.0) == RiskLevel::low);
    for (auto r : {RiskLevel::low, RiskLevel::medium, RiskLevel::high}) CHECK(risk_from_string(to_string(r)) == r);
}

TEST_CASE("training pipeline: split sizes, selected model and report")
{
    evaluator::TrainingOptions options;
    options.seed = 42;
    const auto c = corpus::generate(42, 100, 100);
    const auto out = evaluator::train_and_select(c, options);
    CHECK(out.split.train_ids.size() == 160);
    CHECK(out.split.test_ids.size() == 40);
    CHECK(out.models.size() == 4);
    CHECK(out.reports.size() == 4);
    CHECK(out.selected_vocabulary.size() <= options.top_k);
    CHECK(out.bundle.model.model_id == out.selected_id);
    CHECK(out.selected_id == ml::select_best(out.reports));
    CHECK(out.bundle.metadata.corpus_hash == corpus::content_hash(c));
    for (const auto& r : out.reports) CHECK(r.confusion.total() == 40);

    const auto j = evaluator::training_report_json(out);
    CHECK(j["selected"] == out.selected_id);
    CHECK(j["reports"].size() == 4);
}

TEST_CASE("vocabulary comes from the training part only")
{
    auto c = corpus::generate(7, 30, 30);
    evaluator::TrainingOptions options;
    options.seed = 7;
    options.top_k = 1000;
    const auto s = corpus::split(c, options.train_fraction, options.seed);
    // Give one test app a token nobody else has.
    for (auto& e : c.entries)
        if (e.manifest.app_id == s.test_ids.front()) e.manifest.permissions.insert("android.permission.ONLY_IN_TEST");
    const auto out = evaluator::train_and_select(c, options);
    CHECK_FALSE(out.full_vocabulary.index_of("perm:android.permission.ONLY_IN_TEST").has_value());
}

TEST_CASE("bundle round trip preserves scores")
{
    const auto& b = fixture::trained_bundle();
    const auto back = evaluator::bundle_from_json(evaluator::bundle_to_json(b));
    CHECK(back.model.model_id == b.model.model_id);
    CHECK(back.model.vocab == b.model.vocab);
    Rng rng(3);
    for (int i = 0; i < 100; ++i) {
        const auto x = oracle::random_vector(rng, b.model.vocab, 0.2);
        CHECK(back.model.predict_score(x) == b.model.predict_score(x));
    }
}

TEST_CASE("every kind survives the bundle round trip")
{
    Rng rng(5);
    const auto vocab = oracle::synthetic_vocab(5);
    const auto data = oracle::random_dataset(rng, vocab, 30);
    for (auto kind : ml::kAllKinds) {
        evaluator::ModelBundle b;
        b.model = ml::train(data, vocab, kind, {}, 9);
        b.metadata.seed = 9;
        const auto back = evaluator::bundle_from_json(evaluator::bundle_to_json(b));
        for (const auto& x : data.vectors) CHECK(back.model.predict_score(x) == b.model.predict_score(x));
    }
}

TEST_CASE("bundle file round trip")
{
    const auto path = fixture::scratch("bundle.json");
    evaluator::save_model(fixture::trained_bundle(), path);
    const auto back = evaluator::load_model(path);
    CHECK(back.model.model_id == fixture::trained_bundle().model.model_id);
}

TEST_CASE("foreign version and tampering are rejected")
{
    auto j = evaluator::bundle_to_json(fixture::trained_bundle());
    auto v = j;
    v["format_version"] = 99;
    CHECK_THROWS_AS(evaluator::bundle_from_json(v), VersionError);

    auto t = j;
    t["model_id"] = "forged";
    CHECK_THROWS_AS(evaluator::bundle_from_json(t), CorruptModel);

    auto s = j;
    s["checksum"] = std::string(64, '0');
    CHECK_THROWS_AS(evaluator::bundle_from_json(s), CorruptModel);

    const auto path = fixture::scratch("truncated.json");
    {
        std::ofstream out(path);
        out << j.dump().substr(0, 100);
    }
    CHECK_THROWS_AS(evaluator::load_model(path), CorruptModel);
}

TEST_CASE("assess maps the score onto a risk level")
{
    const auto& b = fixture::trained_bundle();
    const auto c = corpus::generate(42, 100, 100);
    std::size_t high_mal = 0;
    for (const auto& e : c.entries) {
        const auto a = evaluator::assess(e.manifest, b, 17);
        CHECK(a.app_id == e.manifest.app_id);
        CHECK(a.assessed_at == 17);
        CHECK(a.model_id == b.model.model_id);
        CHECK(a.risk == risk_from_score(a.score));
        if (e.label.label == Label::malicious && a.risk == RiskLevel::high) ++high_mal;
    }
    CHECK(high_mal > 50);
}

TEST_CASE("model store swaps the whole bundle")
{
    auto first = std::make_shared<const evaluator::ModelBundle>(fixture::trained_bundle());
    evaluator::ModelStore store(first);
    auto held = store.current();
    auto second = std::make_shared<evaluator::ModelBundle>(fixture::trained_bundle());
    second->metadata.seed = 1234;
    store.replace(second);
    CHECK(held->metadata.seed == 42);
    CHECK(store.current()->metadata.seed == 1234);
}

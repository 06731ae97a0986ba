#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "mindpres/error.hpp"
#include "mindpres/features.hpp"
#include "oracles.hpp"

using namespace mindpres;

namespace {

// MI straight from the definition, on the add-one smoothed table.
double mi_oracle(const std::uint64_t c[2][2])
{
    double n = 0;
    for (int f = 0; f < 2; ++f)
        for (int y = 0; y < 2; ++y) n += c[f][y] + 1.0;
    double mi = 0;
    for (int f = 0; f < 2; ++f)
        for (int y = 0; y < 2; ++y) {
            const double pxy = (c[f][y] + 1.0) / n;
            const double px = (c[f][0] + c[f][1] + 2.0) / n;
            const double py = (c[0][y] + c[1][y] + 2.0) / n;
            mi += pxy * std::log(pxy / (px * py));
        }
    return std::max(0.0, mi);
}

AppManifest manifest(std::string id, std::set<std::string> perms)
{
    AppManifest m;
    m.app_id = std::move(id);
    m.permissions = std::move(perms);
    return m;
}

}  // namespace

TEST_CASE("vocabulary is sorted, unique and hashed over content")
{
    Vocabulary v({"b", "a", "b", "c"});
    CHECK(v.tokens() == std::vector<std::string>{"a", "b", "c"});
    CHECK(v.index_of("c") == 2U);
    CHECK_FALSE(v.index_of("z").has_value());
    CHECK(Vocabulary({"c", "a", "b"}).content_hash() == v.content_hash());
    CHECK(Vocabulary({"a", "b"}).content_hash() != v.content_hash());
}

TEST_CASE("tokens are namespaced by kind")
{
    AppManifest m = manifest("x", {"P"});
    m.intents = {"I"};
    m.hardware_features = {"H"};
    const auto t = features::namespaced_tokens(m);
    CHECK(std::find(t.begin(), t.end(), "perm:P") != t.end());
    CHECK(std::find(t.begin(), t.end(), "intent:I") != t.end());
    CHECK(std::find(t.begin(), t.end(), "hw:H") != t.end());
}

TEST_CASE("extract sets exactly the declared bits")
{
    const auto vocab = features::build_vocabulary({manifest("a", {"A", "B"}), manifest("b", {"C"})});
    CHECK(vocab.size() == 3);
    const auto x = features::extract(manifest("q", {"B", "UNSEEN"}), vocab);
    CHECK(x.bits == std::vector<std::uint8_t>{0, 1, 0});
    CHECK(x.vocab_hash == vocab.content_hash());
}

TEST_CASE("extract property: bit set iff token declared")
{
    Rng rng(8);
    const auto corpus = corpus::generate(3, 20, 20);
    const auto vocab = features::build_vocabulary(corpus);
    for (const auto& e : corpus.entries) {
        const auto x = features::extract(e.manifest, vocab);
        const auto toks = features::namespaced_tokens(e.manifest);
        std::size_t ones = 0;
        for (auto b : x.bits) ones += b;
        CHECK(ones == toks.size());
        for (const auto& t : toks) CHECK(x.bits[*vocab.index_of(t)] == 1);
    }
}

TEST_CASE("smoothed MI matches the definition on random tables")
{
    Rng rng(21);
    for (int i = 0; i < 500; ++i) {
        std::uint64_t c[2][2];
        for (auto& row : c)
            for (auto& v : row) v = rng.below(50);
        CHECK(features::smoothed_mutual_information(c) == doctest::Approx(mi_oracle(c)).epsilon(1e-12));
    }
    std::uint64_t indep[2][2] = {{9, 9}, {9, 9}};
    CHECK(features::smoothed_mutual_information(indep) == doctest::Approx(0.0));
}

TEST_CASE("a perfectly predictive feature ranks first")
{
    const auto vocab = oracle::synthetic_vocab(6);
    Rng rng(4);
    std::vector<FeatureVector> xs;
    std::vector<Label> ys;
    for (int i = 0; i < 60; ++i) {
        auto x = oracle::random_vector(rng, vocab);
        const Label y = i % 2 ? Label::malicious : Label::benign;
        x.bits[3] = y == Label::malicious;
        xs.push_back(x);
        ys.push_back(y);
    }
    const auto r = features::rank(xs, ys, vocab);
    CHECK(r.front().token == vocab.tokens()[3]);
    for (std::size_t i = 1; i < r.size(); ++i) {
        CHECK(r[i - 1].score >= r[i].score);
        if (r[i - 1].score == r[i].score) CHECK(r[i - 1].token < r[i].token);
    }
    const auto top = features::select(xs, ys, vocab, 2);
    CHECK(top.size() == 2);
    CHECK(std::is_sorted(top.tokens().begin(), top.tokens().end()));
    CHECK(top.index_of(vocab.tokens()[3]).has_value());
}

TEST_CASE("ties break lexicographically and k larger than the vocabulary keeps all")
{
    const auto vocab = oracle::synthetic_vocab(3);
    std::vector<FeatureVector> xs(4, FeatureVector{{1, 1, 1}, vocab.content_hash()});
    std::vector<Label> ys = {Label::benign, Label::malicious, Label::benign, Label::malicious};
    const auto r = features::rank(xs, ys, vocab);
    CHECK(r[0].token == vocab.tokens()[0]);
    CHECK(r[2].token == vocab.tokens()[2]);
    CHECK(features::select(xs, ys, vocab, 99).size() == 3);
}

TEST_CASE("feature selection errors")
{
    const auto vocab = oracle::synthetic_vocab(2);
    std::vector<FeatureVector> xs(2, FeatureVector{{1, 0}, vocab.content_hash()});
    CHECK_THROWS_AS(features::select(xs, {Label::benign, Label::benign}, vocab, 1), InsufficientClasses);
    CHECK_THROWS_AS(features::select(xs, {Label::benign}, vocab, 1), ConfigError);
    auto foreign = xs;
    foreign[0].vocab_hash = "other";
    CHECK_THROWS_AS(features::select(foreign, {Label::benign, Label::malicious}, vocab, 1), VocabMismatch);
}

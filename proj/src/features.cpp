#include "mindpres/features.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "mindpres/digest.hpp"
#include "mindpres/error.hpp"

namespace mindpres {

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens))
{
    std::sort(tokens_.begin(), tokens_.end());
    tokens_.erase(std::unique(tokens_.begin(), tokens_.end()), tokens_.end());
    std::string joined;
    for (const auto& t : tokens_) {
        joined += t;
        joined.push_back('\n');
    }
    hash_ = sha256_hex(joined);
    index_.reserve(tokens_.size());
    for (std::size_t i = 0; i < tokens_.size(); ++i) index_.emplace(tokens_[i], i);
}

std::optional<std::size_t> Vocabulary::index_of(const std::string& token) const
{
    const auto it = index_.find(token);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

namespace features {

std::vector<std::string> namespaced_tokens(const AppManifest& m)
{
    std::vector<std::string> out;
    out.reserve(m.permissions.size() + m.intents.size() + m.hardware_features.size());
    for (const auto& t : m.permissions) out.push_back("perm:" + t);
    for (const auto& t : m.intents) out.push_back("intent:" + t);
    for (const auto& t : m.hardware_features) out.push_back("hw:" + t);
    return out;
}

Vocabulary build_vocabulary(const std::vector<AppManifest>& manifests)
{
    std::set<std::string> all;
    for (const auto& m : manifests)
        for (auto& t : namespaced_tokens(m)) all.insert(std::move(t));
    return Vocabulary(std::vector<std::string>(all.begin(), all.end()));
}

Vocabulary build_vocabulary(const Corpus& corpus)
{
    std::vector<AppManifest> manifests;
    manifests.reserve(corpus.size());
    for (const auto& e : corpus.entries) manifests.push_back(e.manifest);
    return build_vocabulary(manifests);
}

FeatureVector extract(const AppManifest& manifest, const Vocabulary& vocab)
{
    FeatureVector v;
    v.bits.assign(vocab.size(), 0);
    v.vocab_hash = vocab.content_hash();
    for (const auto& t : namespaced_tokens(manifest))
        if (auto i = vocab.index_of(t)) v.bits[*i] = 1;
    return v;
}

double smoothed_mutual_information(const std::uint64_t counts[2][2])
{
    double joint[2][2];
    double total = 0.0;
    for (int f = 0; f < 2; ++f)
        for (int y = 0; y < 2; ++y) {
            joint[f][y] = static_cast<double>(counts[f][y]) + 1.0;
            total += joint[f][y];
        }
    double pf[2] = {0.0, 0.0};
    double py[2] = {0.0, 0.0};
    for (int f = 0; f < 2; ++f)
        for (int y = 0; y < 2; ++y) {
            joint[f][y] /= total;
            pf[f] += joint[f][y];
            py[y] += joint[f][y];
        }
    double mi = 0.0;
    for (int f = 0; f < 2; ++f)
        for (int y = 0; y < 2; ++y) mi += joint[f][y] * std::log(joint[f][y] / (pf[f] * py[y]));
    return std::max(0.0, mi);
}

namespace {

void check_aligned(const std::vector<FeatureVector>& vectors, const std::vector<Label>& labels,
                   const Vocabulary& vocab)
{
    if (vectors.size() != labels.size()) throw ConfigError("vectors and labels differ in length");
    for (const auto& v : vectors)
        if (v.vocab_hash != vocab.content_hash() || v.bits.size() != vocab.size())
            throw VocabMismatch("feature vector was encoded with a different vocabulary");
    const auto n_mal = std::count(labels.begin(), labels.end(), Label::malicious);
    if (n_mal == 0 || n_mal == static_cast<long>(labels.size()))
        throw InsufficientClasses("feature selection needs both classes");
}

}  // namespace

FeatureRanking rank(const std::vector<FeatureVector>& vectors, const std::vector<Label>& labels,
                    const Vocabulary& vocab)
{
    check_aligned(vectors, labels, vocab);
    FeatureRanking ranking;
    ranking.reserve(vocab.size());
    for (std::size_t i = 0; i < vocab.size(); ++i) {
        std::uint64_t counts[2][2] = {{0, 0}, {0, 0}};
        for (std::size_t s = 0; s < vectors.size(); ++s)
            ++counts[vectors[s].bits[i] ? 1 : 0][static_cast<int>(labels[s])];
        ranking.push_back({vocab.tokens()[i], smoothed_mutual_information(counts)});
    }
    std::sort(ranking.begin(), ranking.end(), [](const RankedFeature& a, const RankedFeature& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.token < b.token;
    });
    return ranking;
}

Vocabulary select(const std::vector<FeatureVector>& vectors, const std::vector<Label>& labels,
                  const Vocabulary& vocab, std::size_t k)
{
    const auto ranking = rank(vectors, labels, vocab);
    std::vector<std::string> kept;
    for (std::size_t i = 0; i < ranking.size() && i < k; ++i) kept.push_back(ranking[i].token);
    return Vocabulary(std::move(kept));
}

}  // namespace features
}  // namespace mindpres

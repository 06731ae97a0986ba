#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mindpres/corpus.hpp"

namespace mindpres {

/// Ordered, namespaced token list (`perm:`, `intent:`, `hw:`).
///
/// Tokens are unique and sorted lexicographically; the content hash covers the
/// ordered list so that vectors can be checked against the vocabulary they
/// were encoded with.
class Vocabulary {
public:
    Vocabulary() : Vocabulary(std::vector<std::string>{}) {}
    /// Sorts and deduplicates `tokens`.
    explicit Vocabulary(std::vector<std::string> tokens);

    const std::vector<std::string>& tokens() const { return tokens_; }
    const std::string& content_hash() const { return hash_; }
    std::size_t size() const { return tokens_.size(); }
    bool empty() const { return tokens_.empty(); }
    std::optional<std::size_t> index_of(const std::string& token) const;

    bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

private:
    std::vector<std::string> tokens_;
    std::string hash_;
    std::unordered_map<std::string, std::size_t> index_;
};

struct FeatureVector {
    std::vector<std::uint8_t> bits;
    std::string vocab_hash;

    bool operator==(const FeatureVector&) const = default;
};

struct RankedFeature {
    std::string token;
    double score = 0.0;
};

using FeatureRanking = std::vector<RankedFeature>;

namespace features {

/// Namespaced tokens declared by one manifest.
std::vector<std::string> namespaced_tokens(const AppManifest& manifest);

Vocabulary build_vocabulary(const std::vector<AppManifest>& manifests);
Vocabulary build_vocabulary(const Corpus& corpus);

/// Bit i is set iff vocabulary token i appears in the manifest; tokens outside
/// the vocabulary are ignored.
FeatureVector extract(const AppManifest& manifest, const Vocabulary& vocab);

/// Mutual information (nats) between a binary feature and the label, computed
/// on the add-one smoothed 2x2 contingency table.
///
/// `counts[f][y]` is the number of samples with feature value f and label y.
double smoothed_mutual_information(const std::uint64_t counts[2][2]);

/// Every vocabulary token scored by smoothed MI, descending, ties lexicographic.
FeatureRanking rank(const std::vector<FeatureVector>& vectors, const std::vector<Label>& labels,
                    const Vocabulary& vocab);

/// Top-k tokens of `rank`, returned re-sorted lexicographically.
/// Throws InsufficientClasses unless both labels occur.
Vocabulary select(const std::vector<FeatureVector>& vectors, const std::vector<Label>& labels,
                  const Vocabulary& vocab, std::size_t k);

}  // namespace features
}  // namespace mindpres

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace mindpres {

using Json = nlohmann::ordered_json;

enum class Label { benign = 0, malicious = 1 };

std::string_view to_string(Label label);
Label label_from_string(std::string_view s);

/// Declared permissions, intent actions and hardware features of one app.
struct AppManifest {
    std::string app_id;
    std::string package_name;
    std::set<std::string> permissions;
    std::set<std::string> intents;
    std::set<std::string> hardware_features;

    bool operator==(const AppManifest&) const = default;
};

struct AppLabel {
    std::string app_id;
    Label label = Label::benign;
    std::optional<std::string> family;

    bool operator==(const AppLabel&) const = default;
};

struct CorpusEntry {
    AppManifest manifest;
    AppLabel label;

    bool operator==(const CorpusEntry&) const = default;
};

struct Corpus {
    std::vector<CorpusEntry> entries;

    std::size_t size() const { return entries.size(); }
    bool empty() const { return entries.empty(); }
    bool operator==(const Corpus&) const = default;
};

struct DataSplit {
    std::vector<std::string> train_ids;
    std::vector<std::string> test_ids;

    bool operator==(const DataSplit&) const = default;
};

/// Non-empty and free of whitespace.
bool is_valid_token(std::string_view token);

/// Throws IntegrityError on an empty app_id or an invalid token.
void validate_manifest(const AppManifest& manifest);

Json manifest_to_json(const AppManifest& manifest);
/// Throws Error describing the first schema violation.
AppManifest manifest_from_json(const Json& j);

namespace corpus {

enum class TokenKind { permission, intent, hardware };

struct TokenSpec {
    std::string token;
    TokenKind kind = TokenKind::permission;
    double benign_probability = 0.0;
    bool dangerous = false;
};

/// Per-class token inclusion probabilities over a fixed universe.
///
/// Malicious apps include a dangerous token with probability
/// min(1, benign_probability * separation); other tokens share the benign rate.
struct GenerationProfile {
    std::vector<TokenSpec> tokens;
    double separation = 4.0;

    /// 40 permissions, 15 intents, 10 hardware features.
    static GenerationProfile standard();

    double probability(const TokenSpec& spec, Label label) const;
};

Corpus generate(std::uint64_t seed, std::size_t n_benign, std::size_t n_malicious,
                const GenerationProfile& profile = GenerationProfile::standard());

/// Stratified by label. Per class, round(train_fraction * class_size) ids go to
/// training; both id lists keep corpus order.
DataSplit split(const Corpus& corpus, double train_fraction, std::uint64_t seed);

std::string to_jsonl(const Corpus& corpus);
Corpus parse_jsonl(std::istream& in);

void save(const Corpus& corpus, const std::filesystem::path& path);
Corpus load(const std::filesystem::path& path);

/// SHA-256 of the JSONL serialization.
std::string content_hash(const Corpus& corpus);

/// Entries whose app_id is listed, in the order of `ids`.
std::vector<CorpusEntry> select(const Corpus& corpus, const std::vector<std::string>& ids);

}  // namespace corpus
}  // namespace mindpres

#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "mindpres/classifiers.hpp"
#include "mindpres/corpus.hpp"

namespace mindpres {

/// Simulation time. Every timestamp in the system is a tick, never wall time.
using Tick = std::uint64_t;

enum class RiskLevel { low = 0, medium = 1, high = 2 };

std::string_view to_string(RiskLevel risk);
RiskLevel risk_from_string(std::string_view s);

inline constexpr double kHighRiskScore = 0.7;
inline constexpr double kMediumRiskScore = 0.3;

/// score >= 0.7 is high, 0.3 <= score < 0.7 is medium, anything lower is low.
RiskLevel risk_from_score(double score);

struct RiskAssessment {
    std::string app_id;
    RiskLevel risk = RiskLevel::low;
    double score = 0.0;
    std::string model_id;
    Tick assessed_at = 0;

    bool operator==(const RiskAssessment&) const = default;
};

namespace evaluator {

inline constexpr int kFormatVersion = 1;

struct TrainingMetadata {
    std::uint64_t seed = 0;
    std::string corpus_hash;
    std::optional<ml::EvalReport> report;
};

/// A trained model plus the vocabulary it scores against and how it was made.
struct ModelBundle {
    int format_version = kFormatVersion;
    ml::TrainedModel model;
    TrainingMetadata metadata;
};

Json report_to_json(const ml::EvalReport& report);
ml::EvalReport report_from_json(const Json& j);

/// Serialized document including its checksum.
Json bundle_to_json(const ModelBundle& bundle);
/// Throws VersionError for a foreign format_version and CorruptModel for any
/// checksum, schema or consistency failure.
ModelBundle bundle_from_json(const Json& j);

void save_model(const ModelBundle& bundle, const std::filesystem::path& path);
ModelBundle load_model(const std::filesystem::path& path);

/// Extract features against the bundle vocabulary, score, and map to a risk
/// level. Throws ModelError if the bundle is inconsistent.
RiskAssessment assess(const AppManifest& manifest, const ModelBundle& bundle, Tick at);

/// Holds the served bundle. Replacement swaps the whole bundle; requests that
/// already fetched the old one finish against it.
class ModelStore {
public:
    explicit ModelStore(std::shared_ptr<const ModelBundle> bundle) : bundle_(std::move(bundle)) {}

    std::shared_ptr<const ModelBundle> current() const
    {
        std::lock_guard lock(mutex_);
        return bundle_;
    }

    void replace(std::shared_ptr<const ModelBundle> bundle)
    {
        std::lock_guard lock(mutex_);
        bundle_ = std::move(bundle);
    }

private:
    mutable std::mutex mutex_;
    std::shared_ptr<const ModelBundle> bundle_;
};

}  // namespace evaluator
}  // namespace mindpres

#include "mindpres/evaluator.hpp"

#include <fstream>
#include <sstream>

#include "mindpres/digest.hpp"
#include "mindpres/error.hpp"

namespace mindpres {

std::string_view to_string(RiskLevel risk)
{
    switch (risk) {
    case RiskLevel::high: return "high";
    case RiskLevel::medium: return "medium";
    case RiskLevel::low: return "low";
    }
    return "low";
}

RiskLevel risk_from_string(std::string_view s)
{
    if (s == "high") return RiskLevel::high;
    if (s == "medium") return RiskLevel::medium;
    if (s == "low") return RiskLevel::low;
    throw Error("unknown risk level '" + std::string(s) + "'");
}

RiskLevel risk_from_score(double score)
{
    if (score >= kHighRiskScore) return RiskLevel::high;
    if (score >= kMediumRiskScore) return RiskLevel::medium;
    return RiskLevel::low;
}

namespace evaluator {

namespace {

Json params_to_json(const ml::ModelParams& params)
{
    Json j;
    std::visit(
        [&j](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, ml::NaiveBayesParams>) {
                j["log_prior"] = p.log_prior;
                j["log_present"] = p.log_present;
                j["log_absent"] = p.log_absent;
            } else if constexpr (std::is_same_v<T, ml::LinearSvmParams>) {
                j["weights"] = p.weights;
                j["bias"] = p.bias;
            } else if constexpr (std::is_same_v<T, ml::KMeansParams>) {
                j["centroids"] = p.centroids;
                j["malicious_fraction"] = p.malicious_fraction;
            } else {
                Json stumps = Json::array();
                for (const auto& s : p.stumps)
                    stumps.push_back({{"feature", s.feature}, {"polarity", s.polarity}, {"vote", s.vote}});
                j["stumps"] = std::move(stumps);
            }
        },
        params);
    return j;
}

ml::ModelParams params_from_json(ml::ModelKind kind, const Json& j)
{
    switch (kind) {
    case ml::ModelKind::naive_bayes: {
        ml::NaiveBayesParams p;
        p.log_prior = j.at("log_prior").get<std::array<double, 2>>();
        p.log_present = j.at("log_present").get<std::array<std::vector<double>, 2>>();
        p.log_absent = j.at("log_absent").get<std::array<std::vector<double>, 2>>();
        return p;
    }
    case ml::ModelKind::svm_sdca: {
        ml::LinearSvmParams p;
        p.weights = j.at("weights").get<std::vector<double>>();
        p.bias = j.at("bias").get<double>();
        return p;
    }
    case ml::ModelKind::kmeans: {
        ml::KMeansParams p;
        p.centroids = j.at("centroids").get<std::vector<std::vector<double>>>();
        p.malicious_fraction = j.at("malicious_fraction").get<std::vector<double>>();
        return p;
    }
    case ml::ModelKind::boosted_stumps: {
        ml::StumpEnsembleParams p;
        for (const auto& s : j.at("stumps"))
            p.stumps.push_back({s.at("feature").get<std::size_t>(), s.at("polarity").get<int>(),
                                s.at("vote").get<double>()});
        return p;
    }
    }
    throw CorruptModel("unknown model kind");
}

std::string checksum_of(Json doc)
{
    doc.erase("checksum");
    return sha256_hex(doc.dump());
}

}  // namespace

Json report_to_json(const ml::EvalReport& r)
{
    Json j;
    j["model_id"] = r.model_id;
    j["confusion"] = {{"tp", r.confusion.tp}, {"fp", r.confusion.fp}, {"tn", r.confusion.tn}, {"fn", r.confusion.fn}};
    j["accuracy"] = r.accuracy;
    j["false_alarm_rate"] = r.false_alarm_rate;
    return j;
}

ml::EvalReport report_from_json(const Json& j)
{
    ml::EvalReport r;
    r.model_id = j.at("model_id").get<std::string>();
    const auto& c = j.at("confusion");
    r.confusion = {c.at("tp").get<std::size_t>(), c.at("fp").get<std::size_t>(), c.at("tn").get<std::size_t>(),
                   c.at("fn").get<std::size_t>()};
    r.accuracy = j.at("accuracy").get<double>();
    r.false_alarm_rate = j.at("false_alarm_rate").get<double>();
    return r;
}

Json bundle_to_json(const ModelBundle& b)
{
    Json doc;
    doc["format_version"] = b.format_version;
    doc["checksum"] = "";
    doc["model_id"] = b.model.model_id;
    doc["kind"] = ml::to_string(b.model.kind);
    doc["vocabulary"] = b.model.vocab.tokens();
    doc["vocab_hash"] = b.model.vocab.content_hash();
    doc["parameters"] = params_to_json(b.model.params);
    Json meta;
    meta["seed"] = b.metadata.seed;
    meta["corpus_hash"] = b.metadata.corpus_hash;
    meta["report"] = b.metadata.report ? report_to_json(*b.metadata.report) : Json(nullptr);
    doc["metadata"] = std::move(meta);
    doc["checksum"] = checksum_of(doc);
    return doc;
}

ModelBundle bundle_from_json(const Json& doc)
{
    if (!doc.is_object() || !doc.contains("format_version") || !doc["format_version"].is_number_integer())
        throw CorruptModel("model file lacks an integer format_version");
    const int version = doc["format_version"].get<int>();
    if (version != kFormatVersion)
        throw VersionError("model format_version " + std::to_string(version) + " is not supported (expected " +
                           std::to_string(kFormatVersion) + ")");
    if (!doc.contains("checksum") || !doc["checksum"].is_string() ||
        doc["checksum"].get<std::string>() != checksum_of(doc))
        throw CorruptModel("model checksum mismatch");

    ModelBundle b;
    try {
        b.format_version = version;
        b.model.model_id = doc.at("model_id").get<std::string>();
        b.model.kind = ml::kind_from_string(doc.at("kind").get<std::string>());
        b.model.vocab = Vocabulary(doc.at("vocabulary").get<std::vector<std::string>>());
        if (b.model.vocab.content_hash() != doc.at("vocab_hash").get<std::string>())
            throw CorruptModel("vocabulary hash mismatch");
        b.model.params = params_from_json(b.model.kind, doc.at("parameters"));
        const auto& meta = doc.at("metadata");
        b.metadata.seed = meta.at("seed").get<std::uint64_t>();
        b.metadata.corpus_hash = meta.at("corpus_hash").get<std::string>();
        if (meta.contains("report") && !meta["report"].is_null()) b.metadata.report = report_from_json(meta["report"]);
    } catch (const Json::exception& e) {
        throw CorruptModel(std::string("malformed model document: ") + e.what());
    } catch (const ConfigError& e) {
        throw CorruptModel(e.what());
    }
    try {
        b.model.validate();
    } catch (const ModelError& e) {
        throw CorruptModel(e.what());
    }
    return b;
}

void save_model(const ModelBundle& bundle, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << bundle_to_json(bundle).dump(2) << '\n';
    if (!out.flush()) throw Error("write to " + path.string() + " failed");
}

ModelBundle load_model(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ModelError("cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    Json doc;
    try {
        doc = Json::parse(buf.str());
    } catch (const Json::exception& e) {
        throw CorruptModel(path.string() + ": " + e.what());
    }
    return bundle_from_json(doc);
}

RiskAssessment assess(const AppManifest& manifest, const ModelBundle& bundle, Tick at)
{
    bundle.model.validate();
    const auto x = features::extract(manifest, bundle.model.vocab);
    RiskAssessment a;
    a.app_id = manifest.app_id;
    a.score = bundle.model.predict_score(x);
    a.risk = risk_from_score(a.score);
    a.model_id = bundle.model.model_id;
    a.assessed_at = at;
    return a;
}

}  // namespace evaluator
}  // namespace mindpres

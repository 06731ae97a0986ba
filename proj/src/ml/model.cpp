#include <cmath>
#include <limits>
#include <sstream>

#include "mindpres/classifiers.hpp"
#include "mindpres/digest.hpp"
#include "mindpres/error.hpp"

namespace mindpres::ml {

std::string_view to_string(ModelKind kind)
{
    switch (kind) {
    case ModelKind::naive_bayes: return "naive_bayes";
    case ModelKind::svm_sdca: return "svm_sdca";
    case ModelKind::kmeans: return "kmeans";
    case ModelKind::boosted_stumps: return "boosted_stumps";
    }
    return "unknown";
}

ModelKind kind_from_string(std::string_view name)
{
    for (auto k : kAllKinds)
        if (to_string(k) == name) return k;
    throw ConfigError("unknown classifier kind '" + std::string(name) + "'");
}

Dataset make_dataset(const std::vector<CorpusEntry>& entries, const Vocabulary& vocab)
{
    Dataset d;
    d.vectors.reserve(entries.size());
    d.labels.reserve(entries.size());
    for (const auto& e : entries) {
        d.vectors.push_back(features::extract(e.manifest, vocab));
        d.labels.push_back(e.label.label);
    }
    return d;
}

namespace {

double logistic(double x)
{
    return 1.0 / (1.0 + std::exp(-x));
}

std::string derive_model_id(const Dataset& data, const Vocabulary& vocab, ModelKind kind,
                            const Hyperparams& hp, std::uint64_t seed)
{
    std::ostringstream material;
    material << to_string(kind) << '|' << seed << '|' << vocab.content_hash() << '|' << hp.svm_lambda << '|'
             << hp.svm_epochs << '|' << hp.kmeans_k << '|' << hp.kmeans_max_iterations << '|'
             << hp.kmeans_restarts << '|' << hp.boost_rounds << '|';
    for (std::size_t i = 0; i < data.size(); ++i) {
        material << static_cast<int>(data.labels[i]) << ':';
        for (auto b : data.vectors[i].bits) material << static_cast<int>(b);
        material << ';';
    }
    return std::string(to_string(kind)) + "-" + sha256_hex(material.str()).substr(0, 12);
}

}  // namespace

TrainedModel train(const Dataset& data, const Vocabulary& vocab, ModelKind kind, const Hyperparams& hp,
                   std::uint64_t seed)
{
    if (data.empty()) throw EmptyDataset("cannot train on an empty dataset");
    if (data.labels.size() != data.vectors.size()) throw ConfigError("vectors and labels differ in length");
    for (const auto& v : data.vectors)
        if (v.vocab_hash != vocab.content_hash() || v.bits.size() != vocab.size())
            throw VocabMismatch("training vector was encoded with a different vocabulary");

    const std::size_t dim = vocab.size();
    TrainedModel model;
    model.kind = kind;
    model.vocab = vocab;
    model.model_id = derive_model_id(data, vocab, kind, hp, seed);

    switch (kind) {
    case ModelKind::naive_bayes:
        model.params = train_naive_bayes(data, dim);
        break;
    case ModelKind::svm_sdca:
        model.params = train_sdca(data, dim, hp.svm_lambda, hp.svm_epochs, seed).params;
        break;
    case ModelKind::kmeans: {
        std::vector<std::vector<double>> points;
        points.reserve(data.size());
        for (const auto& v : data.vectors) points.emplace_back(v.bits.begin(), v.bits.end());
        auto fit = lloyd(points, hp.kmeans_k, seed, hp.kmeans_max_iterations, hp.kmeans_restarts);
        KMeansParams p;
        p.centroids = std::move(fit.centroids);
        std::vector<double> mal(hp.kmeans_k, 0.0), count(hp.kmeans_k, 0.0);
        for (std::size_t i = 0; i < data.size(); ++i) {
            count[fit.assignment[i]] += 1.0;
            if (data.labels[i] == Label::malicious) mal[fit.assignment[i]] += 1.0;
        }
        for (std::size_t c = 0; c < hp.kmeans_k; ++c)
            p.malicious_fraction.push_back(count[c] > 0.0 ? mal[c] / count[c] : 0.5);
        model.params = std::move(p);
        break;
    }
    case ModelKind::boosted_stumps:
        model.params = train_boosted_stumps(data, dim, hp.boost_rounds);
        break;
    }
    return model;
}

double TrainedModel::predict_score(const FeatureVector& x) const
{
    if (x.vocab_hash != vocab.content_hash() || x.bits.size() != vocab.size())
        throw VocabMismatch("feature vector does not match the model vocabulary");
    const auto& bits = x.bits;

    if (const auto* nb = std::get_if<NaiveBayesParams>(&params)) {
        double log_joint[2];
        for (int c = 0; c < 2; ++c) {
            log_joint[c] = nb->log_prior[c];
            for (std::size_t f = 0; f < bits.size(); ++f)
                log_joint[c] += bits[f] ? nb->log_present[c][f] : nb->log_absent[c][f];
        }
        return logistic(log_joint[1] - log_joint[0]);
    }
    if (const auto* svm = std::get_if<LinearSvmParams>(&params)) {
        double margin = svm->bias;
        for (std::size_t f = 0; f < bits.size(); ++f)
            if (bits[f]) margin += svm->weights[f];
        return logistic(margin);
    }
    if (const auto* km = std::get_if<KMeansParams>(&params)) {
        std::size_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < km->centroids.size(); ++c) {
            double d = 0.0;
            for (std::size_t f = 0; f < bits.size(); ++f) {
                const double diff = km->centroids[c][f] - bits[f];
                d += diff * diff;
            }
            if (d < best_d) {
                best_d = d;
                best = c;
            }
        }
        return km->malicious_fraction[best];
    }
    const auto& ens = std::get<StumpEnsembleParams>(params);
    double votes = 0.0;
    for (const auto& s : ens.stumps) {
        const bool fires = bits[s.feature] == (s.polarity > 0 ? 1 : 0);
        votes += fires ? s.vote : -s.vote;
    }
    return logistic(votes);
}

void TrainedModel::validate() const
{
    const std::size_t dim = vocab.size();
    auto fail = [this](const std::string& why) { throw ModelError("model " + model_id + ": " + why); };
    auto finite = [](double v) { return std::isfinite(v); };

    switch (kind) {
    case ModelKind::naive_bayes: {
        const auto* nb = std::get_if<NaiveBayesParams>(&params);
        if (!nb) fail("parameters do not match kind naive_bayes");
        for (int c = 0; c < 2; ++c) {
            if (!finite(nb->log_prior[c]) || nb->log_prior[c] > 0.0) fail("invalid class prior");
            if (nb->log_present[c].size() != dim || nb->log_absent[c].size() != dim)
                fail("likelihood table does not match vocabulary size");
            for (std::size_t f = 0; f < dim; ++f) {
                const double p1 = std::exp(nb->log_present[c][f]);
                const double p0 = std::exp(nb->log_absent[c][f]);
                if (!(p1 > 0.0 && p1 < 1.0 && p0 > 0.0 && p0 < 1.0)) fail("likelihood outside (0,1)");
            }
        }
        break;
    }
    case ModelKind::svm_sdca: {
        const auto* svm = std::get_if<LinearSvmParams>(&params);
        if (!svm) fail("parameters do not match kind svm_sdca");
        if (svm->weights.size() != dim) fail("weight vector does not match vocabulary size");
        if (!finite(svm->bias) || !std::all_of(svm->weights.begin(), svm->weights.end(), finite))
            fail("non-finite weight");
        break;
    }
    case ModelKind::kmeans: {
        const auto* km = std::get_if<KMeansParams>(&params);
        if (!km) fail("parameters do not match kind kmeans");
        if (km->centroids.empty() || km->centroids.size() != km->malicious_fraction.size())
            fail("centroid table is inconsistent");
        for (const auto& c : km->centroids)
            if (c.size() != dim || !std::all_of(c.begin(), c.end(), finite))
                fail("centroid does not match vocabulary size");
        for (double m : km->malicious_fraction)
            if (!(m >= 0.0 && m <= 1.0)) fail("cluster malicious fraction outside [0,1]");
        break;
    }
    case ModelKind::boosted_stumps: {
        const auto* ens = std::get_if<StumpEnsembleParams>(&params);
        if (!ens) fail("parameters do not match kind boosted_stumps");
        for (const auto& s : ens->stumps)
            if (s.feature >= dim || (s.polarity != 1 && s.polarity != -1) || !finite(s.vote))
                fail("invalid stump");
        break;
    }
    }
}

}  // namespace mindpres::ml

#include "mindpres/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "mindpres/digest.hpp"
#include "mindpres/error.hpp"
#include "mindpres/rng.hpp"

namespace mindpres {

std::string_view to_string(Label label)
{
    return label == Label::malicious ? "malicious" : "benign";
}

Label label_from_string(std::string_view s)
{
    if (s == "benign") return Label::benign;
    if (s == "malicious") return Label::malicious;
    throw Error("unknown label '" + std::string(s) + "'");
}

bool is_valid_token(std::string_view token)
{
    if (token.empty()) return false;
    return std::none_of(token.begin(), token.end(),
                        [](unsigned char c) { return std::isspace(c) != 0; });
}

void validate_manifest(const AppManifest& manifest)
{
    if (manifest.app_id.empty()) throw IntegrityError("manifest has empty app_id");
    for (const auto* set : {&manifest.permissions, &manifest.intents, &manifest.hardware_features})
        for (const auto& token : *set)
            if (!is_valid_token(token))
                throw IntegrityError("app " + manifest.app_id + ": invalid token '" + token + "'");
}

namespace {

std::set<std::string> token_set(const Json& j, const char* key)
{
    const auto it = j.find(key);
    if (it == j.end()) return {};
    if (!it->is_array()) throw Error(std::string("'") + key + "' must be an array");
    std::set<std::string> out;
    for (const auto& t : *it) {
        if (!t.is_string()) throw Error(std::string("'") + key + "' must contain strings");
        auto token = t.get<std::string>();
        if (!is_valid_token(token)) throw Error("invalid token '" + token + "'");
        if (!out.insert(std::move(token)).second)
            throw Error(std::string("duplicate token in '") + key + "'");
    }
    return out;
}

std::string required_string(const Json& j, const char* key)
{
    const auto it = j.find(key);
    if (it == j.end() || !it->is_string()) throw Error(std::string("missing string '") + key + "'");
    return it->get<std::string>();
}

}  // namespace

Json manifest_to_json(const AppManifest& m)
{
    Json j;
    j["app_id"] = m.app_id;
    j["package_name"] = m.package_name;
    j["permissions"] = m.permissions;
    j["intents"] = m.intents;
    j["hardware_features"] = m.hardware_features;
    return j;
}

AppManifest manifest_from_json(const Json& j)
{
    if (!j.is_object()) throw Error("manifest must be an object");
    AppManifest m;
    m.app_id = required_string(j, "app_id");
    if (m.app_id.empty()) throw Error("empty app_id");
    if (j.contains("package_name")) m.package_name = required_string(j, "package_name");
    m.permissions = token_set(j, "permissions");
    m.intents = token_set(j, "intents");
    m.hardware_features = token_set(j, "hardware_features");
    return m;
}

namespace corpus {

GenerationProfile GenerationProfile::standard()
{
    GenerationProfile p;
    auto add = [&p](std::string token, TokenKind kind, double prob, bool dangerous = false) {
        p.tokens.push_back({std::move(token), kind, prob, dangerous});
    };

    const std::string perm = "android.permission.";
    for (const char* name : {"SEND_SMS", "RECEIVE_SMS", "READ_SMS", "READ_CONTACTS", "READ_CALL_LOG",
                             "READ_PHONE_STATE", "CALL_PHONE", "RECORD_AUDIO", "INSTALL_PACKAGES",
                             "WRITE_SETTINGS", "RECEIVE_BOOT_COMPLETED", "SYSTEM_ALERT_WINDOW"})
        add(perm + name, TokenKind::permission, 0.15, true);
    add(perm + "INTERNET", TokenKind::permission, 0.9);
    add(perm + "ACCESS_NETWORK_STATE", TokenKind::permission, 0.7);
    add(perm + "ACCESS_WIFI_STATE", TokenKind::permission, 0.4);
    add(perm + "READ_EXTERNAL_STORAGE", TokenKind::permission, 0.35);
    add(perm + "WRITE_EXTERNAL_STORAGE", TokenKind::permission, 0.35);
    add(perm + "VIBRATE", TokenKind::permission, 0.35);
    add(perm + "WAKE_LOCK", TokenKind::permission, 0.3);
    for (const char* name : {"CAMERA", "ACCESS_FINE_LOCATION", "ACCESS_COARSE_LOCATION", "BLUETOOTH",
                             "BLUETOOTH_ADMIN", "NFC", "FOREGROUND_SERVICE", "GET_ACCOUNTS",
                             "USE_BIOMETRIC", "POST_NOTIFICATIONS", "CHANGE_WIFI_STATE",
                             "MODIFY_AUDIO_SETTINGS", "READ_CALENDAR", "WRITE_CALENDAR", "BODY_SENSORS",
                             "ACTIVITY_RECOGNITION", "SET_WALLPAPER", "REQUEST_INSTALL_PACKAGES",
                             "SCHEDULE_EXACT_ALARM", "ACCESS_MEDIA_LOCATION", "USE_FULL_SCREEN_INTENT"})
        add(perm + name, TokenKind::permission, 0.15);

    add("android.intent.action.BOOT_COMPLETED", TokenKind::intent, 0.15, true);
    add("android.provider.Telephony.SMS_RECEIVED", TokenKind::intent, 0.15, true);
    add("android.intent.action.NEW_OUTGOING_CALL", TokenKind::intent, 0.15, true);
    add("android.intent.action.PACKAGE_ADDED", TokenKind::intent, 0.15, true);
    add("android.intent.action.MAIN", TokenKind::intent, 0.95);
    add("android.intent.action.VIEW", TokenKind::intent, 0.5);
    add("android.intent.action.SEND", TokenKind::intent, 0.3);
    for (const char* name : {"SEARCH", "USER_PRESENT", "BATTERY_LOW", "SCREEN_ON", "TIMEZONE_CHANGED",
                             "LOCALE_CHANGED", "MEDIA_MOUNTED"})
        add(std::string("android.intent.action.") + name, TokenKind::intent, 0.15);
    add("android.net.conn.CONNECTIVITY_CHANGE", TokenKind::intent, 0.2);

    add("android.hardware.touchscreen", TokenKind::hardware, 0.6);
    add("android.hardware.wifi", TokenKind::hardware, 0.3);
    for (const char* name : {"camera", "camera.autofocus", "location.gps", "telephony", "bluetooth", "nfc",
                             "microphone", "sensor.accelerometer"})
        add(std::string("android.hardware.") + name, TokenKind::hardware, 0.15);
    return p;
}

double GenerationProfile::probability(const TokenSpec& spec, Label label) const
{
    if (label == Label::malicious && spec.dangerous)
        return std::min(1.0, spec.benign_probability * separation);
    return spec.benign_probability;
}

namespace {

void validate_profile(const GenerationProfile& profile)
{
    for (const auto& spec : profile.tokens) {
        if (!(spec.benign_probability >= 0.0 && spec.benign_probability <= 1.0))
            throw ProfileError("probability of '" + spec.token + "' outside [0,1]");
        if (!is_valid_token(spec.token)) throw ProfileError("invalid token '" + spec.token + "'");
    }
    if (!(profile.separation >= 0.0) || !std::isfinite(profile.separation))
        throw ProfileError("separation must be a finite non-negative factor");
}

constexpr const char* kFamilies[] = {"smsfraud", "spyware", "dropper", "banker"};

}  // namespace

Corpus generate(std::uint64_t seed, std::size_t n_benign, std::size_t n_malicious,
                const GenerationProfile& profile)
{
    validate_profile(profile);
    Rng rng(seed);

    std::vector<Label> labels(n_benign, Label::benign);
    labels.insert(labels.end(), n_malicious, Label::malicious);
    rng.shuffle(labels);

    Corpus corpus;
    corpus.entries.reserve(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        char id[32];
        std::snprintf(id, sizeof id, "app-%05zu", i);
        CorpusEntry entry;
        entry.manifest.app_id = id;
        entry.manifest.package_name = "com.synth.app" + std::to_string(i);
        for (const auto& spec : profile.tokens) {
            if (!rng.bernoulli(profile.probability(spec, labels[i]))) continue;
            switch (spec.kind) {
            case TokenKind::permission: entry.manifest.permissions.insert(spec.token); break;
            case TokenKind::intent: entry.manifest.intents.insert(spec.token); break;
            case TokenKind::hardware: entry.manifest.hardware_features.insert(spec.token); break;
            }
        }
        entry.label.app_id = id;
        entry.label.label = labels[i];
        if (labels[i] == Label::malicious) entry.label.family = kFamilies[rng.below(std::size(kFamilies))];
        corpus.entries.push_back(std::move(entry));
    }
    return corpus;
}

DataSplit split(const Corpus& corpus, double train_fraction, std::uint64_t seed)
{
    if (corpus.empty()) throw EmptyCorpus("cannot split an empty corpus");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw ConfigError("train fraction must lie strictly between 0 and 1");

    std::vector<std::size_t> by_class[2];
    for (std::size_t i = 0; i < corpus.entries.size(); ++i)
        by_class[static_cast<int>(corpus.entries[i].label.label)].push_back(i);
    if (by_class[0].empty() || by_class[1].empty())
        throw InsufficientClasses("split needs both benign and malicious entries");

    Rng rng(seed);
    std::vector<bool> in_train(corpus.entries.size(), false);
    for (auto& members : by_class) {
        rng.shuffle(members);
        const auto n_train = static_cast<std::size_t>(std::lround(train_fraction * members.size()));
        for (std::size_t i = 0; i < n_train; ++i) in_train[members[i]] = true;
    }

    DataSplit out;
    for (std::size_t i = 0; i < corpus.entries.size(); ++i)
        (in_train[i] ? out.train_ids : out.test_ids).push_back(corpus.entries[i].manifest.app_id);
    return out;
}

std::string to_jsonl(const Corpus& corpus)
{
    std::string out;
    for (const auto& e : corpus.entries) {
        Json label;
        label["label"] = to_string(e.label.label);
        label["family"] = e.label.family ? Json(*e.label.family) : Json(nullptr);
        Json line;
        line["manifest"] = manifest_to_json(e.manifest);
        line["label"] = std::move(label);
        out += line.dump();
        out.push_back('\n');
    }
    return out;
}

Corpus parse_jsonl(std::istream& in)
{
    Corpus corpus;
    std::unordered_set<std::string> seen;
    std::string text;
    std::size_t line_no = 0;
    while (std::getline(in, text)) {
        ++line_no;
        if (text.empty()) continue;
        CorpusEntry entry;
        try {
            const Json j = Json::parse(text);
            if (!j.is_object()) throw Error("entry must be an object");
            entry.manifest = manifest_from_json(j.at("manifest"));
            const Json& label = j.at("label");
            entry.label.app_id = entry.manifest.app_id;
            entry.label.label = label_from_string(label.at("label").get<std::string>());
            if (label.contains("family") && !label.at("family").is_null())
                entry.label.family = label.at("family").get<std::string>();
        } catch (const Json::exception& e) {
            throw ParseError(line_no, e.what());
        } catch (const Error& e) {
            throw ParseError(line_no, e.what());
        }
        if (!seen.insert(entry.manifest.app_id).second)
            throw IntegrityError("duplicate app_id '" + entry.manifest.app_id + "' at line " +
                                 std::to_string(line_no));
        corpus.entries.push_back(std::move(entry));
    }
    return corpus;
}

void save(const Corpus& corpus, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << to_jsonl(corpus);
    if (!out.flush()) throw Error("write to " + path.string() + " failed");
}

Corpus load(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    return parse_jsonl(in);
}

std::string content_hash(const Corpus& corpus)
{
    return sha256_hex(to_jsonl(corpus));
}

std::vector<CorpusEntry> select(const Corpus& corpus, const std::vector<std::string>& ids)
{
    std::unordered_map<std::string_view, const CorpusEntry*> index;
    for (const auto& e : corpus.entries) index.emplace(e.manifest.app_id, &e);
    std::vector<CorpusEntry> out;
    out.reserve(ids.size());
    for (const auto& id : ids) {
        const auto it = index.find(id);
        if (it == index.end()) throw IntegrityError("unknown app_id '" + id + "'");
        out.push_back(*it->second);
    }
    return out;
}

}  // namespace corpus
}  // namespace mindpres

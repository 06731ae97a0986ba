#include "mindpres/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "mindpres/error.hpp"

namespace mindpres::sim {

std::string_view to_string(AttackKind kind)
{
    switch (kind) {
    case AttackKind::exfiltration: return "exfiltration";
    case AttackKind::beacon: return "beacon";
    case AttackKind::root_abuse: return "root_abuse";
    }
    return "exfiltration";
}

AttackKind attack_kind_from_string(std::string_view s)
{
    if (s == "exfiltration") return AttackKind::exfiltration;
    if (s == "beacon") return AttackKind::beacon;
    if (s == "root_abuse") return AttackKind::root_abuse;
    throw ScenarioError("unknown attack kind '" + std::string(s) + "'");
}

void Scenario::validate() const
{
    Tick covered = 0;
    for (const auto& span : device_schedule) {
        if (span.start != covered)
            throw ScenarioError("device schedule has a gap or overlap at tick " + std::to_string(covered));
        if (span.end <= span.start) throw ScenarioError("device schedule span must be non-empty");
        covered = span.end;
    }
    if (covered != duration) throw ScenarioError("device schedule must cover [0, duration) exactly");
    if (!(tick_len > 0.0)) throw ScenarioError("tick_len must be positive");
    if (reassess_interval && *reassess_interval == 0) throw ScenarioError("reassess_interval must be positive");
    if (hids.window_len == 0 || nids.window_len == 0) throw ScenarioError("window_len must be positive");

    std::set<std::string> ids;
    for (const auto& app : apps) {
        try {
            validate_manifest(app.manifest);
        } catch (const Error& e) {
            throw ScenarioError(e.what());
        }
        if (!ids.insert(app.manifest.app_id).second)
            throw ScenarioError("duplicate app_id '" + app.manifest.app_id + "'");
        const auto& b = app.behavior;
        if (b.cpu_sigma < 0 || b.mem_sigma < 0 || b.flows_per_window < 0 || b.bytes_up_mean < 0 ||
            b.bytes_down_mean < 0 || b.bytes_up_sigma < 0 || b.bytes_down_sigma < 0)
            throw ScenarioError("app " + app.manifest.app_id + ": behaviour parameters must be non-negative");
        if (app.attack) {
            if (app.attack->start_tick >= duration)
                throw ScenarioError("app " + app.manifest.app_id + ": attack starts after the scenario ends");
            if (app.attack->kind == AttackKind::beacon && app.attack->period == 0)
                throw ScenarioError("beacon period must be positive");
            if (app.attack->kind == AttackKind::exfiltration && !(app.attack->ratio > 0.0))
                throw ScenarioError("exfiltration ratio must be positive");
        }
    }
}

DeviceState Scenario::state_at(Tick t) const
{
    for (const auto& span : device_schedule)
        if (t >= span.start && t < span.end) return span.state;
    throw ScenarioError("tick " + std::to_string(t) + " outside the device schedule");
}

namespace {

Json behavior_to_json(const BehaviorProfile& b)
{
    Json j;
    j["cpu_mean"] = b.cpu_mean;
    j["cpu_sigma"] = b.cpu_sigma;
    j["mem_mean"] = b.mem_mean;
    j["mem_sigma"] = b.mem_sigma;
    j["flows_per_window"] = b.flows_per_window;
    j["bytes_up_mean"] = b.bytes_up_mean;
    j["bytes_up_sigma"] = b.bytes_up_sigma;
    j["bytes_down_mean"] = b.bytes_down_mean;
    j["bytes_down_sigma"] = b.bytes_down_sigma;
    j["host_pool"] = b.host_pool;
    return j;
}

BehaviorProfile behavior_from_json(const Json& j)
{
    BehaviorProfile b;
    b.cpu_mean = j.value("cpu_mean", b.cpu_mean);
    b.cpu_sigma = j.value("cpu_sigma", b.cpu_sigma);
    b.mem_mean = j.value("mem_mean", b.mem_mean);
    b.mem_sigma = j.value("mem_sigma", b.mem_sigma);
    b.flows_per_window = j.value("flows_per_window", b.flows_per_window);
    b.bytes_up_mean = j.value("bytes_up_mean", b.bytes_up_mean);
    b.bytes_up_sigma = j.value("bytes_up_sigma", b.bytes_up_sigma);
    b.bytes_down_mean = j.value("bytes_down_mean", b.bytes_down_mean);
    b.bytes_down_sigma = j.value("bytes_down_sigma", b.bytes_down_sigma);
    b.host_pool = j.value("host_pool", std::vector<std::string>{});
    return b;
}

Json attack_to_json(const AttackSpec& a)
{
    Json params;
    switch (a.kind) {
    case AttackKind::exfiltration:
        params["burst_bytes"] = a.burst_bytes;
        params["ratio"] = a.ratio;
        params["host"] = a.host;
        break;
    case AttackKind::beacon:
        params["period"] = a.period;
        params["bytes_up"] = a.beacon_up;
        params["bytes_down"] = a.beacon_down;
        params["host"] = a.host;
        break;
    case AttackKind::root_abuse: params["apis"] = a.apis; break;
    }
    Json j;
    j["kind"] = to_string(a.kind);
    j["start_tick"] = a.start_tick;
    j["params"] = std::move(params);
    return j;
}

AttackSpec attack_from_json(const Json& j)
{
    AttackSpec a;
    a.kind = attack_kind_from_string(j.at("kind").get<std::string>());
    a.start_tick = j.at("start_tick").get<Tick>();
    const Json params = j.value("params", Json::object());
    a.host = params.value("host", a.host);
    a.burst_bytes = params.value("burst_bytes", a.burst_bytes);
    a.ratio = params.value("ratio", a.ratio);
    a.period = params.value("period", a.period);
    a.beacon_up = params.value("bytes_up", a.beacon_up);
    a.beacon_down = params.value("bytes_down", a.beacon_down);
    a.apis = params.value("apis", a.apis);
    return a;
}

Json hids_config_to_json(const hids::HidsConfig& c)
{
    Json weights;
    for (const auto& [api, w] : c.api_weights) {
        ApiCallEvent e{0, "", api, "other"};
        weights[e.api_name()] = w;
    }
    Json j;
    j["window_len"] = c.window_len;
    j["alpha"] = c.alpha;
    j["cpu_sigma_min"] = c.cpu_sigma_min;
    j["mem_sigma_min"] = c.mem_sigma_min;
    j["warmup_windows"] = c.warmup_windows;
    j["z_active"] = c.z_active;
    j["z_idle"] = c.z_idle;
    j["api_threshold"] = c.api_threshold;
    j["api_weights"] = std::move(weights);
    return j;
}

Json nids_config_to_json(const nids::NidsConfig& c)
{
    Json j;
    j["window_len"] = c.window_len;
    j["alpha"] = c.alpha;
    j["up_sigma_min"] = c.up_sigma_min;
    j["warmup_windows"] = c.warmup_windows;
    j["z_active"] = c.z_active;
    j["z_idle"] = c.z_idle;
    j["exfil_ratio"] = c.exfil_ratio;
    j["exfil_min_up"] = c.exfil_min_up;
    j["new_host_min"] = c.new_host_min;
    return j;
}

}  // namespace

Json Scenario::to_json() const
{
    Json j;
    j["seed"] = seed;
    j["duration"] = duration;
    j["tick_len"] = tick_len;
    Json schedule = Json::array();
    for (const auto& s : device_schedule)
        schedule.push_back({{"start", s.start}, {"end", s.end}, {"state", to_string(s.state)}});
    j["device_schedule"] = std::move(schedule);
    j["reassess_interval"] = reassess_interval ? Json(*reassess_interval) : Json(nullptr);
    j["detector"] = {{"hids", hids_config_to_json(hids)}, {"nids", nids_config_to_json(nids)}};
    Json apps_json = Json::array();
    for (const auto& app : apps) {
        Json a;
        a["manifest"] = manifest_to_json(app.manifest);
        a["install_tick"] = app.install_tick;
        a["behavior"] = behavior_to_json(app.behavior);
        a["attack"] = app.attack ? attack_to_json(*app.attack) : Json(nullptr);
        apps_json.push_back(std::move(a));
    }
    j["apps"] = std::move(apps_json);
    return j;
}

Scenario Scenario::from_json(const Json& j)
{
    Scenario s;
    try {
        s.seed = j.at("seed").get<std::uint64_t>();
        s.duration = j.at("duration").get<Tick>();
        s.tick_len = j.value("tick_len", 1.0);
        for (const auto& span : j.at("device_schedule"))
            s.device_schedule.push_back({span.at("start").get<Tick>(), span.at("end").get<Tick>(),
                                         device_state_from_string(span.at("state").get<std::string>())});
        if (j.contains("reassess_interval") && !j["reassess_interval"].is_null())
            s.reassess_interval = j["reassess_interval"].get<Tick>();
        if (j.contains("detector")) {
            const auto& d = j["detector"];
            if (d.contains("hids")) s.hids = hids::HidsConfig::from_json(d["hids"]);
            if (d.contains("nids")) s.nids = nids::NidsConfig::from_json(d["nids"]);
        }
        for (const auto& a : j.at("apps")) {
            ScenarioApp app;
            app.manifest = manifest_from_json(a.at("manifest"));
            app.install_tick = a.value("install_tick", Tick{0});
            if (a.contains("behavior")) app.behavior = behavior_from_json(a["behavior"]);
            if (a.contains("attack") && !a["attack"].is_null()) app.attack = attack_from_json(a["attack"]);
            s.apps.push_back(std::move(app));
        }
    } catch (const Json::exception& e) {
        throw ScenarioError(std::string("malformed scenario: ") + e.what());
    } catch (const ScenarioError&) {
        throw;
    } catch (const Error& e) {
        throw ScenarioError(std::string("malformed scenario: ") + e.what());
    }
    s.validate();
    return s;
}

Scenario Scenario::load(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ScenarioError("cannot open scenario " + path.string());
    Json j;
    try {
        j = Json::parse(in);
    } catch (const Json::exception& e) {
        throw ScenarioError(path.string() + ": " + e.what());
    }
    return from_json(j);
}

std::string attack_host(const AttackSpec& attack, const std::string& app_id)
{
    if (!attack.host.empty()) return attack.host;
    return std::string(to_string(attack.kind)) + "." + app_id + ".attacker.test";
}

std::vector<TelemetryEvent> attack_events(const AttackSpec& attack, const std::string& app_id, Tick t,
                                          Tick window_len)
{
    std::vector<TelemetryEvent> out;
    if (t < attack.start_tick) return out;
    const Tick since = t - attack.start_tick;
    switch (attack.kind) {
    case AttackKind::exfiltration:
        if (window_len > 0 && since % window_len == 0) {
            FlowRecord f;
            f.tick = t;
            f.app_id = app_id;
            f.dst_host = attack_host(attack, app_id);
            f.url = "https://" + f.dst_host + "/upload";
            f.up_bytes = attack.burst_bytes;
            f.down_bytes = static_cast<std::uint64_t>(std::llround(static_cast<double>(attack.burst_bytes) / attack.ratio));
            out.emplace_back(std::move(f));
        }
        break;
    case AttackKind::beacon:
        if (since % attack.period == 0) {
            FlowRecord f;
            f.tick = t;
            f.app_id = app_id;
            f.dst_host = attack_host(attack, app_id);
            f.url = "https://" + f.dst_host + "/ping";
            f.up_bytes = attack.beacon_up;
            f.down_bytes = attack.beacon_down;
            out.emplace_back(std::move(f));
        }
        break;
    case AttackKind::root_abuse:
        if (since == 0)
            for (const auto& api : attack.apis) out.emplace_back(make_api_call(t, app_id, api));
        break;
    }
    return out;
}

std::vector<TelemetryEvent> benign_events(const BehaviorProfile& b, const std::string& app_id, Tick t,
                                          Tick window_len, Rng& rng)
{
    std::vector<TelemetryEvent> out;
    ResourceSample s;
    s.tick = t;
    s.app_id = app_id;
    s.cpu_pct = std::clamp(rng.normal(b.cpu_mean, b.cpu_sigma), 0.0, 100.0);
    s.mem_mb = std::max(0.0, rng.normal(b.mem_mean, b.mem_sigma));
    out.emplace_back(std::move(s));

    const double rate = window_len ? b.flows_per_window / static_cast<double>(window_len) : 0.0;
    const auto n_flows = rng.poisson(rate);
    for (std::uint64_t i = 0; i < n_flows && !b.host_pool.empty(); ++i) {
        FlowRecord f;
        f.tick = t;
        f.app_id = app_id;
        f.dst_host = b.host_pool[rng.below(b.host_pool.size())];
        f.url = "https://" + f.dst_host + "/";
        f.up_bytes = static_cast<std::uint64_t>(std::llround(std::max(0.0, rng.normal(b.bytes_up_mean, b.bytes_up_sigma))));
        f.down_bytes =
            static_cast<std::uint64_t>(std::llround(std::max(0.0, rng.normal(b.bytes_down_mean, b.bytes_down_sigma))));
        out.emplace_back(std::move(f));
    }
    return out;
}

Scenario standard_scenario(std::optional<AttackKind> attack, std::uint64_t seed)
{
    Scenario s;
    s.seed = seed;
    s.duration = 400;
    s.device_schedule = {{0, 150, DeviceState::active}, {150, 250, DeviceState::idle}, {250, 400, DeviceState::active}};

    const char* benign_names[] = {"notes", "weather", "music", "maps", "news"};
    for (int i = 0; i < 5; ++i) {
        ScenarioApp app;
        app.manifest.app_id = std::string("benign-") + benign_names[i];
        app.manifest.package_name = std::string("com.example.") + benign_names[i];
        app.manifest.permissions = {"android.permission.INTERNET", "android.permission.ACCESS_NETWORK_STATE"};
        app.manifest.intents = {"android.intent.action.MAIN"};
        app.manifest.hardware_features = {"android.hardware.touchscreen"};
        app.behavior.cpu_mean = 3.0 + i;
        app.behavior.mem_mean = 80.0 + 20.0 * i;
        for (int h = 0; h < 3; ++h)
            app.behavior.host_pool.push_back("h" + std::to_string(h) + "." + benign_names[i] + ".example");
        s.apps.push_back(std::move(app));
    }

    if (attack) {
        ScenarioApp app;
        app.manifest.app_id = "suspect-" + std::string(to_string(*attack));
        app.manifest.package_name = "com.free.flashlight";
        app.manifest.permissions = {"android.permission.INTERNET",        "android.permission.SEND_SMS",
                                    "android.permission.READ_SMS",        "android.permission.RECEIVE_SMS",
                                    "android.permission.READ_CONTACTS",   "android.permission.READ_PHONE_STATE",
                                    "android.permission.INSTALL_PACKAGES", "android.permission.RECEIVE_BOOT_COMPLETED"};
        app.manifest.intents = {"android.intent.action.MAIN", "android.intent.action.BOOT_COMPLETED",
                                "android.provider.Telephony.SMS_RECEIVED"};
        app.behavior.cpu_mean = 4.0;
        app.behavior.mem_mean = 90.0;
        app.behavior.host_pool = {"cdn.flashlight.example", "ads.flashlight.example"};
        AttackSpec spec;
        spec.kind = *attack;
        switch (*attack) {
        case AttackKind::exfiltration: spec.start_tick = 100; break;
        case AttackKind::beacon: spec.start_tick = 155; break;
        case AttackKind::root_abuse: spec.start_tick = 120; break;
        }
        app.attack = spec;
        s.apps.push_back(std::move(app));
    }
    s.validate();
    return s;
}

}  // namespace mindpres::sim

#include "mindpres/telemetry.hpp"

#include <cmath>
#include <istream>

#include "mindpres/error.hpp"

namespace mindpres {

std::string_view to_string(DeviceState state)
{
    return state == DeviceState::idle ? "idle" : "active";
}

DeviceState device_state_from_string(std::string_view s)
{
    if (s == "active") return DeviceState::active;
    if (s == "idle") return DeviceState::idle;
    throw Error("unknown device state '" + std::string(s) + "'");
}

std::string_view to_string(IdsType type)
{
    switch (type) {
    case IdsType::host_based: return "HIDS";
    case IdsType::network_based: return "NIDS";
    case IdsType::hybrid: return "hybrid";
    }
    return "hybrid";
}

std::string_view to_string(DetectionMethod method)
{
    switch (method) {
    case DetectionMethod::signature_based: return "signature";
    case DetectionMethod::anomaly_based: return "anomaly";
    case DetectionMethod::hybrid: return "hybrid";
    }
    return "hybrid";
}

namespace {

struct ApiName {
    ApiKind kind;
    const char* name;
};

constexpr ApiName kApiNames[] = {
    {ApiKind::root_access, "root_access"}, {ApiKind::install_package, "install_package"},
    {ApiKind::send_sms, "send_sms"},       {ApiKind::read_contacts, "read_contacts"},
    {ApiKind::exec_shell, "exec_shell"},
};

}  // namespace

std::string ApiCallEvent::api_name() const
{
    for (const auto& n : kApiNames)
        if (n.kind == api) return n.name;
    return other_token.empty() ? "other" : other_token;
}

ApiCallEvent make_api_call(Tick tick, std::string app_id, std::string_view api)
{
    ApiCallEvent e{tick, std::move(app_id), ApiKind::other, {}};
    for (const auto& n : kApiNames)
        if (api == n.name) {
            e.api = n.kind;
            return e;
        }
    e.other_token = std::string(api);
    return e;
}

Tick tick_of(const TelemetryEvent& event)
{
    return std::visit([](const auto& e) { return e.tick; }, event);
}

const std::string& app_of(const TelemetryEvent& event)
{
    return std::visit([](const auto& e) -> const std::string& { return e.app_id; }, event);
}

Json telemetry_to_json(const TelemetryEvent& event)
{
    Json j;
    std::visit(
        [&j](const auto& e) {
            using T = std::decay_t<decltype(e)>;
            j["t"] = e.tick;
            j["app"] = e.app_id;
            if constexpr (std::is_same_v<T, ApiCallEvent>) {
                j["kind"] = "api";
                j["api"] = e.api_name();
            } else if constexpr (std::is_same_v<T, ResourceSample>) {
                j["kind"] = "res";
                j["cpu"] = e.cpu_pct;
                j["mem"] = e.mem_mb;
            } else {
                j["kind"] = "flow";
                j["host"] = e.dst_host;
                j["url"] = e.url ? Json(*e.url) : Json(nullptr);
                j["up"] = e.up_bytes;
                j["down"] = e.down_bytes;
            }
        },
        event);
    return j;
}

TelemetryEvent telemetry_from_json(const Json& j)
{
    try {
        const Tick t = j.at("t").get<Tick>();
        std::string app = j.at("app").get<std::string>();
        if (app.empty()) throw Error("empty app");
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "api") return make_api_call(t, std::move(app), j.at("api").get<std::string>());
        if (kind == "res") {
            ResourceSample s{t, std::move(app), j.at("cpu").get<double>(), j.at("mem").get<double>()};
            if (!(s.cpu_pct >= 0.0 && s.cpu_pct <= 100.0)) throw Error("cpu outside [0,100]");
            if (!(s.mem_mb >= 0.0) || !std::isfinite(s.mem_mb)) throw Error("mem must be non-negative");
            return s;
        }
        if (kind == "flow") {
            FlowRecord f;
            f.tick = t;
            f.app_id = std::move(app);
            f.dst_host = j.at("host").get<std::string>();
            if (f.dst_host.empty()) throw Error("empty host");
            if (j.contains("url") && !j["url"].is_null()) f.url = j["url"].get<std::string>();
            f.up_bytes = j.at("up").get<std::uint64_t>();
            f.down_bytes = j.at("down").get<std::uint64_t>();
            return f;
        }
        throw Error("unknown telemetry kind '" + kind + "'");
    } catch (const Json::exception& e) {
        throw Error(e.what());
    }
}

std::vector<TelemetryEvent> parse_telemetry_jsonl(std::istream& in)
{
    std::vector<TelemetryEvent> out;
    std::string text;
    std::size_t line_no = 0;
    while (std::getline(in, text)) {
        ++line_no;
        if (text.empty()) continue;
        try {
            out.push_back(telemetry_from_json(Json::parse(text)));
        } catch (const Json::exception& e) {
            throw ParseError(line_no, e.what());
        } catch (const Error& e) {
            throw ParseError(line_no, e.what());
        }
    }
    return out;
}

}  // namespace mindpres

#include "mindpres/prevention.hpp"

#include <poll.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <fstream>
#include <ostream>

#include "mindpres/error.hpp"

namespace mindpres::prevention {

const std::string& verdict_app(const Verdict& v)
{
    return std::visit([](const auto& x) -> const std::string& { return x.app_id; }, v);
}

Tick verdict_tick(const Verdict& v)
{
    return std::visit([](const auto& x) { return x.tick; }, v);
}

Tick verdict_first_evidence_tick(const Verdict& v)
{
    return std::visit([](const auto& x) { return x.first_evidence_tick(); }, v);
}

IdsType verdict_ids_type(const Verdict& v)
{
    return std::holds_alternative<hids::HidsVerdict>(v) ? IdsType::host_based : IdsType::network_based;
}

std::string verdict_rule(const Verdict& v)
{
    if (const auto* h = std::get_if<hids::HidsVerdict>(&v)) return std::string(hids::to_string(h->kind));
    return std::string(nids::to_string(std::get<nids::NidsVerdict>(v).rule));
}

Json verdict_to_json(const Verdict& v)
{
    Json j;
    j["ids"] = to_string(verdict_ids_type(v));
    if (const auto* h = std::get_if<hids::HidsVerdict>(&v)) {
        j["method"] = to_string(h->method());
        j["rule"] = hids::to_string(h->kind);
        j["tick"] = h->tick;
        j["app_id"] = h->app_id;
        j["score"] = h->score;
        j["threshold"] = h->threshold;
        j["state"] = to_string(h->state);
        if (!h->metric.empty()) j["metric"] = h->metric;
        Json samples = Json::array();
        for (const auto& s : h->samples) samples.push_back(telemetry_to_json(s));
        Json calls = Json::array();
        for (const auto& c : h->api_calls) calls.push_back(telemetry_to_json(c));
        j["samples"] = std::move(samples);
        j["api_calls"] = std::move(calls);
        return j;
    }
    const auto& n = std::get<nids::NidsVerdict>(v);
    j["method"] = to_string(n.method());
    j["rule"] = nids::to_string(n.rule);
    j["tick"] = n.tick;
    j["app_id"] = n.app_id;
    j["score"] = n.score;
    j["threshold"] = n.threshold;
    j["state"] = to_string(n.state);
    j["total_up"] = n.total_up;
    j["total_down"] = n.total_down;
    Json evidence = Json::array();
    for (const auto& h : n.evidence) {
        Json e;
        e["host"] = h.host;
        e["up"] = h.up_bytes;
        e["down"] = h.down_bytes;
        e["flows"] = h.flows;
        e["urls"] = h.urls;
        e["new"] = h.is_new;
        e["first_tick"] = h.first_tick;
        evidence.push_back(std::move(e));
    }
    j["evidence"] = std::move(evidence);
    return j;
}

Verdict verdict_from_json(const Json& j)
{
    const std::string ids = j.at("ids").get<std::string>();
    const std::string rule = j.at("rule").get<std::string>();
    if (ids == "HIDS") {
        hids::HidsVerdict h;
        h.kind = rule == "suspicious_api" ? hids::HidsVerdictKind::suspicious_api
                                          : hids::HidsVerdictKind::resource_anomaly;
        h.tick = j.at("tick").get<Tick>();
        h.app_id = j.at("app_id").get<std::string>();
        h.score = j.at("score").get<double>();
        h.threshold = j.at("threshold").get<double>();
        h.state = device_state_from_string(j.at("state").get<std::string>());
        h.metric = j.value("metric", "");
        for (const auto& s : j.at("samples")) h.samples.push_back(std::get<ResourceSample>(telemetry_from_json(s)));
        for (const auto& c : j.at("api_calls")) h.api_calls.push_back(std::get<ApiCallEvent>(telemetry_from_json(c)));
        return h;
    }
    nids::NidsVerdict n;
    if (rule == "upload_anomaly") n.rule = nids::NidsRule::upload_anomaly;
    else if (rule == "exfil_ratio") n.rule = nids::NidsRule::exfil_ratio;
    else if (rule == "new_host_idle") n.rule = nids::NidsRule::new_host_idle;
    else throw Error("unknown NIDS rule '" + rule + "'");
    n.tick = j.at("tick").get<Tick>();
    n.app_id = j.at("app_id").get<std::string>();
    n.score = j.at("score").get<double>();
    n.threshold = j.at("threshold").get<double>();
    n.state = device_state_from_string(j.at("state").get<std::string>());
    n.total_up = j.at("total_up").get<std::uint64_t>();
    n.total_down = j.at("total_down").get<std::uint64_t>();
    for (const auto& e : j.at("evidence")) {
        nids::HostTraffic h;
        h.host = e.at("host").get<std::string>();
        h.up_bytes = e.at("up").get<std::uint64_t>();
        h.down_bytes = e.at("down").get<std::uint64_t>();
        h.flows = e.at("flows").get<std::uint64_t>();
        h.urls = e.at("urls").get<std::vector<std::string>>();
        h.is_new = e.at("new").get<bool>();
        h.first_tick = e.at("first_tick").get<Tick>();
        n.evidence.push_back(std::move(h));
    }
    return n;
}

std::string_view to_string(ActionKind kind)
{
    switch (kind) {
    case ActionKind::terminate_app: return "terminate_app";
    case ActionKind::block_host: return "block_host";
    case ActionKind::notify_only: return "notify_only";
    }
    return "notify_only";
}

Json action_to_json(const PreventionAction& a)
{
    Json j;
    j["action"] = to_string(a.kind);
    j["target"] = a.target;
    j["app_id"] = a.app_id;
    j["tick"] = a.tick;
    j["verdict_seq"] = a.verdict_seq;
    return j;
}

PreventionAction action_from_json(const Json& j)
{
    PreventionAction a;
    const auto kind = j.at("action").get<std::string>();
    if (kind == "terminate_app") a.kind = ActionKind::terminate_app;
    else if (kind == "block_host") a.kind = ActionKind::block_host;
    else if (kind == "notify_only") a.kind = ActionKind::notify_only;
    else throw Error("unknown action '" + kind + "'");
    a.target = j.at("target").get<std::string>();
    a.app_id = j.at("app_id").get<std::string>();
    a.tick = j.at("tick").get<Tick>();
    a.verdict_seq = j.at("verdict_seq").get<std::uint64_t>();
    return a;
}

Json override_to_json(const OverrideDecision& o)
{
    Json j;
    j["app_id"] = o.app_id;
    j["decision"] = o.decision == OverrideChoice::allow ? "allow" : "enforce";
    j["tick"] = o.tick;
    j["actor"] = o.actor == OverrideActor::user_prompt ? "user_prompt" : "policy_file";
    return j;
}

OverrideDecision override_from_json(const Json& j)
{
    OverrideDecision o;
    o.app_id = j.at("app_id").get<std::string>();
    if (o.app_id.empty()) throw Error("override without app_id");
    const auto decision = j.at("decision").get<std::string>();
    if (decision == "allow") o.decision = OverrideChoice::allow;
    else if (decision == "enforce") o.decision = OverrideChoice::enforce;
    else throw Error("override decision must be allow or enforce");
    o.tick = j.value("tick", Tick{0});
    const auto actor = j.value("actor", std::string("policy_file"));
    if (actor == "user_prompt") o.actor = OverrideActor::user_prompt;
    else if (actor == "policy_file") o.actor = OverrideActor::policy_file;
    else throw Error("unknown override actor '" + actor + "'");
    return o;
}

std::vector<OverrideDecision> load_policy_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open policy file " + path.string());
    try {
        const Json doc = Json::parse(in);
        if (!doc.is_array()) throw ConfigError("policy file must hold a JSON array");
        std::vector<OverrideDecision> out;
        for (const auto& item : doc) out.push_back(override_from_json(item));
        return out;
    } catch (const Json::exception& e) {
        throw ConfigError("policy file " + path.string() + ": " + e.what());
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError("policy file " + path.string() + ": " + e.what());
    }
}

const OverrideDecision* OverrideTable::find(const std::string& app_id) const
{
    const auto it = latest_.find(app_id);
    return it == latest_.end() ? nullptr : &it->second;
}

bool OverrideTable::allows(const std::string& app_id) const
{
    const auto* o = find(app_id);
    return o && o->decision == OverrideChoice::allow;
}

std::string_view to_string(PolicyMode mode)
{
    return mode == PolicyMode::interactive ? "interactive" : "auto";
}

PolicyMode policy_mode_from_string(std::string_view s)
{
    if (s == "auto") return PolicyMode::automatic;
    if (s == "interactive") return PolicyMode::interactive;
    throw ConfigError("policy mode must be auto or interactive");
}

std::string ConsolePrompter::read_line_with_timeout()
{
    const auto deadline = std::chrono::steady_clock::now() + timeout_;
    for (;;) {
        const auto nl = pending_.find('\n');
        if (nl != std::string::npos) {
            std::string line = pending_.substr(0, nl);
            pending_.erase(0, nl + 1);
            return line;
        }
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (left.count() <= 0) return {};
        pollfd pfd{fd_, POLLIN, 0};
        const int ready = ::poll(&pfd, 1, static_cast<int>(left.count()));
        if (ready < 0 && errno == EINTR) continue;
        if (ready <= 0) return {};
        char buf[256];
        const ssize_t n = ::read(fd_, buf, sizeof buf);
        if (n <= 0) {
            std::string rest;
            rest.swap(pending_);
            return rest;
        }
        pending_.append(buf, static_cast<std::size_t>(n));
    }
}

OverrideChoice ConsolePrompter::ask(const Verdict& verdict)
{
    out_ << "[mindpres] " << to_string(verdict_ids_type(verdict)) << " " << verdict_rule(verdict) << " verdict for app "
         << verdict_app(verdict) << " at tick " << verdict_tick(verdict) << ": allow or enforce? " << std::flush;
    std::string answer = read_line_with_timeout();
    while (!answer.empty() && (answer.back() == '\r' || answer.back() == ' ')) answer.pop_back();
    if (answer == "allow") return OverrideChoice::allow;
    return OverrideChoice::enforce;
}

std::string offending_host(const nids::NidsVerdict& v)
{
    if (v.evidence.empty()) return {};
    const auto it = std::min_element(v.evidence.begin(), v.evidence.end(),
                                     [](const nids::HostTraffic& a, const nids::HostTraffic& b) {
                                         if (a.up_bytes != b.up_bytes) return a.up_bytes > b.up_bytes;
                                         return a.host < b.host;
                                     });
    return it->host;
}

Decision decide(const Verdict& verdict, const OverrideTable& overrides, PolicyMode mode, Prompter* prompter, Tick now)
{
    Decision d;
    const auto& app = verdict_app(verdict);
    d.action.app_id = app;
    d.action.tick = now;

    bool allowed = overrides.allows(app);
    if (!allowed && mode == PolicyMode::interactive && overrides.find(app) == nullptr) {
        const auto choice = prompter ? prompter->ask(verdict) : OverrideChoice::enforce;
        d.prompted = OverrideDecision{app, choice, now, OverrideActor::user_prompt};
        allowed = choice == OverrideChoice::allow;
    }

    if (allowed) {
        d.action.kind = ActionKind::notify_only;
        d.action.target = app;
    } else if (const auto* n = std::get_if<nids::NidsVerdict>(&verdict)) {
        d.action.kind = ActionKind::block_host;
        d.action.target = offending_host(*n);
    } else {
        d.action.kind = ActionKind::terminate_app;
        d.action.target = app;
    }
    return d;
}

bool DeviceEffects::is_terminated(const std::string& app_id, Tick t) const
{
    const auto it = terminated.find(app_id);
    return it != terminated.end() && t > it->second;
}

bool DeviceEffects::is_blocked(const std::string& host, Tick t) const
{
    const auto it = blocked_hosts.find(host);
    return it != blocked_hosts.end() && t > it->second;
}

DeviceEffects apply(const PreventionAction& action, DeviceEffects effects)
{
    switch (action.kind) {
    case ActionKind::terminate_app: effects.terminated.try_emplace(action.target, action.tick); break;
    case ActionKind::block_host:
        if (!action.target.empty()) effects.blocked_hosts.try_emplace(action.target, action.tick);
        break;
    case ActionKind::notify_only: break;
    }
    return effects;
}

std::string_view to_string(AuditEvent e)
{
    switch (e) {
    case AuditEvent::verdict: return "verdict";
    case AuditEvent::action: return "action";
    case AuditEvent::override_decision: return "override";
    }
    return "verdict";
}

Json AuditRecord::to_json() const
{
    Json j;
    j["seq"] = sequence_no;
    j["t"] = tick;
    j["event"] = to_string(event);
    j["payload"] = payload;
    return j;
}

AuditRecord AuditRecord::from_json(const Json& j)
{
    AuditRecord r;
    r.sequence_no = j.at("seq").get<std::uint64_t>();
    r.tick = j.at("t").get<Tick>();
    const auto e = j.at("event").get<std::string>();
    if (e == "verdict") r.event = AuditEvent::verdict;
    else if (e == "action") r.event = AuditEvent::action;
    else if (e == "override") r.event = AuditEvent::override_decision;
    else throw Error("unknown audit event '" + e + "'");
    r.payload = j.at("payload");
    return r;
}

AuditLog AuditLog::open(const std::filesystem::path& path)
{
    auto out = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::app);
    if (!*out) throw AuditError("cannot open audit log " + path.string());
    return AuditLog(std::move(out));
}

const AuditRecord& AuditLog::append(Tick tick, AuditEvent event, Json payload)
{
    AuditRecord r;
    r.sequence_no = records_.size();
    r.tick = tick;
    r.event = event;
    r.payload = std::move(payload);
    if (sink_) {
        *sink_ << r.to_json().dump() << '\n';
        sink_->flush();
        if (!*sink_) throw AuditError("audit write failed at sequence " + std::to_string(r.sequence_no));
    }
    records_.push_back(std::move(r));
    return records_.back();
}

std::string AuditLog::to_jsonl() const
{
    std::string out;
    for (const auto& r : records_) {
        out += r.to_json().dump();
        out.push_back('\n');
    }
    return out;
}

std::vector<AuditRecord> AuditLog::parse_jsonl(std::istream& in)
{
    std::vector<AuditRecord> out;
    std::string text;
    std::size_t line_no = 0;
    while (std::getline(in, text)) {
        ++line_no;
        if (text.empty()) continue;
        try {
            out.push_back(AuditRecord::from_json(Json::parse(text)));
        } catch (const Json::exception& e) {
            throw ParseError(line_no, e.what());
        } catch (const Error& e) {
            throw ParseError(line_no, e.what());
        }
    }
    return out;
}

void PolicyEngine::record_override(const OverrideDecision& decision, Tick now)
{
    audit_.append(now, AuditEvent::override_decision, override_to_json(decision));
    overrides_.record(decision);
}

PreventionAction PolicyEngine::handle(const Verdict& verdict, Tick now)
{
    const auto seq = audit_.append(now, AuditEvent::verdict, verdict_to_json(verdict)).sequence_no;
    auto d = decide(verdict, overrides_, mode_, prompter_, now);
    if (d.prompted) record_override(*d.prompted, now);
    d.action.verdict_seq = seq;
    audit_.append(now, AuditEvent::action, action_to_json(d.action));
    return d.action;
}

std::vector<PreventionAction> replay(const std::vector<AuditRecord>& records)
{
    std::vector<PreventionAction> out;
    OverrideTable overrides;
    std::optional<std::pair<Verdict, const AuditRecord*>> pending;
    auto flush = [&] {
        if (!pending) return;
        auto d = decide(pending->first, overrides, PolicyMode::automatic, nullptr, pending->second->tick);
        d.action.verdict_seq = pending->second->sequence_no;
        out.push_back(d.action);
        pending.reset();
    };
    for (const auto& r : records) {
        switch (r.event) {
        case AuditEvent::verdict:
            flush();
            pending.emplace(verdict_from_json(r.payload), &r);
            break;
        case AuditEvent::override_decision: overrides.record(override_from_json(r.payload)); break;
        case AuditEvent::action: flush(); break;
        }
    }
    flush();
    return out;
}

std::vector<PreventionAction> recorded_actions(const std::vector<AuditRecord>& records)
{
    std::vector<PreventionAction> out;
    for (const auto& r : records)
        if (r.event == AuditEvent::action) out.push_back(action_from_json(r.payload));
    return out;
}

}  // namespace mindpres::prevention

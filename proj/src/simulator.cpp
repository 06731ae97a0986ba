#include "mindpres/simulator.hpp"

#include <algorithm>

#include "mindpres/error.hpp"

namespace mindpres::sim {

namespace {

Json optional_number(const std::optional<double>& v)
{
    return v ? Json(*v) : Json(nullptr);
}

Json metrics_to_json(const ClassMetrics& m)
{
    Json j;
    j["malicious_apps"] = m.malicious_apps;
    j["detected"] = m.detected;
    j["benign_apps"] = m.benign_apps;
    j["benign_flagged"] = m.benign_flagged;
    j["detection_rate"] = optional_number(m.detection_rate);
    j["scenario_false_alarm_rate"] = optional_number(m.scenario_false_alarm_rate);
    j["mean_detection_latency_ticks"] = optional_number(m.mean_detection_latency_ticks);
    return j;
}

struct AppRuntime {
    const ScenarioApp* spec = nullptr;
    Rng rng;
};

void finalize(ClassMetrics& m, double latency_sum)
{
    if (m.malicious_apps) m.detection_rate = static_cast<double>(m.detected) / static_cast<double>(m.malicious_apps);
    if (m.benign_apps)
        m.scenario_false_alarm_rate = static_cast<double>(m.benign_flagged) / static_cast<double>(m.benign_apps);
    if (m.detected) m.mean_detection_latency_ticks = latency_sum / static_cast<double>(m.detected);
}

}  // namespace

Json SimReport::to_json() const
{
    Json j;
    j["config"] = config;
    j["taxonomy"] = {{"ids_type", to_string(IdsType::hybrid)}, {"detection_method", to_string(DetectionMethod::hybrid)}};
    Json a = Json::array();
    for (const auto& x : assessments)
        a.push_back({{"app_id", x.app_id},
                     {"risk", to_string(x.risk)},
                     {"score", x.score},
                     {"model_id", x.model_id},
                     {"assessed_at", x.assessed_at}});
    j["assessments"] = std::move(a);
    Json v = Json::array();
    for (std::size_t i = 0; i < verdicts.size(); ++i) {
        Json item;
        item["seq"] = verdict_seqs[i];
        item.update(prevention::verdict_to_json(verdicts[i]));
        v.push_back(std::move(item));
    }
    j["verdicts"] = std::move(v);
    Json acts = Json::array();
    for (const auto& x : actions) acts.push_back(prevention::action_to_json(x));
    j["actions"] = std::move(acts);
    Json metrics = metrics_to_json(this->metrics);
    Json kinds = Json::object();
    for (const auto& [kind, m] : per_attack_kind) kinds[kind] = metrics_to_json(m);
    metrics["per_attack_kind"] = std::move(kinds);
    j["metrics"] = std::move(metrics);
    j["flows"] = {{"generated", flows.generated},
                  {"dropped_terminated", flows.dropped_terminated},
                  {"dropped_blocked", flows.dropped_blocked},
                  {"delivered", flows.delivered}};
    j["events"] = {{"generated", flows.events_generated}, {"delivered", flows.events_delivered}};
    Json wl = Json::array();
    for (const auto& [id, e] : final_watchlist.entries())
        wl.push_back({{"app_id", id},
                      {"risk", to_string(e.risk)},
                      {"assessed_at", e.assessed_at},
                      {"override_active", e.override_active}});
    j["final_watchlist"] = std::move(wl);
    return j;
}

SimReport run_scenario(const Scenario& scenario, evaluator::Evaluator& evaluator, const SimOptions& options)
{
    scenario.validate();
    if (scenario.hids.window_len != scenario.nids.window_len)
        throw ScenarioError("HIDS and NIDS window lengths must agree");

    SimReport report;
    prevention::AuditLog local_audit;
    prevention::AuditLog& audit = options.audit ? *options.audit : local_audit;
    prevention::PolicyEngine policy(options.mode, audit, options.prompter);
    for (const auto& o : options.policy_overrides) policy.record_override(o, 0);

    hids::HostDetector host(scenario.hids);
    nids::NetworkDetector network(scenario.nids);
    Watchlist watchlist;
    prevention::DeviceEffects effects;
    const Tick window_len = scenario.hids.window_len;

    std::vector<AppRuntime> apps;
    apps.reserve(scenario.apps.size());
    for (const auto& app : scenario.apps) apps.push_back({&app, Rng(derive_seed(scenario.seed, app.manifest.app_id))});

    std::string model_id;
    auto sync_override = [&](const std::string& app_id) {
        watchlist.set_override(app_id, policy.overrides().allows(app_id));
    };

    for (Tick t = 0; t < scenario.duration; ++t) {
        const DeviceState state = scenario.state_at(t);

        for (const auto& rt : apps) {
            const auto& app = *rt.spec;
            if (t < app.install_tick) continue;
            const Tick age = t - app.install_tick;
            const bool due = age == 0 || (scenario.reassess_interval && age % *scenario.reassess_interval == 0);
            if (!due || effects.is_terminated(app.manifest.app_id, t)) continue;
            auto a = evaluator.assess(app.manifest, t);
            model_id = a.model_id;
            watchlist.apply_assessment(a);
            sync_override(a.app_id);
            report.assessments.push_back(std::move(a));
        }

        for (auto& rt : apps) {
            const auto& app = *rt.spec;
            if (t < app.install_tick) continue;
            const auto& id = app.manifest.app_id;
            auto events = benign_events(app.behavior, id, t, window_len, rt.rng);
            if (app.attack) {
                auto extra = attack_events(*app.attack, id, t, window_len);
                events.insert(events.end(), std::make_move_iterator(extra.begin()), std::make_move_iterator(extra.end()));
            }
            const bool terminated = effects.is_terminated(id, t);
            for (auto& ev : events) {
                ++report.flows.events_generated;
                auto* flow = std::get_if<FlowRecord>(&ev);
                if (flow) {
                    ++report.flows.generated;
                    if (options.record_trace) report.generated_flows.push_back(*flow);
                }
                if (terminated) {
                    if (flow) ++report.flows.dropped_terminated;
                    continue;
                }
                if (flow && effects.is_blocked(flow->dst_host, t)) {
                    ++report.flows.dropped_blocked;
                    continue;
                }
                ++report.flows.events_delivered;
                if (options.record_trace) report.delivered_events.push_back(ev);
                if (flow) {
                    ++report.flows.delivered;
                    if (options.record_trace) report.delivered_flows.push_back(*flow);
                    network.ingest(*flow, watchlist);
                } else if (const auto* api = std::get_if<ApiCallEvent>(&ev)) {
                    host.ingest(*api, watchlist);
                } else {
                    host.ingest(std::get<ResourceSample>(ev), watchlist);
                }
            }
        }

        std::vector<prevention::Verdict> verdicts;
        for (auto& v : host.end_tick(t, state, watchlist)) verdicts.emplace_back(std::move(v));
        for (auto& v : network.end_tick(t, state, watchlist)) verdicts.emplace_back(std::move(v));
        std::stable_sort(verdicts.begin(), verdicts.end(), [](const auto& a, const auto& b) {
            return prevention::verdict_app(a) < prevention::verdict_app(b);
        });

        for (auto& v : verdicts) {
            const auto action = policy.handle(v, t);
            effects = prevention::apply(action, std::move(effects));
            sync_override(action.app_id);
            report.verdict_seqs.push_back(action.verdict_seq);
            report.verdicts.push_back(std::move(v));
            report.actions.push_back(action);
        }
    }

    // Metrics over apps: an attack counts as detected by its first verdict at
    // or after the attack start.
    std::map<std::string, Tick> first_verdict_after_start;
    std::map<std::string, bool> any_verdict;
    std::map<std::string, const ScenarioApp*> by_id;
    for (const auto& app : scenario.apps) by_id[app.manifest.app_id] = &app;
    for (const auto& v : report.verdicts) {
        const auto& id = prevention::verdict_app(v);
        any_verdict[id] = true;
        const auto* app = by_id.at(id);
        const Tick tick = prevention::verdict_tick(v);
        if (app->attack && tick >= app->attack->start_tick && !first_verdict_after_start.count(id))
            first_verdict_after_start[id] = tick;
    }
    double latency_sum = 0.0;
    std::map<std::string, double> kind_latency;
    for (const auto& app : scenario.apps) {
        const auto& id = app.manifest.app_id;
        if (app.attack) {
            const std::string kind(to_string(app.attack->kind));
            auto& km = report.per_attack_kind[kind];
            ++report.metrics.malicious_apps;
            ++km.malicious_apps;
            const auto it = first_verdict_after_start.find(id);
            if (it != first_verdict_after_start.end()) {
                const double latency = static_cast<double>(it->second - app.attack->start_tick);
                ++report.metrics.detected;
                ++km.detected;
                latency_sum += latency;
                kind_latency[kind] += latency;
            }
        } else {
            ++report.metrics.benign_apps;
            if (any_verdict.count(id)) ++report.metrics.benign_flagged;
        }
    }
    finalize(report.metrics, latency_sum);
    for (auto& [kind, m] : report.per_attack_kind) finalize(m, kind_latency[kind]);

    report.audit = audit.records();
    report.final_watchlist = watchlist;
    report.config = {{"seed", scenario.seed},
                     {"duration", scenario.duration},
                     {"tick_len", scenario.tick_len},
                     {"window_len", window_len},
                     {"apps", scenario.apps.size()},
                     {"mode", prevention::to_string(options.mode)},
                     {"model_id", model_id},
                     {"reassess_interval",
                      scenario.reassess_interval ? Json(*scenario.reassess_interval) : Json(nullptr)}};
    return report;
}

SimReport run_scenario(const Scenario& scenario, const evaluator::ModelBundle& bundle, prevention::PolicyMode mode)
{
    evaluator::LocalEvaluator local(std::make_shared<const evaluator::ModelBundle>(bundle));
    SimOptions options;
    options.mode = mode;
    return run_scenario(scenario, local, options);
}

}  // namespace mindpres::sim

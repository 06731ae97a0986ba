#include <doctest.h>

#include "fixtures.hpp"
#include "mindpres/error.hpp"
#include "mindpres/simulator.hpp"

using namespace mindpres;
using namespace mindpres::sim;

namespace {

SimReport run(const Scenario& s, bool trace = true)
{
    evaluator::LocalEvaluator local(std::make_shared<const evaluator::ModelBundle>(fixture::trained_bundle()));
    SimOptions o;
    o.record_trace = trace;
    return run_scenario(s, local, o);
}

std::size_t count_flows(const std::vector<TelemetryEvent>& events)
{
    std::size_t n = 0;
    for (const auto& e : events) n += std::holds_alternative<FlowRecord>(e);
    return n;
}

}  // namespace

TEST_CASE("beacon every 7 ticks over 70 ticks is 10 flows")
{
    AttackSpec a;
    a.kind = AttackKind::beacon;
    a.start_tick = 100;
    std::size_t flows = 0;
    for (Tick t = 100; t < 170; ++t) flows += count_flows(attack_events(a, "x", t, 10));
    CHECK(flows == 10);
    CHECK(attack_events(a, "x", 99, 10).empty());
}

TEST_CASE("exfiltration bursts once per window with the configured ratio")
{
    AttackSpec a;
    a.kind = AttackKind::exfiltration;
    a.start_tick = 20;
    std::uint64_t up = 0, down = 0, flows = 0;
    for (Tick t = 0; t < 70; ++t)
        for (const auto& e : attack_events(a, "x", t, 10))
            if (const auto* f = std::get_if<FlowRecord>(&e)) {
                ++flows;
                up += f->up_bytes;
                down += f->down_bytes;
                CHECK(f->dst_host == attack_host(a, "x"));
            }
    CHECK(flows == 5);
    CHECK(up == 5 * 60'000);
    CHECK(down == 5 * 2'000);
}

TEST_CASE("root abuse emits its calls once")
{
    AttackSpec a;
    a.kind = AttackKind::root_abuse;
    a.start_tick = 5;
    CHECK(attack_events(a, "x", 5, 10).size() == 2);
    CHECK(attack_events(a, "x", 6, 10).empty());
}

TEST_CASE("benign generator draws one resource sample per tick")
{
    BehaviorProfile b;
    b.host_pool = {"h1"};
    Rng rng(1);
    std::size_t samples = 0, flows = 0;
    for (Tick t = 0; t < 1000; ++t)
        for (const auto& e : benign_events(b, "x", t, 10, rng)) {
            samples += std::holds_alternative<ResourceSample>(e);
            flows += std::holds_alternative<FlowRecord>(e);
        }
    CHECK(samples == 1000);
    CHECK(flows > 150);
    CHECK(flows < 250);
}

TEST_CASE("scenario validation")
{
    auto s = standard_scenario(AttackKind::exfiltration, 1);
    CHECK_NOTHROW(s.validate());
    auto gap = s;
    gap.device_schedule[1].start += 1;
    CHECK_THROWS_AS(gap.validate(), ScenarioError);
    auto dup = s;
    dup.apps.push_back(dup.apps.front());
    CHECK_THROWS_AS(dup.validate(), ScenarioError);
    auto late = s;
    late.apps.back().attack->start_tick = late.duration;
    CHECK_THROWS_AS(late.validate(), ScenarioError);
}

TEST_CASE("scenario json round trip")
{
    for (auto k : {AttackKind::exfiltration, AttackKind::beacon, AttackKind::root_abuse}) {
        const auto s = standard_scenario(k, 3);
        CHECK(Scenario::from_json(s.to_json()).to_json() == s.to_json());
    }
    CHECK(standard_scenario(std::nullopt, 3).state_at(200) == DeviceState::idle);
}

TEST_CASE("runs are byte-identical")
{
    const auto s = standard_scenario(AttackKind::exfiltration, 42);
    CHECK(run(s).to_json().dump() == run(s).to_json().dump());
}

TEST_CASE("flow conservation and causality for every attack")
{
    for (auto k : {AttackKind::exfiltration, AttackKind::beacon, AttackKind::root_abuse}) {
        const auto r = run(standard_scenario(k, 42));
        CHECK(r.flows.generated == r.flows.dropped_terminated + r.flows.dropped_blocked + r.flows.delivered);
        CHECK(r.generated_flows.size() == r.flows.generated);
        CHECK(r.delivered_flows.size() == r.flows.delivered);

        prevention::DeviceEffects fx;
        for (const auto& a : r.actions) fx = prevention::apply(a, fx);
        for (const auto& f : r.delivered_flows) {
            CHECK_FALSE(fx.is_blocked(f.dst_host, f.tick));
            CHECK_FALSE(fx.is_terminated(f.app_id, f.tick));
        }
        for (const auto& e : r.delivered_events) CHECK_FALSE(fx.is_terminated(app_of(e), tick_of(e)));

        // Every action follows its verdict in the audit trail.
        for (const auto& a : r.actions) {
            REQUIRE(a.verdict_seq < r.audit.size());
            CHECK(r.audit[a.verdict_seq].event == prevention::AuditEvent::verdict);
        }
        CHECK(prevention::replay(r.audit) == r.actions);
    }
}

TEST_CASE("benign scenario raises nothing and monitors nothing")
{
    const auto r = run(standard_scenario(std::nullopt, 42));
    CHECK(r.verdicts.empty());
    CHECK(r.actions.empty());
    CHECK(r.final_watchlist.empty());
    CHECK(r.metrics.scenario_false_alarm_rate == 0.0);
    CHECK_FALSE(r.metrics.detection_rate.has_value());
}

TEST_CASE("allow policy turns enforcement into notifications")
{
    const auto s = standard_scenario(AttackKind::root_abuse, 42);
    evaluator::LocalEvaluator local(std::make_shared<const evaluator::ModelBundle>(fixture::trained_bundle()));
    SimOptions o;
    o.policy_overrides.push_back(
        {s.apps.back().manifest.app_id, prevention::OverrideChoice::allow, 0, prevention::OverrideActor::policy_file});
    const auto r = run_scenario(s, local, o);
    REQUIRE_FALSE(r.actions.empty());
    for (const auto& a : r.actions) CHECK(a.kind == prevention::ActionKind::notify_only);
    CHECK(r.flows.dropped_terminated == 0);
    CHECK(r.final_watchlist.find(s.apps.back().manifest.app_id)->override_active);
}

TEST_CASE("mismatched detector windows are rejected")
{
    auto s = standard_scenario(AttackKind::beacon, 1);
    s.nids.window_len = 5;
    CHECK_THROWS(run(s));
}

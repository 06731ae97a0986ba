#include <doctest.h>

#include <fstream>
#include <sstream>
#include <unistd.h>

#include "fixtures.hpp"
#include "mindpres/error.hpp"
#include "mindpres/prevention.hpp"
#include "oracles.hpp"

using namespace mindpres;
using namespace mindpres::prevention;

namespace {

hids::HidsVerdict hids_verdict(std::string app, Tick t)
{
    hids::HidsVerdict v;
    v.app_id = std::move(app);
    v.tick = t;
    v.kind = hids::HidsVerdictKind::suspicious_api;
    v.score = 1.8;
    v.threshold = 1.0;
    v.api_calls.push_back(make_api_call(t, v.app_id, "root_access"));
    return v;
}

nids::NidsVerdict nids_verdict(std::string app, Tick t, std::vector<std::pair<std::string, std::uint64_t>> hosts)
{
    nids::NidsVerdict v;
    v.app_id = std::move(app);
    v.tick = t;
    v.rule = nids::NidsRule::upload_anomaly;
    for (auto& [h, up] : hosts) {
        v.evidence.push_back({h, up, 10, 1, {}, false, t});
        v.total_up += up;
    }
    return v;
}

class ScriptedPrompter : public Prompter {
public:
    explicit ScriptedPrompter(std::vector<OverrideChoice> answers) : answers_(std::move(answers)) {}
    OverrideChoice ask(const Verdict&) override
    {
        ++asked;
        return answers_.at(next_++ % answers_.size());
    }
    int asked = 0;

private:
    std::vector<OverrideChoice> answers_;
    std::size_t next_ = 0;
};

Verdict random_verdict(Rng& rng, Tick t)
{
    const auto app = "app" + std::to_string(rng.below(4));
    if (rng.bernoulli(0.5)) return hids_verdict(app, t);
    std::vector<std::pair<std::string, std::uint64_t>> hosts;
    const auto n = 1 + rng.below(3);
    for (std::size_t i = 0; i < n; ++i) hosts.emplace_back("h" + std::to_string(rng.below(5)), rng.below(4) * 100);
    return nids_verdict(app, t, hosts);
}

}  // namespace

TEST_CASE("decision table")
{
    OverrideTable none;
    const auto h = decide(hids_verdict("a", 5), none, PolicyMode::automatic, nullptr, 5);
    CHECK(h.action.kind == ActionKind::terminate_app);
    CHECK(h.action.target == "a");
    const auto n = decide(nids_verdict("a", 5, {{"x", 10}, {"y", 99}}), none, PolicyMode::automatic, nullptr, 5);
    CHECK(n.action.kind == ActionKind::block_host);
    CHECK(n.action.target == "y");
    CHECK_FALSE(n.prompted.has_value());

    OverrideTable allow;
    allow.record({"a", OverrideChoice::allow, 1, OverrideActor::policy_file});
    const auto a = decide(hids_verdict("a", 5), allow, PolicyMode::automatic, nullptr, 5);
    CHECK(a.action.kind == ActionKind::notify_only);
    CHECK(a.action.target == "a");
}

TEST_CASE("offending host ties break by name")
{
    CHECK(offending_host(nids_verdict("a", 1, {{"zeta", 50}, {"alpha", 50}, {"mid", 10}})) == "alpha");
}

TEST_CASE("interactive mode prompts once per app")
{
    AuditLog log;
    ScriptedPrompter prompter({OverrideChoice::allow});
    PolicyEngine engine(PolicyMode::interactive, log, &prompter);
    CHECK(engine.handle(hids_verdict("a", 3), 3).kind == ActionKind::notify_only);
    CHECK(engine.handle(hids_verdict("a", 9), 9).kind == ActionKind::notify_only);
    CHECK(prompter.asked == 1);
    const auto& recs = log.records();
    REQUIRE(recs.size() == 5);
    CHECK(recs[0].event == AuditEvent::verdict);
    CHECK(recs[1].event == AuditEvent::override_decision);
    CHECK(recs[1].payload["actor"] == "user_prompt");
    CHECK(recs[2].event == AuditEvent::action);
    CHECK(recs[2].payload["verdict_seq"] == 0);
}

TEST_CASE("interactive mode without a prompter enforces")
{
    AuditLog log;
    PolicyEngine engine(PolicyMode::interactive, log, nullptr);
    CHECK(engine.handle(hids_verdict("a", 3), 3).kind == ActionKind::terminate_app);
    CHECK(engine.overrides().find("a")->decision == OverrideChoice::enforce);
}

TEST_CASE("property: allow overrides never lead to enforcement; replay reproduces actions")
{
    Rng rng(51);
    for (int trial = 0; trial < 300; ++trial) {
        AuditLog log;
        const auto mode = rng.bernoulli(0.5) ? PolicyMode::automatic : PolicyMode::interactive;
        ScriptedPrompter prompter({OverrideChoice::allow, OverrideChoice::enforce, OverrideChoice::enforce});
        PolicyEngine engine(mode, log, &prompter);
        for (Tick t = 0; t < 40; ++t) {
            if (rng.bernoulli(0.3)) {
                const auto app = "app" + std::to_string(rng.below(4));
                const auto choice = rng.bernoulli(0.5) ? OverrideChoice::allow : OverrideChoice::enforce;
                engine.record_override({app, choice, t, OverrideActor::policy_file}, t);
            }
            if (rng.bernoulli(0.6)) {
                const auto v = random_verdict(rng, t);
                const auto action = engine.handle(v, t);
                if (engine.overrides().allows(verdict_app(v)))
                    CHECK(action.kind == ActionKind::notify_only);
                else
                    CHECK(action.kind != ActionKind::notify_only);
            }
        }
        CHECK(replay(log.records()) == recorded_actions(log.records()));
        std::istringstream in(log.to_jsonl());
        CHECK(replay(AuditLog::parse_jsonl(in)) == recorded_actions(log.records()));
    }
}

TEST_CASE("effects apply strictly after the action tick")
{
    DeviceEffects fx;
    fx = apply({ActionKind::terminate_app, "a", "a", 10, 0}, fx);
    fx = apply({ActionKind::block_host, "h", "a", 12, 1}, fx);
    fx = apply({ActionKind::notify_only, "b", "b", 12, 2}, fx);
    CHECK_FALSE(fx.is_terminated("a", 10));
    CHECK(fx.is_terminated("a", 11));
    CHECK_FALSE(fx.is_blocked("h", 12));
    CHECK(fx.is_blocked("h", 13));
    CHECK_FALSE(fx.is_terminated("b", 100));
}

TEST_CASE("audit sink failure raises and keeps nothing")
{
    auto sink = std::make_unique<std::ostringstream>();
    sink->setstate(std::ios::badbit);
    AuditLog log(std::move(sink));
    CHECK_THROWS_AS(log.append(1, AuditEvent::verdict, Json::object()), AuditError);
    CHECK(log.records().empty());
}

TEST_CASE("audit file mirrors the in-memory log")
{
    const auto path = fixture::scratch("audit.jsonl");
    std::filesystem::remove(path);
    {
        auto log = AuditLog::open(path);
        PolicyEngine engine(PolicyMode::automatic, log);
        engine.handle(hids_verdict("a", 1), 1);
        engine.handle(nids_verdict("b", 2, {{"h", 5}}), 2);
        std::ifstream in(path);
        const auto back = AuditLog::parse_jsonl(in);
        REQUIRE(back.size() == log.records().size());
        for (std::size_t i = 0; i < back.size(); ++i) CHECK(back[i].to_json() == log.records()[i].to_json());
    }
}

TEST_CASE("verdict json round trip")
{
    for (const Verdict& v : {Verdict{hids_verdict("a", 4)}, Verdict{nids_verdict("b", 9, {{"h", 7}})}}) {
        const auto back = verdict_from_json(verdict_to_json(v));
        CHECK(verdict_to_json(back) == verdict_to_json(v));
        CHECK(verdict_app(back) == verdict_app(v));
    }
}

TEST_CASE("policy file")
{
    const auto path = fixture::scratch("policy.json");
    {
        std::ofstream out(path);
        out << R"([{"app_id":"a","decision":"allow","tick":0,"actor":"policy_file"}])";
    }
    const auto o = load_policy_file(path);
    REQUIRE(o.size() == 1);
    CHECK(o[0].decision == OverrideChoice::allow);
    {
        std::ofstream out(path);
        out << R"({"app_id":"a"})";
    }
    CHECK_THROWS_AS(load_policy_file(path), ConfigError);
}

TEST_CASE("console prompter reads an answer, defaults to enforce")
{
    int fds[2];
    REQUIRE(pipe(fds) == 0);
    std::ostringstream out;
    ConsolePrompter p(fds[0], out, std::chrono::milliseconds(200));
    const std::string answers = "allow\nmaybe\n";
    REQUIRE(write(fds[1], answers.data(), answers.size()) == static_cast<ssize_t>(answers.size()));
    CHECK(p.ask(hids_verdict("a", 1)) == OverrideChoice::allow);
    CHECK(p.ask(hids_verdict("a", 1)) == OverrideChoice::enforce);
    // Nothing more to read: times out.
    CHECK(p.ask(hids_verdict("a", 1)) == OverrideChoice::enforce);
    close(fds[1]);
    CHECK(p.ask(hids_verdict("a", 1)) == OverrideChoice::enforce);
    close(fds[0]);
    CHECK(out.str().find("a") != std::string::npos);
}

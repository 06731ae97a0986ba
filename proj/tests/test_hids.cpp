#include <doctest.h>

#include "mindpres/error.hpp"
#include "mindpres/hids.hpp"
#include "oracles.hpp"

using namespace mindpres;
using hids::HidsConfig;
using hids::HidsWindow;

namespace {

hids::ResourceBaseline warm_baseline(double cpu_mean, double cpu_var, double mem_mean, double mem_var)
{
    hids::ResourceBaseline b;
    b.cpu = {cpu_mean, cpu_var, 5};
    b.mem = {mem_mean, mem_var, 5};
    return b;
}

HidsWindow window_with(double cpu, double mem, int n = 10)
{
    HidsWindow w;
    w.app_id = "a";
    w.start = 30;
    w.end = 40;
    for (int i = 0; i < n; ++i) w.samples.push_back({static_cast<Tick>(30 + i), "a", cpu, mem});
    return w;
}

Watchlist watching(std::initializer_list<std::string> ids)
{
    Watchlist wl;
    for (const auto& id : ids) wl.apply_assessment({id, RiskLevel::high, 0.9, "m", 0});
    return wl;
}

}  // namespace

TEST_CASE("z = 5 fires in both states")
{
    const auto b = warm_baseline(10.0, 4.0, 100.0, 4.0);
    const auto w = window_with(20.0, 100.0);
    for (auto state : {DeviceState::active, DeviceState::idle}) {
        const auto v = hids::score_window(w, b, state, {});
        REQUIRE(v.has_value());
        CHECK(v->kind == hids::HidsVerdictKind::resource_anomaly);
        CHECK(v->metric == "cpu");
        CHECK(v->score == doctest::Approx(5.0));
        CHECK(v->tick == 39);
    }
}

TEST_CASE("z = 2 fires only while idle")
{
    const auto b = warm_baseline(10.0, 4.0, 100.0, 4.0);
    const auto w = window_with(14.0, 100.0);
    CHECK_FALSE(hids::score_window(w, b, DeviceState::active, {}).has_value());
    const auto v = hids::score_window(w, b, DeviceState::idle, {});
    REQUIRE(v.has_value());
    CHECK(v->threshold == 1.5);
}

TEST_CASE("sigma floor bounds the z-score")
{
    const auto b = warm_baseline(10.0, 0.0, 100.0, 0.0);
    const auto v = hids::score_window(window_with(13.5, 100.0), b, DeviceState::active, {});
    REQUIRE(v.has_value());
    CHECK(v->score == doctest::Approx(3.5));
    CHECK(v->kind == hids::HidsVerdictKind::resource_anomaly);
}

TEST_CASE("resource rule waits for warmup, api rule does not")
{
    hids::ResourceBaseline b;
    b.cpu = {10.0, 4.0, 2};
    b.mem = {100.0, 4.0, 2};
    auto w = window_with(50.0, 100.0);
    CHECK_FALSE(hids::score_window(w, b, DeviceState::active, {}).has_value());
    w.api_calls.push_back(make_api_call(31, "a", "root_access"));
    const auto v = hids::score_window(w, b, DeviceState::active, {});
    REQUIRE(v.has_value());
    CHECK(v->kind == hids::HidsVerdictKind::suspicious_api);
}

TEST_CASE("api weights and threshold")
{
    HidsConfig cfg;
    auto w = window_with(10.0, 100.0);
    w.api_calls.push_back(make_api_call(31, "a", "send_sms"));
    CHECK(hids::api_score(w, cfg) == doctest::Approx(0.6));
    CHECK_FALSE(hids::score_window(w, warm_baseline(10, 4, 100, 4), DeviceState::active, cfg).has_value());
    w.api_calls.push_back(make_api_call(32, "a", "read_contacts"));
    CHECK(hids::api_score(w, cfg) == doctest::Approx(1.0));
    CHECK(hids::score_window(w, warm_baseline(10, 4, 100, 4), DeviceState::active, cfg).has_value());
    w.api_calls.push_back(make_api_call(33, "a", "something_else"));
    CHECK(hids::api_score(w, cfg) == doctest::Approx(1.2));
}

TEST_CASE("resource takes precedence over api")
{
    auto w = window_with(20.0, 100.0);
    w.api_calls.push_back(make_api_call(31, "a", "root_access"));
    const auto v = hids::score_window(w, warm_baseline(10, 4, 100, 4), DeviceState::active, {});
    REQUIRE(v.has_value());
    CHECK(v->kind == hids::HidsVerdictKind::resource_anomaly);
}

TEST_CASE("EWMA update: mu 10, window mean 20 gives 11")
{
    const auto b = warm_baseline(10.0, 4.0, 100.0, 4.0);
    const auto after = hids::update_baseline(b, window_with(20.0, 100.0), false, {});
    CHECK(after.cpu.mean == doctest::Approx(11.0));
    CHECK(after.cpu.var == doctest::Approx(0.9 * (4.0 + 0.1 * 100.0)));
    CHECK(after.mem.mean == doctest::Approx(100.0));
    CHECK(after.cpu.sample_count == 6);
}

TEST_CASE("first window initialises to the window statistics")
{
    HidsWindow w;
    w.app_id = "a";
    w.samples = {{0, "a", 2.0, 10.0}, {1, "a", 4.0, 14.0}};
    const auto b = hids::update_baseline({}, w, false, {});
    CHECK(b.cpu.mean == 3.0);
    CHECK(b.cpu.var == 1.0);
    CHECK(b.mem.mean == 12.0);
    CHECK(b.mem.var == 4.0);
}

TEST_CASE("verdict and empty windows freeze the baseline")
{
    const auto b = warm_baseline(10.0, 4.0, 100.0, 4.0);
    CHECK(hids::update_baseline(b, window_with(20.0, 100.0), true, {}) == b);
    HidsWindow empty;
    CHECK(hids::update_baseline(b, empty, false, {}) == b);
}

TEST_CASE("detector discards events of apps that are not watchlisted")
{
    Rng rng(19);
    for (int trial = 0; trial < 200; ++trial) {
        hids::HostDetector det;
        const auto wl = watching({"watched"});
        std::size_t verdicts_for_others = 0;
        for (Tick t = 0; t < 60; ++t) {
            for (const char* id : {"watched", "other"}) {
                std::vector<hids::HidsVerdict> vs;
                if (rng.bernoulli(0.8)) {
                    auto more = det.ingest(ResourceSample{t, id, rng.uniform() * 100, rng.uniform() * 500}, wl);
                    vs.insert(vs.end(), more.begin(), more.end());
                }
                if (rng.bernoulli(0.1)) {
                    auto more = det.ingest(make_api_call(t, id, "root_access"), wl);
                    vs.insert(vs.end(), more.begin(), more.end());
                }
                for (const auto& v : vs) verdicts_for_others += v.app_id != "watched";
            }
            for (const auto& v : det.end_tick(t, rng.bernoulli(0.5) ? DeviceState::idle : DeviceState::active, wl))
                verdicts_for_others += v.app_id != "watched";
        }
        CHECK(verdicts_for_others == 0);
        CHECK(det.baseline("other") == nullptr);
    }
}

TEST_CASE("constant behaviour never triggers the resource rule")
{
    hids::HostDetector det;
    const auto wl = watching({"a"});
    for (Tick t = 0; t < 500; ++t) {
        det.ingest(ResourceSample{t, "a", 7.0, 200.0}, wl);
        const auto state = (t / 50) % 2 ? DeviceState::idle : DeviceState::active;
        CHECK(det.end_tick(t, state, wl).empty());
    }
    CHECK(det.closed_windows() == 50);
}

TEST_CASE("detector fires after warmup on a step change")
{
    hids::HostDetector det;
    const auto wl = watching({"a"});
    std::vector<hids::HidsVerdict> all;
    for (Tick t = 0; t < 60; ++t) {
        const double cpu = t < 40 ? 5.0 + (t % 2) : 40.0;
        det.ingest(ResourceSample{t, "a", cpu, 100.0}, wl);
        auto vs = det.end_tick(t, DeviceState::active, wl);
        all.insert(all.end(), vs.begin(), vs.end());
    }
    REQUIRE(all.size() == 2);
    CHECK(all[0].tick == 49);
    CHECK(all[0].first_evidence_tick() == 40);
    // Frozen baseline: the second anomalous window fires again.
    CHECK(all[1].tick == 59);
}

TEST_CASE("time going backwards is rejected")
{
    hids::HostDetector det;
    const auto wl = watching({"a"});
    det.ingest(ResourceSample{5, "a", 1.0, 1.0}, wl);
    CHECK_THROWS_AS(det.ingest(ResourceSample{4, "a", 1.0, 1.0}, wl), StreamOrderError);
    det.end_tick(9, DeviceState::active, wl);
    CHECK_THROWS_AS(det.ingest(ResourceSample{9, "a", 1.0, 1.0}, wl), StreamOrderError);
}

TEST_CASE("verdicts are published to the sink")
{
    hids::HostDetector det;
    BlockingQueue<hids::HidsVerdict> q;
    det.set_sink(&q);
    const auto wl = watching({"a"});
    det.ingest(make_api_call(0, "a", "root_access"), wl);
    for (Tick t = 0; t < 10; ++t) det.end_tick(t, DeviceState::active, wl);
    q.close();
    const auto v = q.pop();
    REQUIRE(v.has_value());
    CHECK(v->kind == hids::HidsVerdictKind::suspicious_api);
    CHECK(v->method() == DetectionMethod::signature_based);
    CHECK_FALSE(q.pop().has_value());
}

TEST_CASE("config from json keeps defaults for absent keys")
{
    const auto cfg = HidsConfig::from_json(Json::parse(R"({"z_active": 4.0, "api_weights": {"send_sms": 1.0}})"));
    CHECK(cfg.z_active == 4.0);
    CHECK(cfg.z_idle == 1.5);
    CHECK(cfg.weight(ApiKind::send_sms) == 1.0);
    CHECK(cfg.weight(ApiKind::root_access) == 1.0);
    CHECK_THROWS_AS(HidsConfig::from_json(Json::parse(R"({"window_len": 0})")), ConfigError);
}

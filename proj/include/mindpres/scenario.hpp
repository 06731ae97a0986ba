#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mindpres/corpus.hpp"
#include "mindpres/hids.hpp"
#include "mindpres/nids.hpp"
#include "mindpres/rng.hpp"
#include "mindpres/telemetry.hpp"

namespace mindpres::sim {

struct ScheduleSpan {
    Tick start = 0;
    Tick end = 0;  // exclusive
    DeviceState state = DeviceState::active;
};

/// Benign behaviour: Gaussian resource samples every tick and Poisson-count
/// flows to a fixed host pool.
struct BehaviorProfile {
    double cpu_mean = 5.0;
    double cpu_sigma = 1.0;
    double mem_mean = 120.0;
    double mem_sigma = 4.0;
    double flows_per_window = 2.0;
    double bytes_up_mean = 600.0;
    double bytes_up_sigma = 100.0;
    double bytes_down_mean = 6000.0;
    double bytes_down_sigma = 1000.0;
    std::vector<std::string> host_pool;
};

enum class AttackKind { exfiltration, beacon, root_abuse };
std::string_view to_string(AttackKind kind);
AttackKind attack_kind_from_string(std::string_view s);

struct AttackSpec {
    AttackKind kind = AttackKind::exfiltration;
    Tick start_tick = 0;
    /// Destination for exfiltration and beacon traffic; empty picks a fresh
    /// per-app host.
    std::string host;
    // exfiltration: one burst per window
    std::uint64_t burst_bytes = 60'000;
    double ratio = 30.0;
    // beacon
    Tick period = 7;
    std::uint64_t beacon_up = 300;
    std::uint64_t beacon_down = 100;
    // root_abuse
    std::vector<std::string> apis = {"root_access", "exec_shell"};
};

struct ScenarioApp {
    AppManifest manifest;
    Tick install_tick = 0;
    BehaviorProfile behavior;
    std::optional<AttackSpec> attack;
};

struct Scenario {
    std::uint64_t seed = 0;
    Tick duration = 0;
    double tick_len = 1.0;
    std::vector<ScheduleSpan> device_schedule;
    std::vector<ScenarioApp> apps;
    std::optional<Tick> reassess_interval;
    hids::HidsConfig hids;
    nids::NidsConfig nids;

    /// Throws ScenarioError: schedule must tile [0, duration) without gaps or
    /// overlap, app ids must be unique, attacks must start before `duration`.
    void validate() const;
    DeviceState state_at(Tick t) const;

    Json to_json() const;
    static Scenario from_json(const Json& j);
    static Scenario load(const std::filesystem::path& path);
};

/// Host an attack talks to.
std::string attack_host(const AttackSpec& attack, const std::string& app_id);

/// Attack telemetry emitted by `app_id` at tick `t` (empty before start_tick).
///
/// exfiltration: one upload burst of burst_bytes (down = burst/ratio) at
/// start_tick + k * window_len. beacon: a small flow at start_tick + k * period.
/// root_abuse: the configured API calls at start_tick only.
std::vector<TelemetryEvent> attack_events(const AttackSpec& attack, const std::string& app_id, Tick t,
                                          Tick window_len);

/// One tick of benign telemetry; draws from `rng` in a fixed order.
std::vector<TelemetryEvent> benign_events(const BehaviorProfile& behavior, const std::string& app_id, Tick t,
                                          Tick window_len, Rng& rng);

/// Ready-made scenario: five benign apps plus, unless `attack` is empty, one
/// app running the given attack.
Scenario standard_scenario(std::optional<AttackKind> attack, std::uint64_t seed);

}  // namespace mindpres::sim

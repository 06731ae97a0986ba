#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mindpres/evaluator.hpp"
#include "mindpres/prevention.hpp"
#include "mindpres/scenario.hpp"
#include "mindpres/service.hpp"
#include "mindpres/watchlist.hpp"

namespace mindpres::sim {

struct SimOptions {
    prevention::PolicyMode mode = prevention::PolicyMode::automatic;
    prevention::Prompter* prompter = nullptr;
    /// Applied before the first tick, as if read from a policy file.
    std::vector<prevention::OverrideDecision> policy_overrides;
    /// Optional external audit sink; an in-memory log is used otherwise.
    prevention::AuditLog* audit = nullptr;
    /// Keep the generated and delivered flow traces in the report.
    bool record_trace = false;
};

struct ClassMetrics {
    std::size_t malicious_apps = 0;
    std::size_t detected = 0;
    std::size_t benign_apps = 0;
    std::size_t benign_flagged = 0;
    std::optional<double> detection_rate;
    std::optional<double> scenario_false_alarm_rate;
    std::optional<double> mean_detection_latency_ticks;
};

struct FlowCounters {
    std::uint64_t generated = 0;
    std::uint64_t dropped_terminated = 0;
    std::uint64_t dropped_blocked = 0;
    std::uint64_t delivered = 0;
    std::uint64_t events_generated = 0;
    std::uint64_t events_delivered = 0;
};

struct SimReport {
    Json config;
    std::vector<RiskAssessment> assessments;
    std::vector<std::uint64_t> verdict_seqs;
    std::vector<prevention::Verdict> verdicts;
    std::vector<prevention::PreventionAction> actions;
    ClassMetrics metrics;
    std::map<std::string, ClassMetrics> per_attack_kind;
    FlowCounters flows;
    std::vector<prevention::AuditRecord> audit;
    Watchlist final_watchlist;

    // Filled only with SimOptions::record_trace.
    std::vector<FlowRecord> generated_flows;
    std::vector<FlowRecord> delivered_flows;
    std::vector<TelemetryEvent> delivered_events;

    Json to_json() const;
};

/// Runs the device loop tick by tick: assess installs (and re-assessments) ->
/// update the watchlist -> generate telemetry -> drop what prevention
/// forbids -> HIDS/NIDS -> decide, apply and audit. Deterministic for a given
/// scenario, evaluator answers and automatic mode.
SimReport run_scenario(const Scenario& scenario, evaluator::Evaluator& evaluator, const SimOptions& options = {});

/// Offline mode: evaluates in process against `bundle`.
SimReport run_scenario(const Scenario& scenario, const evaluator::ModelBundle& bundle,
                       prevention::PolicyMode mode = prevention::PolicyMode::automatic);

}  // namespace mindpres::sim

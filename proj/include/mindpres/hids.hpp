#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mindpres/baseline.hpp"
#include "mindpres/telemetry.hpp"
#include "mindpres/watchlist.hpp"
#include "mindpres/window.hpp"

namespace mindpres::hids {

struct HidsConfig {
    Tick window_len = 10;
    double alpha = 0.1;
    double cpu_sigma_min = 1.0;
    double mem_sigma_min = 1.0;
    std::uint64_t warmup_windows = 3;
    double z_active = 3.0;
    double z_idle = 1.5;
    double api_threshold = 1.0;
    std::map<ApiKind, double> api_weights = {
        {ApiKind::root_access, 1.0}, {ApiKind::install_package, 0.8}, {ApiKind::exec_shell, 0.8},
        {ApiKind::send_sms, 0.6},    {ApiKind::read_contacts, 0.4},   {ApiKind::other, 0.2},
    };

    double weight(ApiKind api) const;
    double z_threshold(DeviceState state) const { return state == DeviceState::idle ? z_idle : z_active; }

    /// Keys absent from `j` keep their defaults. `api_weights` is an object
    /// keyed by API name. Throws ConfigError.
    static HidsConfig from_json(const Json& j);
};

struct ResourceBaseline {
    MetricBaseline cpu;
    MetricBaseline mem;

    std::uint64_t windows() const { return std::min(cpu.sample_count, mem.sample_count); }
    bool operator==(const ResourceBaseline&) const = default;
};

/// One app's telemetry for one window.
struct HidsWindow {
    std::string app_id;
    Tick start = 0;
    Tick end = 0;  // exclusive
    std::vector<ResourceSample> samples;
    std::vector<ApiCallEvent> api_calls;

    bool empty() const { return samples.empty() && api_calls.empty(); }
};

enum class HidsVerdictKind { resource_anomaly, suspicious_api };
std::string_view to_string(HidsVerdictKind kind);

struct HidsVerdict {
    Tick tick = 0;
    std::string app_id;
    HidsVerdictKind kind = HidsVerdictKind::resource_anomaly;
    double score = 0.0;
    double threshold = 0.0;
    /// "cpu" or "mem" for resource anomalies.
    std::string metric;
    DeviceState state = DeviceState::active;
    std::vector<ResourceSample> samples;
    std::vector<ApiCallEvent> api_calls;

    Tick first_evidence_tick() const;
    DetectionMethod method() const
    {
        return kind == HidsVerdictKind::suspicious_api ? DetectionMethod::signature_based
                                                       : DetectionMethod::anomaly_based;
    }
};

struct WindowMoments {
    double mean = 0.0;
    double variance = 0.0;
};

WindowMoments cpu_moments(const HidsWindow& window);
WindowMoments mem_moments(const HidsWindow& window);
double api_score(const HidsWindow& window, const HidsConfig& config);

/// Resource rule (gated on warmup): z = (window mean - ewma mean) /
/// max(sqrt(ewma var), sigma_min), maximised over cpu and mem, compared with the
/// state-dependent threshold. API rule: weighted sum of calls >= api_threshold.
/// The resource rule takes precedence when both fire.
std::optional<HidsVerdict> score_window(const HidsWindow& window, const ResourceBaseline& baseline,
                                        DeviceState state, const HidsConfig& config);

/// EWMA update from the window means; frozen for verdict windows and windows
/// without samples.
ResourceBaseline update_baseline(ResourceBaseline baseline, const HidsWindow& window, bool had_verdict,
                                 const HidsConfig& config);

/// Per-device host detector. Events for apps that are not watchlisted at
/// ingestion time are discarded before buffering.
class HostDetector {
public:
    explicit HostDetector(HidsConfig config = {});

    /// Returns verdicts for windows closed by time advancing to the event.
    std::vector<HidsVerdict> ingest(const ApiCallEvent& event, const Watchlist& watchlist);
    std::vector<HidsVerdict> ingest(const ResourceSample& sample, const Watchlist& watchlist);

    /// Marks the end of tick `t`; closes the window if `t` is its last tick.
    std::vector<HidsVerdict> end_tick(Tick t, DeviceState state, const Watchlist& watchlist);

    void set_sink(BlockingQueue<HidsVerdict>* sink) { sink_ = sink; }

    const HidsConfig& config() const { return config_; }
    const ResourceBaseline* baseline(const std::string& app_id) const;
    /// Windows closed so far, across all apps.
    std::uint64_t closed_windows() const { return closed_windows_; }
    std::uint64_t events_accepted() const { return accepted_; }
    std::uint64_t events_discarded() const { return discarded_; }
    /// Buffered samples plus calls for the open window of `app_id`.
    std::size_t buffered(const std::string& app_id) const;

private:
    struct AppState {
        ResourceBaseline baseline;
        HidsWindow window;
    };

    std::vector<HidsVerdict> advance(Tick t);
    std::vector<HidsVerdict> close_open_window();
    AppState* accept(Tick t, const std::string& app_id, const Watchlist& watchlist);

    HidsConfig config_;
    WindowCursor cursor_;
    std::map<std::string, AppState> apps_;
    BlockingQueue<HidsVerdict>* sink_ = nullptr;
    std::uint64_t closed_windows_ = 0;
    std::uint64_t accepted_ = 0;
    std::uint64_t discarded_ = 0;
};

}  // namespace mindpres::hids

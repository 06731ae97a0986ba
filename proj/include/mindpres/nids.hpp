#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mindpres/baseline.hpp"
#include "mindpres/telemetry.hpp"
#include "mindpres/watchlist.hpp"
#include "mindpres/window.hpp"

namespace mindpres::nids {

struct NidsConfig {
    Tick window_len = 10;
    double alpha = 0.1;
    double up_sigma_min = 100.0;
    std::uint64_t warmup_windows = 3;
    double z_active = 3.0;
    double z_idle = 1.5;
    double exfil_ratio = 5.0;
    std::uint64_t exfil_min_up = 10'000;
    std::uint64_t new_host_min = 1;

    double z_threshold(DeviceState state) const { return state == DeviceState::idle ? z_idle : z_active; }
    static NidsConfig from_json(const Json& j);
};

/// Per app, the destination hosts seen in verdict-free windows.
class HostKnowledge {
public:
    bool knows(const std::string& app_id, const std::string& host) const;
    void learn(const std::string& app_id, const std::string& host) { hosts_[app_id].insert(host); }
    void reset(const std::string& app_id) { hosts_.erase(app_id); }
    std::size_t size(const std::string& app_id) const;

    bool operator==(const HostKnowledge&) const = default;

private:
    std::map<std::string, std::set<std::string>> hosts_;
};

struct HostTraffic {
    std::string host;
    std::uint64_t up_bytes = 0;
    std::uint64_t down_bytes = 0;
    std::uint64_t flows = 0;
    std::vector<std::string> urls;
    bool is_new = false;
    Tick first_tick = 0;

    bool operator==(const HostTraffic&) const = default;
};

struct FlowWindow {
    std::string app_id;
    Tick start = 0;
    Tick end = 0;  // exclusive
    std::vector<FlowRecord> flows;
};

struct FlowWindowStats {
    std::string app_id;
    Tick start = 0;
    Tick end = 0;
    std::uint64_t total_up = 0;
    std::uint64_t total_down = 0;
    std::size_t distinct_hosts = 0;
    std::size_t new_hosts = 0;
    /// total_up / max(total_down, 1)
    double up_down_ratio = 0.0;
    /// Sorted by host name.
    std::vector<HostTraffic> hosts;
};

FlowWindowStats summarize(const FlowWindow& window, const HostKnowledge& known);

enum class NidsRule { upload_anomaly, exfil_ratio, new_host_idle };
std::string_view to_string(NidsRule rule);

struct NidsVerdict {
    Tick tick = 0;
    std::string app_id;
    NidsRule rule = NidsRule::upload_anomaly;
    double score = 0.0;
    double threshold = 0.0;
    DeviceState state = DeviceState::active;
    /// Offending hosts, largest upload first, ties by host name.
    std::vector<HostTraffic> evidence;
    std::uint64_t total_up = 0;
    std::uint64_t total_down = 0;

    Tick first_evidence_tick() const;
    DetectionMethod method() const
    {
        return rule == NidsRule::upload_anomaly ? DetectionMethod::anomaly_based : DetectionMethod::signature_based;
    }
};

/// At most one verdict per window, precedence exfil_ratio > upload_anomaly >
/// new_host_idle. The z rule is gated on warmup; the other two always apply.
std::optional<NidsVerdict> score_flow_window(const FlowWindowStats& stats, const MetricBaseline& up_baseline,
                                             DeviceState state, const NidsConfig& config);

/// Learns every host of a verdict-free window; verdict windows change nothing.
HostKnowledge update_host_knowledge(HostKnowledge hosts, const FlowWindowStats& stats, bool had_verdict);

/// Per-device network detector over per-app flow windows.
class NetworkDetector {
public:
    explicit NetworkDetector(NidsConfig config = {});

    std::vector<NidsVerdict> ingest(const FlowRecord& flow, const Watchlist& watchlist);
    /// Closes the window if `t` is its last tick. Every app monitored at that
    /// point gets a window, including an empty one.
    std::vector<NidsVerdict> end_tick(Tick t, DeviceState state, const Watchlist& watchlist);

    void set_sink(BlockingQueue<NidsVerdict>* sink) { sink_ = sink; }

    const NidsConfig& config() const { return config_; }
    const MetricBaseline* baseline(const std::string& app_id) const;
    const HostKnowledge& host_knowledge() const { return known_; }
    std::uint64_t flows_received() const { return received_; }
    std::uint64_t flows_accepted() const { return accepted_; }
    /// Flows delivered to the detector per destination host, before the
    /// watchlist filter.
    const std::map<std::string, std::uint64_t>& flows_by_host() const { return by_host_; }
    /// Windows closed so far, across all apps.
    std::uint64_t closed_windows() const { return closed_windows_; }
    std::size_t buffered(const std::string& app_id) const;

private:
    struct AppState {
        MetricBaseline up;
        FlowWindow window;
    };

    std::vector<NidsVerdict> advance(Tick t, const Watchlist* watchlist);
    std::vector<NidsVerdict> close_open_window(const Watchlist* watchlist);

    NidsConfig config_;
    WindowCursor cursor_;
    std::map<std::string, AppState> apps_;
    HostKnowledge known_;
    BlockingQueue<NidsVerdict>* sink_ = nullptr;
    std::uint64_t received_ = 0;
    std::uint64_t accepted_ = 0;
    std::uint64_t closed_windows_ = 0;
    std::map<std::string, std::uint64_t> by_host_;
};

}  // namespace mindpres::nids

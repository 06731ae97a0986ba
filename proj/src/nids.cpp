#include "mindpres/nids.hpp"

#include <algorithm>
#include <limits>

#include "mindpres/error.hpp"

namespace mindpres::nids {

std::string_view to_string(NidsRule rule)
{
    switch (rule) {
    case NidsRule::upload_anomaly: return "upload_anomaly";
    case NidsRule::exfil_ratio: return "exfil_ratio";
    case NidsRule::new_host_idle: return "new_host_idle";
    }
    return "upload_anomaly";
}

NidsConfig NidsConfig::from_json(const Json& j)
{
    NidsConfig c;
    try {
        c.window_len = j.value("window_len", c.window_len);
        c.alpha = j.value("alpha", c.alpha);
        c.up_sigma_min = j.value("up_sigma_min", c.up_sigma_min);
        c.warmup_windows = j.value("warmup_windows", c.warmup_windows);
        c.z_active = j.value("z_active", c.z_active);
        c.z_idle = j.value("z_idle", c.z_idle);
        c.exfil_ratio = j.value("exfil_ratio", c.exfil_ratio);
        c.exfil_min_up = j.value("exfil_min_up", c.exfil_min_up);
        c.new_host_min = j.value("new_host_min", c.new_host_min);
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("invalid NIDS config: ") + e.what());
    }
    if (c.window_len == 0) throw ConfigError("window_len must be positive");
    if (!(c.alpha > 0.0 && c.alpha <= 1.0)) throw ConfigError("alpha must lie in (0,1]");
    if (!(c.up_sigma_min > 0.0)) throw ConfigError("up_sigma_min must be positive");
    if (c.new_host_min == 0) throw ConfigError("new_host_min must be at least 1");
    return c;
}

bool HostKnowledge::knows(const std::string& app_id, const std::string& host) const
{
    const auto it = hosts_.find(app_id);
    return it != hosts_.end() && it->second.count(host) != 0;
}

std::size_t HostKnowledge::size(const std::string& app_id) const
{
    const auto it = hosts_.find(app_id);
    return it == hosts_.end() ? 0 : it->second.size();
}

Tick NidsVerdict::first_evidence_tick() const
{
    Tick first = std::numeric_limits<Tick>::max();
    for (const auto& h : evidence) first = std::min(first, h.first_tick);
    return first;
}

FlowWindowStats summarize(const FlowWindow& window, const HostKnowledge& known)
{
    FlowWindowStats s;
    s.app_id = window.app_id;
    s.start = window.start;
    s.end = window.end;
    std::map<std::string, HostTraffic> by_host;
    for (const auto& f : window.flows) {
        auto [it, inserted] = by_host.try_emplace(f.dst_host);
        auto& h = it->second;
        if (inserted) {
            h.host = f.dst_host;
            h.first_tick = f.tick;
            h.is_new = !known.knows(window.app_id, f.dst_host);
        }
        h.up_bytes += f.up_bytes;
        h.down_bytes += f.down_bytes;
        ++h.flows;
        if (f.url) h.urls.push_back(*f.url);
        s.total_up += f.up_bytes;
        s.total_down += f.down_bytes;
    }
    for (auto& [host, traffic] : by_host) {
        if (traffic.is_new) ++s.new_hosts;
        s.hosts.push_back(std::move(traffic));
    }
    s.distinct_hosts = s.hosts.size();
    s.up_down_ratio = static_cast<double>(s.total_up) / static_cast<double>(std::max<std::uint64_t>(s.total_down, 1));
    return s;
}

namespace {

std::vector<HostTraffic> rank_by_upload(std::vector<HostTraffic> hosts)
{
    std::sort(hosts.begin(), hosts.end(), [](const HostTraffic& a, const HostTraffic& b) {
        if (a.up_bytes != b.up_bytes) return a.up_bytes > b.up_bytes;
        return a.host < b.host;
    });
    return hosts;
}

std::vector<HostTraffic> uploading_hosts(const FlowWindowStats& s)
{
    std::vector<HostTraffic> out;
    for (const auto& h : s.hosts)
        if (h.up_bytes > 0) out.push_back(h);
    return rank_by_upload(std::move(out));
}

}  // namespace

std::optional<NidsVerdict> score_flow_window(const FlowWindowStats& s, const MetricBaseline& up_baseline,
                                             DeviceState state, const NidsConfig& config)
{
    NidsVerdict v;
    v.tick = s.end == 0 ? 0 : s.end - 1;
    v.app_id = s.app_id;
    v.state = state;
    v.total_up = s.total_up;
    v.total_down = s.total_down;

    if (s.up_down_ratio >= config.exfil_ratio && s.total_up >= config.exfil_min_up) {
        v.rule = NidsRule::exfil_ratio;
        v.score = s.up_down_ratio;
        v.threshold = config.exfil_ratio;
        v.evidence = uploading_hosts(s);
        return v;
    }

    if (up_baseline.sample_count >= config.warmup_windows && s.total_up > 0) {
        const double z = up_baseline.z_score(static_cast<double>(s.total_up), config.up_sigma_min);
        const double threshold = config.z_threshold(state);
        if (z >= threshold) {
            v.rule = NidsRule::upload_anomaly;
            v.score = z;
            v.threshold = threshold;
            v.evidence = uploading_hosts(s);
            return v;
        }
    }

    if (state == DeviceState::idle && s.new_hosts >= config.new_host_min) {
        v.rule = NidsRule::new_host_idle;
        v.score = static_cast<double>(s.new_hosts);
        v.threshold = static_cast<double>(config.new_host_min);
        for (const auto& h : s.hosts)
            if (h.is_new) v.evidence.push_back(h);
        v.evidence = rank_by_upload(std::move(v.evidence));
        return v;
    }
    return std::nullopt;
}

HostKnowledge update_host_knowledge(HostKnowledge hosts, const FlowWindowStats& stats, bool had_verdict)
{
    if (had_verdict) return hosts;
    for (const auto& h : stats.hosts) hosts.learn(stats.app_id, h.host);
    return hosts;
}

NetworkDetector::NetworkDetector(NidsConfig config) : config_(std::move(config))
{
    if (config_.window_len == 0) throw ConfigError("window_len must be positive");
    cursor_.window_len = config_.window_len;
}

const MetricBaseline* NetworkDetector::baseline(const std::string& app_id) const
{
    const auto it = apps_.find(app_id);
    return it == apps_.end() ? nullptr : &it->second.up;
}

std::size_t NetworkDetector::buffered(const std::string& app_id) const
{
    const auto it = apps_.find(app_id);
    return it == apps_.end() ? 0 : it->second.window.flows.size();
}

std::vector<NidsVerdict> NetworkDetector::close_open_window(const Watchlist* watchlist)
{
    if (watchlist)
        for (const auto& [id, entry] : watchlist->entries()) apps_.try_emplace(id);

    std::vector<NidsVerdict> verdicts;
    const auto w = cursor_.open_window;
    for (auto& [id, app] : apps_) {
        const bool monitored = watchlist ? watchlist->is_monitored(id) : true;
        if (app.window.flows.empty() && !monitored) continue;
        app.window.app_id = id;
        app.window.start = cursor_.start_of(w);
        app.window.end = cursor_.end_of(w);
        const auto stats = summarize(app.window, known_);
        auto verdict = score_flow_window(stats, app.up, cursor_.state, config_);
        if (!verdict) app.up.observe(static_cast<double>(stats.total_up), 0.0, config_.alpha);
        known_ = update_host_knowledge(std::move(known_), stats, verdict.has_value());
        ++closed_windows_;
        if (verdict) {
            if (sink_) sink_->push(*verdict);
            verdicts.push_back(std::move(*verdict));
        }
        app.window.flows.clear();
    }
    ++cursor_.open_window;
    return verdicts;
}

std::vector<NidsVerdict> NetworkDetector::advance(Tick t, const Watchlist* watchlist)
{
    cursor_.observe(t);
    std::vector<NidsVerdict> out;
    while (cursor_.index(t) > cursor_.open_window) {
        auto closed = close_open_window(watchlist);
        out.insert(out.end(), std::make_move_iterator(closed.begin()), std::make_move_iterator(closed.end()));
    }
    return out;
}

std::vector<NidsVerdict> NetworkDetector::ingest(const FlowRecord& flow, const Watchlist& watchlist)
{
    if (flow.dst_host.empty()) throw Error("flow record without destination host");
    auto out = advance(flow.tick, &watchlist);
    ++received_;
    ++by_host_[flow.dst_host];
    if (watchlist.is_monitored(flow.app_id)) {
        ++accepted_;
        apps_[flow.app_id].window.flows.push_back(flow);
    }
    return out;
}

std::vector<NidsVerdict> NetworkDetector::end_tick(Tick t, DeviceState state, const Watchlist& watchlist)
{
    auto out = advance(t, &watchlist);
    cursor_.state = state;
    if (cursor_.is_last_tick_of_window(t)) {
        auto closed = close_open_window(&watchlist);
        out.insert(out.end(), std::make_move_iterator(closed.begin()), std::make_move_iterator(closed.end()));
    }
    cursor_.last_tick = t + 1;
    return out;
}

}  // namespace mindpres::nids

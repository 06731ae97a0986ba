#include "mindpres/hids.hpp"

#include <algorithm>
#include <limits>

#include "mindpres/error.hpp"

namespace mindpres::hids {

std::string_view to_string(HidsVerdictKind kind)
{
    return kind == HidsVerdictKind::suspicious_api ? "suspicious_api" : "resource_anomaly";
}

double HidsConfig::weight(ApiKind api) const
{
    const auto it = api_weights.find(api);
    return it == api_weights.end() ? 0.0 : it->second;
}

HidsConfig HidsConfig::from_json(const Json& j)
{
    HidsConfig c;
    try {
        c.window_len = j.value("window_len", c.window_len);
        c.alpha = j.value("alpha", c.alpha);
        c.cpu_sigma_min = j.value("cpu_sigma_min", c.cpu_sigma_min);
        c.mem_sigma_min = j.value("mem_sigma_min", c.mem_sigma_min);
        c.warmup_windows = j.value("warmup_windows", c.warmup_windows);
        c.z_active = j.value("z_active", c.z_active);
        c.z_idle = j.value("z_idle", c.z_idle);
        c.api_threshold = j.value("api_threshold", c.api_threshold);
        if (j.contains("api_weights"))
            for (const auto& [name, w] : j["api_weights"].items())
                c.api_weights[make_api_call(0, "x", name).api] = w.get<double>();
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("invalid HIDS config: ") + e.what());
    }
    if (c.window_len == 0) throw ConfigError("window_len must be positive");
    if (!(c.alpha > 0.0 && c.alpha <= 1.0)) throw ConfigError("alpha must lie in (0,1]");
    if (!(c.cpu_sigma_min > 0.0 && c.mem_sigma_min > 0.0)) throw ConfigError("sigma floors must be positive");
    return c;
}

Tick HidsVerdict::first_evidence_tick() const
{
    Tick first = std::numeric_limits<Tick>::max();
    for (const auto& s : samples) first = std::min(first, s.tick);
    for (const auto& a : api_calls) first = std::min(first, a.tick);
    return first;
}

namespace {

template <typename Get>
WindowMoments moments(const HidsWindow& w, Get get)
{
    WindowMoments m;
    if (w.samples.empty()) return m;
    for (const auto& s : w.samples) m.mean += get(s);
    m.mean /= static_cast<double>(w.samples.size());
    for (const auto& s : w.samples) {
        const double d = get(s) - m.mean;
        m.variance += d * d;
    }
    m.variance /= static_cast<double>(w.samples.size());
    return m;
}

}  // namespace

WindowMoments cpu_moments(const HidsWindow& w)
{
    return moments(w, [](const ResourceSample& s) { return s.cpu_pct; });
}

WindowMoments mem_moments(const HidsWindow& w)
{
    return moments(w, [](const ResourceSample& s) { return s.mem_mb; });
}

double api_score(const HidsWindow& w, const HidsConfig& config)
{
    double score = 0.0;
    for (const auto& call : w.api_calls) score += config.weight(call.api);
    return score;
}

std::optional<HidsVerdict> score_window(const HidsWindow& window, const ResourceBaseline& baseline,
                                        DeviceState state, const HidsConfig& config)
{
    HidsVerdict v;
    v.tick = window.end == 0 ? 0 : window.end - 1;
    v.app_id = window.app_id;
    v.state = state;

    if (!window.samples.empty() && baseline.windows() >= config.warmup_windows) {
        const double z_cpu = baseline.cpu.z_score(cpu_moments(window).mean, config.cpu_sigma_min);
        const double z_mem = baseline.mem.z_score(mem_moments(window).mean, config.mem_sigma_min);
        const double threshold = config.z_threshold(state);
        const double score = std::max(z_cpu, z_mem);
        if (score >= threshold) {
            v.kind = HidsVerdictKind::resource_anomaly;
            v.score = score;
            v.threshold = threshold;
            v.metric = z_mem > z_cpu ? "mem" : "cpu";
            v.samples = window.samples;
            v.api_calls = window.api_calls;
            return v;
        }
    }

    const double api = api_score(window, config);
    if (!window.api_calls.empty() && api >= config.api_threshold) {
        v.kind = HidsVerdictKind::suspicious_api;
        v.score = api;
        v.threshold = config.api_threshold;
        v.api_calls = window.api_calls;
        return v;
    }
    return std::nullopt;
}

ResourceBaseline update_baseline(ResourceBaseline baseline, const HidsWindow& window, bool had_verdict,
                                 const HidsConfig& config)
{
    if (had_verdict || window.samples.empty()) return baseline;
    const auto cpu = cpu_moments(window);
    const auto mem = mem_moments(window);
    baseline.cpu.observe(cpu.mean, cpu.variance, config.alpha);
    baseline.mem.observe(mem.mean, mem.variance, config.alpha);
    return baseline;
}

HostDetector::HostDetector(HidsConfig config) : config_(std::move(config))
{
    if (config_.window_len == 0) throw ConfigError("window_len must be positive");
    cursor_.window_len = config_.window_len;
}

const ResourceBaseline* HostDetector::baseline(const std::string& app_id) const
{
    const auto it = apps_.find(app_id);
    return it == apps_.end() ? nullptr : &it->second.baseline;
}

std::size_t HostDetector::buffered(const std::string& app_id) const
{
    const auto it = apps_.find(app_id);
    if (it == apps_.end()) return 0;
    return it->second.window.samples.size() + it->second.window.api_calls.size();
}

std::vector<HidsVerdict> HostDetector::close_open_window()
{
    std::vector<HidsVerdict> verdicts;
    const auto w = cursor_.open_window;
    for (auto& [id, app] : apps_) {
        if (app.window.empty()) continue;
        app.window.app_id = id;
        app.window.start = cursor_.start_of(w);
        app.window.end = cursor_.end_of(w);
        auto verdict = score_window(app.window, app.baseline, cursor_.state, config_);
        app.baseline = update_baseline(app.baseline, app.window, verdict.has_value(), config_);
        ++closed_windows_;
        if (verdict) {
            if (sink_) sink_->push(*verdict);
            verdicts.push_back(std::move(*verdict));
        }
        app.window.samples.clear();
        app.window.api_calls.clear();
    }
    ++cursor_.open_window;
    return verdicts;
}

std::vector<HidsVerdict> HostDetector::advance(Tick t)
{
    cursor_.observe(t);
    std::vector<HidsVerdict> out;
    while (cursor_.index(t) > cursor_.open_window) {
        auto closed = close_open_window();
        out.insert(out.end(), std::make_move_iterator(closed.begin()), std::make_move_iterator(closed.end()));
    }
    return out;
}

HostDetector::AppState* HostDetector::accept(Tick, const std::string& app_id, const Watchlist& watchlist)
{
    if (!watchlist.is_monitored(app_id)) {
        ++discarded_;
        return nullptr;
    }
    ++accepted_;
    return &apps_[app_id];
}

std::vector<HidsVerdict> HostDetector::ingest(const ApiCallEvent& event, const Watchlist& watchlist)
{
    auto out = advance(event.tick);
    if (auto* app = accept(event.tick, event.app_id, watchlist)) app->window.api_calls.push_back(event);
    return out;
}

std::vector<HidsVerdict> HostDetector::ingest(const ResourceSample& sample, const Watchlist& watchlist)
{
    auto out = advance(sample.tick);
    if (auto* app = accept(sample.tick, sample.app_id, watchlist)) app->window.samples.push_back(sample);
    return out;
}

std::vector<HidsVerdict> HostDetector::end_tick(Tick t, DeviceState state, const Watchlist&)
{
    auto out = advance(t);
    cursor_.state = state;
    if (cursor_.is_last_tick_of_window(t)) {
        auto closed = close_open_window();
        out.insert(out.end(), std::make_move_iterator(closed.begin()), std::make_move_iterator(closed.end()));
    }
    cursor_.last_tick = t + 1;
    return out;
}

}  // namespace mindpres::hids

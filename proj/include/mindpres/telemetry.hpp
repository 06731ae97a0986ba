#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <iosfwd>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mindpres/corpus.hpp"
#include "mindpres/evaluator.hpp"

namespace mindpres {

enum class DeviceState { active, idle };

std::string_view to_string(DeviceState state);
DeviceState device_state_from_string(std::string_view s);

// Detection taxonomy carried as metadata on every verdict.
enum class IdsType { host_based, network_based, hybrid };
enum class DetectionMethod { signature_based, anomaly_based, hybrid };

std::string_view to_string(IdsType type);
std::string_view to_string(DetectionMethod method);

enum class ApiKind { root_access, install_package, send_sms, read_contacts, exec_shell, other };

struct ApiCallEvent {
    Tick tick = 0;
    std::string app_id;
    ApiKind api = ApiKind::other;
    /// Original name when api == other.
    std::string other_token;

    std::string api_name() const;
    bool operator==(const ApiCallEvent&) const = default;
};

/// Recognised names map to their kind; anything else is `other`.
ApiCallEvent make_api_call(Tick tick, std::string app_id, std::string_view api);

struct ResourceSample {
    Tick tick = 0;
    std::string app_id;
    double cpu_pct = 0.0;
    double mem_mb = 0.0;

    bool operator==(const ResourceSample&) const = default;
};

struct FlowRecord {
    Tick tick = 0;
    std::string app_id;
    std::string dst_host;
    std::optional<std::string> url;
    std::uint64_t up_bytes = 0;
    std::uint64_t down_bytes = 0;

    bool operator==(const FlowRecord&) const = default;
};

using TelemetryEvent = std::variant<ApiCallEvent, ResourceSample, FlowRecord>;

Tick tick_of(const TelemetryEvent& event);
const std::string& app_of(const TelemetryEvent& event);

Json telemetry_to_json(const TelemetryEvent& event);
/// Throws Error on schema or range violations.
TelemetryEvent telemetry_from_json(const Json& j);
std::vector<TelemetryEvent> parse_telemetry_jsonl(std::istream& in);

/// Unbounded multi-producer/multi-consumer queue for handing verdicts to
/// another thread.
template <typename T>
class BlockingQueue {
public:
    void push(T value)
    {
        {
            std::lock_guard lock(mutex_);
            items_.push_back(std::move(value));
        }
        cv_.notify_one();
    }

    /// Blocks until an item is available or the queue is closed and drained.
    std::optional<T> pop()
    {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [this] { return closed_ || !items_.empty(); });
        if (items_.empty()) return std::nullopt;
        T value = std::move(items_.front());
        items_.pop_front();
        return value;
    }

    void close()
    {
        {
            std::lock_guard lock(mutex_);
            closed_ = true;
        }
        cv_.notify_all();
    }

private:
    std::mutex mutex_;
    std::condition_variable cv_;
    std::deque<T> items_;
    bool closed_ = false;
};

}  // namespace mindpres

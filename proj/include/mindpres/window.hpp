#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "mindpres/error.hpp"
#include "mindpres/evaluator.hpp"
#include "mindpres/telemetry.hpp"

namespace mindpres {

/// Tracks stream time for fixed windows [k*len, (k+1)*len).
struct WindowCursor {
    Tick window_len = 10;
    std::optional<Tick> last_tick;
    std::uint64_t open_window = 0;
    DeviceState state = DeviceState::active;

    /// Throws StreamOrderError if time goes backwards.
    void observe(Tick t)
    {
        if (last_tick && t < *last_tick)
            throw StreamOrderError("tick " + std::to_string(t) + " precedes " + std::to_string(*last_tick));
        last_tick = t;
    }

    std::uint64_t index(Tick t) const { return t / window_len; }
    Tick start_of(std::uint64_t w) const { return w * window_len; }
    Tick end_of(std::uint64_t w) const { return (w + 1) * window_len; }
    bool is_last_tick_of_window(Tick t) const { return (t + 1) % window_len == 0; }
};

}  // namespace mindpres

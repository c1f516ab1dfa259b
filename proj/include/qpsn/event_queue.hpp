#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace qpsn::sim {

/// Signed nanosecond span.
using Nanos = std::int64_t;

/// Absolute simulation time in integer nanoseconds; never negative.
struct SimTime {
    Nanos ns = 0;

    friend auto operator<=>(const SimTime&, const SimTime&) = default;
    friend SimTime operator+(SimTime t, Nanos d) { return SimTime{t.ns + d}; }
    friend Nanos operator-(SimTime a, SimTime b) { return a.ns - b.ns; }
};

struct TraceEntry {
    SimTime time;
    std::uint64_t seq = 0;
    std::string label;

    friend bool operator==(const TraceEntry&, const TraceEntry&) = default;
};

using Trace = std::vector<TraceEntry>;

/// One line per entry: "<time_ns> <seq> <label>".
std::string format_trace(const Trace& trace);

/// Deterministic discrete-event queue. Events fire in (time, insertion
/// sequence) order; actions may schedule further events at or after now().
class EventQueue {
public:
    using Action = std::function<void(EventQueue&)>;

    /// Throws std::logic_error when `at` precedes the current time.
    void schedule(SimTime at, std::string label, Action action = {});
    void schedule_in(Nanos delay, std::string label, Action action = {});

    SimTime now() const noexcept { return now_; }
    bool empty() const noexcept { return pending_.empty(); }
    std::size_t pending() const noexcept { return pending_.size(); }

    /// Drains the queue and returns the executed events in order.
    Trace run();

private:
    struct Pending {
        SimTime time;
        std::uint64_t seq;
        std::string label;
        Action action;
    };
    struct Later {
        bool operator()(const Pending& a, const Pending& b) const
        {
            return a.time != b.time ? a.time > b.time : a.seq > b.seq;
        }
    };

    std::vector<Pending> pending_;  // min-heap under Later
    SimTime now_{};
    std::uint64_t next_seq_ = 0;
};

}  // namespace qpsn::sim

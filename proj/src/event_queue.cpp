#include "qpsn/event_queue.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace qpsn::sim {

std::string format_trace(const Trace& trace)
{
    std::ostringstream os;
    for (const auto& e : trace) {
        os << e.time.ns << ' ' << e.seq << ' ' << e.label << '\n';
    }
    return os.str();
}

void EventQueue::schedule(SimTime at, std::string label, Action action)
{
    if (at < now_) {
        throw std::logic_error("cannot schedule '" + label + "' at " + std::to_string(at.ns) +
                               " ns, before the current time " + std::to_string(now_.ns) + " ns");
    }
    pending_.push_back(Pending{at, next_seq_++, std::move(label), std::move(action)});
    std::push_heap(pending_.begin(), pending_.end(), Later{});
}

void EventQueue::schedule_in(Nanos delay, std::string label, Action action)
{
    schedule(now_ + delay, std::move(label), std::move(action));
}

Trace EventQueue::run()
{
    Trace trace;
    while (!pending_.empty()) {
        std::pop_heap(pending_.begin(), pending_.end(), Later{});
        Pending ev = std::move(pending_.back());
        pending_.pop_back();
        now_ = ev.time;
        trace.push_back(TraceEntry{ev.time, ev.seq, ev.label});
        if (ev.action) {
            ev.action(*this);
        }
    }
    return trace;
}

}  // namespace qpsn::sim

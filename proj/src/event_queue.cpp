#include "vpnsim/event_queue.hpp"

#include "vpnsim/error.hpp"

namespace vpnsim {

std::string_view to_string(EventKind kind)
{
    switch (kind) {
    case EventKind::packet_arrival: return "packet-arrival";
    case EventKind::transmit_complete: return "transmit-complete";
    case EventKind::traffic_tick: return "traffic-tick";
    case EventKind::link_failure: return "link-failure";
    case EventKind::link_restore: return "link-restore";
    case EventKind::discovery_timeout: return "discovery-timeout";
    case EventKind::metrics_sample: return "metrics-sample";
    case EventKind::sim_end: return "sim-end";
    }
    return "unknown";
}

std::uint64_t EventQueue::schedule(SimTime time, EventKind kind, EventPayload payload)
{
    if (time < now_) {
        throw InvalidArgument("cannot schedule " + std::string(to_string(kind)) + " at " + format_seconds(time) +
                              " s, before now (" + format_seconds(now_) + " s)");
    }
    const std::uint64_t seq = next_seq_++;
    heap_.push(Event{time, seq, kind, std::move(payload)});
    return seq;
}

std::optional<Event> EventQueue::step()
{
    if (heap_.empty()) {
        return std::nullopt;
    }
    Event e = heap_.top();
    heap_.pop();
    now_ = e.time;
    return e;
}

std::optional<SimTime> EventQueue::next_time() const
{
    if (heap_.empty()) {
        return std::nullopt;
    }
    return heap_.top().time;
}

std::size_t EventQueue::run_until(SimTime until, const std::function<bool(const Event&)>& handler)
{
    std::size_t processed = 0;
    while (!heap_.empty() && heap_.top().time <= until) {
        Event e = *step();
        ++processed;
        if (!handler(e)) {
            return processed;
        }
    }
    if (until > now_) {
        now_ = until;
    }
    return processed;
}

}  // namespace vpnsim

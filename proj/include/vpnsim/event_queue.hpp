#pragma once

#include "vpnsim/sim_time.hpp"
#include "vpnsim/topology.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <queue>
#include <string_view>
#include <variant>
#include <vector>

namespace vpnsim {

using PacketId = std::uint64_t;

enum class EventKind {
    packet_arrival,
    transmit_complete,
    traffic_tick,
    link_failure,
    link_restore,
    discovery_timeout,
    metrics_sample,
    sim_end,
};

std::string_view to_string(EventKind kind);

struct ArrivalPayload {
    PacketId packet = 0;
    NodeId from;
    NodeId to;
};

struct TransmitCompletePayload {
    NodeId from;
    NodeId to;
};

struct TrafficTickPayload {
    std::size_t flow = 0;
    std::uint64_t index = 0;
};

struct LinkPayload {
    LinkKey link;
};

struct DiscoveryTimeoutPayload {
    NodeId node;
    NodeId dest;
    std::uint32_t rreq_id = 0;
};

using EventPayload = std::variant<std::monostate, ArrivalPayload, TransmitCompletePayload, TrafficTickPayload,
                                  LinkPayload, DiscoveryTimeoutPayload>;

struct Event {
    SimTime time;
    std::uint64_t seq = 0;  // assigned by the queue
    EventKind kind = EventKind::sim_end;
    EventPayload payload;
};

/// Time-ordered queue; events at equal times come out in insertion order.
class EventQueue {
public:
    /// Throws InvalidArgument when `time` precedes now(). Returns the
    /// assigned sequence number.
    std::uint64_t schedule(SimTime time, EventKind kind, EventPayload payload = {});

    /// Pops the next event and advances now() to its time.
    std::optional<Event> step();

    /// Processes every event with time <= `until` through `handler`, then
    /// leaves now() at `until` (unless the handler stopped early).
    std::size_t run_until(SimTime until, const std::function<bool(const Event&)>& handler);

    SimTime now() const { return now_; }
    bool empty() const { return heap_.empty(); }
    std::size_t size() const { return heap_.size(); }
    std::optional<SimTime> next_time() const;

private:
    struct Later {
        bool operator()(const Event& a, const Event& b) const
        {
            return a.time != b.time ? a.time > b.time : a.seq > b.seq;
        }
    };

    std::priority_queue<Event, std::vector<Event>, Later> heap_;
    std::uint64_t next_seq_ = 0;
    SimTime now_;
};

}  // namespace vpnsim

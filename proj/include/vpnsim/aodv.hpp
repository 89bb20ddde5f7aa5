#pragma once

// On-demand distance-vector route discovery.
//
// Every operation is a deterministic transition (state, message, now) ->
// actions. The caller (the simulation kernel) owns transport: it delivers
// returned control messages over links and feeds received ones back in.
//
// Freshness rule: an intermediate node answers an RREQ only when its table
// holds a destination sequence number strictly greater than the one carried
// in the request; an equal or older number means the request is relayed.

#include "vpnsim/sim_time.hpp"
#include "vpnsim/topology.hpp"

#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <utility>
#include <variant>
#include <vector>

namespace vpnsim::aodv {

using SeqNo = std::uint32_t;

struct Config {
    SimTime route_lifetime = SimTime::from_seconds(10.0);
    SimTime discovery_timeout = SimTime::from_seconds(1.0);
    int rreq_retries = 2;
    std::size_t pending_capacity = 64;
    std::size_t seen_cache_capacity = 1024;
    // Wire sizes in bytes, used for delay and energy accounting.
    std::uint32_t rreq_size = 24;
    std::uint32_t rrep_size = 20;
    std::uint32_t rerr_base_size = 12;
    std::uint32_t rerr_per_dest_size = 8;

    bool operator==(const Config&) const = default;
};

struct RouteEntry {
    NodeId dest;
    NodeId next_hop;
    std::uint32_t hop_count = 1;
    SeqNo dest_seq = 0;
    SimTime expiry;
    bool active = false;
    std::set<NodeId> precursors;

    bool usable(SimTime now) const { return active && now < expiry; }
};

struct Rreq {
    NodeId origin;
    SeqNo origin_seq = 0;
    std::uint32_t rreq_id = 0;
    NodeId dest;
    SeqNo dest_seq_known = 0;
    std::uint32_t hop_count = 1;  // hops from origin to the receiver
};

struct Rrep {
    NodeId origin;  // originator of the RREQ being answered
    NodeId dest;
    SeqNo dest_seq = 0;
    std::uint32_t hop_count = 1;  // hops from the receiver to dest
    SimTime lifetime;
};

struct Unreachable {
    NodeId dest;
    SeqNo dest_seq = 0;
};

struct Rerr {
    std::vector<Unreachable> unreachable;
};

using Message = std::variant<Rreq, Rrep, Rerr>;

std::uint32_t wire_size(const Message& m, const Config& cfg);

/// A unicast control transmission.
struct Send {
    NodeId to;
    Message message;
};

/// Opaque handle of a data packet waiting for a route.
struct PendingPacket {
    std::uint64_t id = 0;
    NodeId dest;
};

class NodeProtocolState {
public:
    NodeProtocolState(NodeId self, Config config) : self_(self), config_(config) {}

    NodeId self() const { return self_; }
    const Config& config() const { return config_; }
    SeqNo own_seq() const { return own_seq_; }
    std::uint32_t last_rreq_id() const { return next_rreq_id_ - 1; }

    const std::map<NodeId, RouteEntry>& table() const { return table_; }
    const RouteEntry* entry(NodeId dest) const;
    std::size_t pending_count() const { return pending_.size(); }
    const std::deque<PendingPacket>& pending() const { return pending_; }
    bool discovering(NodeId dest) const { return discoveries_.contains(dest); }

    // Test hook for seeding table state directly.
    void install(RouteEntry e) { table_[e.dest] = std::move(e); }

private:
    friend struct Access;

    NodeId self_;
    Config config_;
    std::map<NodeId, RouteEntry> table_;
    SeqNo own_seq_ = 0;
    std::uint32_t next_rreq_id_ = 1;
    std::set<std::pair<NodeId, std::uint32_t>> seen_;
    std::deque<std::pair<NodeId, std::uint32_t>> seen_order_;
    std::deque<PendingPacket> pending_;

    struct Discovery {
        std::uint32_t rreq_id = 0;
        int retries_left = 0;
    };
    std::map<NodeId, Discovery> discoveries_;
};

struct OriginateResult {
    std::optional<NodeId> next_hop;          // existing route; nothing emitted
    std::optional<Rreq> broadcast;           // new discovery flood
    std::vector<PendingPacket> dropped;      // evicted from a full buffer
};

/// Looks for a route to `dest`; without one, buffers `data` (if any) and
/// starts a discovery unless one is already outstanding.
OriginateResult originate_rreq(NodeProtocolState& state, NodeId dest, SimTime now,
                               std::optional<PendingPacket> data = std::nullopt);

struct RreqResult {
    enum class Kind { drop, reply, rebroadcast } kind = Kind::drop;
    std::optional<Send> reply;     // Rrep back toward `from`
    std::optional<Rreq> relay;     // rebroadcast copy, hop_count already bumped
};

RreqResult process_rreq(NodeProtocolState& state, const Rreq& rreq, NodeId from, SimTime now);

struct RrepResult {
    enum class Kind { forward, deliver, ignore, no_reverse_route } kind = Kind::ignore;
    std::optional<Send> forward;
    std::vector<PendingPacket> flushed;  // buffered data now routable (at origin)
    std::optional<NodeId> next_hop;      // forward route next hop after install
};

RrepResult process_rrep(NodeProtocolState& state, const Rrep& rrep, NodeId from, SimTime now);

/// `neighbor` is the far end of a link this node just lost.
std::vector<Send> handle_link_break(NodeProtocolState& state, NodeId neighbor, SimTime now);

std::vector<Send> process_rerr(NodeProtocolState& state, const Rerr& rerr, NodeId from, SimTime now);

std::optional<NodeId> lookup_route(const NodeProtocolState& state, NodeId dest, SimTime now);

/// Refreshes the lifetime of a route being used and records `upstream`
/// (when given) as a precursor.
void use_route(NodeProtocolState& state, NodeId dest, SimTime now, std::optional<NodeId> upstream);

struct TimeoutResult {
    std::optional<Rreq> broadcast;       // retry
    std::vector<PendingPacket> dropped;  // gave up on these
    std::vector<PendingPacket> flushed;  // a route appeared meanwhile
    std::optional<NodeId> next_hop;
};

/// Fired by the kernel `discovery_timeout` after a flood went out. Stale
/// timeouts (a newer rreq_id, or the discovery already finished) do nothing.
TimeoutResult discovery_timeout(NodeProtocolState& state, NodeId dest, std::uint32_t rreq_id, SimTime now);

}  // namespace vpnsim::aodv

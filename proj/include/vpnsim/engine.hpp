#pragma once

// Discrete-event kernel. One Simulator is one run: it owns the topology
// copy, per-node protocol state, per-directed-link FIFO transmitters and
// the metrics collector. Nothing in here is shared between runs.
//
// Transmission model: a packet handed to a directed link waits until the
// transmitter is free, occupies it for size*8/bandwidth (rounded to the
// nearest nanosecond) and arrives prop_delay later. The FIFO holds at most
// queue_capacity packets including the one on the air; beyond that the
// packet is dropped. A packet whose link is down when it would arrive is
// lost.

#include "vpnsim/aodv.hpp"
#include "vpnsim/event_queue.hpp"
#include "vpnsim/metrics.hpp"
#include "vpnsim/policy.hpp"
#include "vpnsim/topology.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace vpnsim {

enum class Routing { aodv, policy };

struct TrafficFlow {
    std::string name;
    NodeId src;
    NodeId dst;
    std::uint32_t packet_size = 512;  // bytes
    SimTime interval;
    SimTime start;
    SimTime stop;
    std::optional<std::uint64_t> count;
    SimTime jitter;  // start offset drawn uniformly from [0, jitter) per run
    Routing routing = Routing::aodv;
    std::vector<std::string> candidates;  // policy only; empty = every path
    std::optional<double> demand_bps;     // policy only; defaults to the CBR rate

    double demand() const;
};

void validate_flow(const TrafficFlow& flow);

/// Send instant of the index-th packet (start + offset + index * interval).
SimTime cbr_send_time(const TrafficFlow& flow, SimTime offset, std::uint64_t index);

/// Every send instant of a flow, honouring stop and count.
std::vector<SimTime> generate_cbr_traffic(const TrafficFlow& flow, SimTime offset = {});

struct FailureEvent {
    LinkKey link;
    SimTime at;
    std::optional<SimTime> restore_at;
};

/// Per-byte and per-packet radio costs in picojoules. Integer units keep
/// the ledger exact.
struct EnergyModel {
    std::int64_t tx_pj_per_byte = 50'000;
    std::int64_t rx_pj_per_byte = 50'000;
    std::int64_t overhead_pj_per_packet = 20'000'000;

    std::int64_t tx_cost(std::uint32_t bytes) const { return overhead_pj_per_packet + tx_pj_per_byte * bytes; }
    std::int64_t rx_cost(std::uint32_t bytes) const { return overhead_pj_per_packet + rx_pj_per_byte * bytes; }

    bool operator==(const EnergyModel&) const = default;
};

SimTime serialization_delay(std::uint32_t bytes, double bandwidth_bps);

struct SimConfig {
    Topology topology;
    std::vector<policy::CandidatePath> paths;
    std::vector<TrafficFlow> flows;
    std::vector<FailureEvent> failures;
    EnergyModel energy;
    aodv::Config aodv;
    SimTime duration = SimTime::from_seconds(10.0);
    SimTime sample_interval = SimTime::from_seconds(0.5);
    std::uint64_t seed = 0;
    std::optional<std::string> measured_flow;
    bool trace = false;
};

enum class PacketKind { data, rreq, rrep, rerr };

std::string_view to_string(PacketKind kind);

struct Packet {
    PacketId id = 0;
    PacketKind kind = PacketKind::data;
    NodeId src;
    NodeId dst;
    std::uint32_t size = 0;
    SimTime created_at;
    std::optional<SimTime> delivered_at;
    std::string path_label;
    std::size_t flow = 0;
    std::vector<NodeId> route;  // source route, empty when hop-by-hop
    std::size_t hop = 0;        // index of the current holder in `route`
    std::optional<aodv::Message> control;
};

inline constexpr const char* kAodvLabel = "aodv";

class Simulator {
public:
    explicit Simulator(SimConfig config);

    Simulator(const Simulator&) = delete;
    Simulator& operator=(const Simulator&) = delete;

    /// Runs to the configured duration and returns the finalized report.
    metrics::MetricsReport run();

    /// Processes one event; false once the queue is empty or sim-end passed.
    bool step();
    std::size_t run_until(SimTime t);

    /// Link state change at `at` (ignored when it lands after sim-end).
    void inject_failure(LinkKey link, SimTime at);
    void inject_restore(LinkKey link, SimTime at);

    SimTime now() const { return queue_.now(); }
    bool finished() const { return finished_; }
    const Topology& topology() const { return topo_; }
    const aodv::NodeProtocolState& protocol(NodeId node) const { return nodes_.at(node.value); }
    const policy::PathTable& path_table(std::size_t flow) const { return tables_.at(flow); }
    const std::vector<std::string>& trace() const { return trace_; }
    std::int64_t energy_ledger_pj() const { return energy_pj_; }
    const std::vector<std::string>& violations() const { return violations_; }
    std::size_t in_flight() const { return packets_.size(); }
    metrics::MetricsReport report() const { return collector_.finalize(); }

private:
    struct Transmitter {
        SimTime busy_until;
        std::size_t occupancy = 0;
    };

    bool dispatch(const Event& e);
    void on_tick(const TrafficTickPayload& p);
    void on_arrival(const ArrivalPayload& p);
    void on_control(Packet pkt, NodeId from, NodeId at);
    void on_link_failure(LinkKey link);
    void on_link_restore(LinkKey link);
    void on_discovery_timeout(const DiscoveryTimeoutPayload& p);
    void on_sample();

    PacketId new_control(NodeId from, NodeId to, aodv::Message msg);
    void send_control(NodeId from, const aodv::Send& s);
    void flood(NodeId from, const aodv::Rreq& rreq);
    void route_from_source(PacketId id);
    void release_pending(NodeId node, const std::vector<aodv::PendingPacket>& flushed, NodeId next_hop);
    void transmit(PacketId id, NodeId from, NodeId to);
    void drop(PacketId id, NodeId at, const char* reason);
    void link_broken(NodeId node, NodeId neighbor);
    void debit(PacketId id, std::int64_t pj);

    void log(const char* kind, std::optional<NodeId> node, std::optional<PacketId> pkt, const std::string& detail);

    SimConfig cfg_;
    Topology topo_;
    std::vector<aodv::NodeProtocolState> nodes_;
    std::vector<policy::PathTable> tables_;  // one per flow (empty for AODV flows)
    std::map<std::string, std::vector<LinkKey>> path_links_;
    std::map<LinkKey, std::string> link_names_;
    std::vector<SimTime> offsets_;
    EventQueue queue_;
    metrics::MetricsCollector collector_;
    std::map<PacketId, Packet> packets_;  // live packets only
    std::map<std::pair<NodeId, NodeId>, Transmitter> tx_;
    PacketId next_packet_ = 1;
    std::int64_t energy_pj_ = 0;
    SimTime last_sample_;
    bool finished_ = false;
    std::vector<std::string> trace_;
    std::vector<std::string> violations_;
};

}  // namespace vpnsim

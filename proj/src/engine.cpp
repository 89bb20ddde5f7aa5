#include "vpnsim/engine.hpp"

#include "vpnsim/error.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace vpnsim {

double TrafficFlow::demand() const
{
    if (demand_bps) {
        return *demand_bps;
    }
    return static_cast<double>(packet_size) * 8.0 / interval.seconds();
}

void validate_flow(const TrafficFlow& flow)
{
    if (flow.src == flow.dst) {
        throw InvalidArgument("flow '" + flow.name + "': source equals destination");
    }
    if (flow.packet_size == 0) {
        throw InvalidArgument("flow '" + flow.name + "': packet size must be positive");
    }
    if (flow.interval <= SimTime{}) {
        throw InvalidArgument("flow '" + flow.name + "': interval must be positive");
    }
    if (flow.start < SimTime{} || !(flow.start < flow.stop)) {
        throw InvalidArgument("flow '" + flow.name + "': need 0 <= start < stop");
    }
    if (flow.jitter < SimTime{}) {
        throw InvalidArgument("flow '" + flow.name + "': jitter must be >= 0");
    }
    if (flow.demand_bps && !(*flow.demand_bps >= 0.0)) {
        throw InvalidArgument("flow '" + flow.name + "': demand must be >= 0");
    }
}

SimTime cbr_send_time(const TrafficFlow& flow, SimTime offset, std::uint64_t index)
{
    return flow.start + offset + flow.interval * static_cast<std::int64_t>(index);
}

std::vector<SimTime> generate_cbr_traffic(const TrafficFlow& flow, SimTime offset)
{
    validate_flow(flow);
    std::vector<SimTime> out;
    for (std::uint64_t i = 0;; ++i) {
        if (flow.count && i >= *flow.count) {
            break;
        }
        const SimTime t = cbr_send_time(flow, offset, i);
        if (t >= flow.stop) {
            break;
        }
        out.push_back(t);
    }
    return out;
}

SimTime serialization_delay(std::uint32_t bytes, double bandwidth_bps)
{
    return SimTime(std::llround(static_cast<double>(bytes) * 8.0 * 1e9 / bandwidth_bps));
}

std::string_view to_string(PacketKind kind)
{
    switch (kind) {
    case PacketKind::data: return "data";
    case PacketKind::rreq: return "rreq";
    case PacketKind::rrep: return "rrep";
    case PacketKind::rerr: return "rerr";
    }
    return "unknown";
}

namespace {

PacketKind kind_of(const aodv::Message& m)
{
    if (std::holds_alternative<aodv::Rreq>(m)) {
        return PacketKind::rreq;
    }
    if (std::holds_alternative<aodv::Rrep>(m)) {
        return PacketKind::rrep;
    }
    return PacketKind::rerr;
}

std::string pick_measured(const SimConfig& cfg)
{
    if (cfg.measured_flow) {
        for (const auto& f : cfg.flows) {
            if (f.name == *cfg.measured_flow) {
                return f.name;
            }
        }
        throw ScenarioError("measured flow '" + *cfg.measured_flow + "' is not a flow");
    }
    for (const auto& f : cfg.flows) {
        if (f.routing == Routing::policy) {
            return f.name;
        }
    }
    return cfg.flows.empty() ? std::string() : cfg.flows.front().name;
}

metrics::MetricsCollector make_collector(const SimConfig& cfg)
{
    std::vector<std::string> flows, paths, links;
    std::set<std::string> seen;
    for (const auto& f : cfg.flows) {
        if (!seen.insert(f.name).second) {
            throw ScenarioError("duplicate flow name '" + f.name + "'");
        }
        flows.push_back(f.name);
    }
    seen.clear();
    for (const auto& p : cfg.paths) {
        if (p.path.label == kAodvLabel || !seen.insert(p.path.label).second) {
            throw ScenarioError("path label '" + p.path.label + "' is reserved or duplicated");
        }
        paths.push_back(p.path.label);
    }
    paths.emplace_back(kAodvLabel);
    for (const auto& l : cfg.topology.links()) {
        links.push_back(cfg.topology.describe(l.key));
    }
    return metrics::MetricsCollector(flows, paths, links, pick_measured(cfg));
}

std::uint64_t mix(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace

Simulator::Simulator(SimConfig config)
    : cfg_(std::move(config)), topo_(cfg_.topology), collector_(make_collector(cfg_))
{
    if (cfg_.duration <= SimTime{} || cfg_.sample_interval <= SimTime{}) {
        throw InvalidArgument("duration and sample interval must be positive");
    }
    for (const auto& n : topo_.nodes()) {
        nodes_.emplace_back(n.id, cfg_.aodv);
    }
    for (const auto& l : topo_.links()) {
        link_names_[l.key] = topo_.describe(l.key);
    }
    for (const auto& c : cfg_.paths) {
        if (!validate_path(topo_, c.path)) {
            throw ScenarioError("candidate path '" + c.path.label + "' is not a valid path in the topology");
        }
        if (!(c.allocated_bps > 0.0)) {
            throw ScenarioError("candidate path '" + c.path.label + "' needs a positive allocated bandwidth");
        }
        path_links_[c.path.label] = topo_.path_links(c.path);
    }

    std::mt19937_64 rng(mix(cfg_.seed));
    for (std::size_t i = 0; i < cfg_.flows.size(); ++i) {
        const TrafficFlow& f = cfg_.flows[i];
        validate_flow(f);
        topo_.node(f.src);
        topo_.node(f.dst);
        policy::PathTable table;
        if (f.routing == Routing::policy) {
            for (const auto& c : cfg_.paths) {
                const bool joins = c.path.hops.front() == f.src && c.path.hops.back() == f.dst;
                const bool named = std::find(f.candidates.begin(), f.candidates.end(), c.path.label) !=
                                   f.candidates.end();
                if (f.candidates.empty() ? !joins : !named) {
                    continue;
                }
                if (!joins) {
                    throw ScenarioError("flow '" + f.name + "': candidate '" + c.path.label +
                                        "' does not join its source and destination");
                }
                table.candidates.push_back(c);
            }
            for (const auto& label : f.candidates) {
                if (!table.index_of(label)) {
                    throw ScenarioError("flow '" + f.name + "' names unknown path '" + label + "'");
                }
            }
            table.selected = policy::select_path(table, f.demand());
        }
        tables_.push_back(std::move(table));
        const std::int64_t span = f.jitter.ns();
        offsets_.push_back(span > 0 ? SimTime(static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(span)))
                                    : SimTime{});
    }

    for (SimTime t = cfg_.sample_interval; t <= cfg_.duration; t += cfg_.sample_interval) {
        queue_.schedule(t, EventKind::metrics_sample);
    }
    queue_.schedule(cfg_.duration, EventKind::sim_end);
    for (std::size_t i = 0; i < cfg_.flows.size(); ++i) {
        const TrafficFlow& f = cfg_.flows[i];
        if ((!f.count || *f.count > 0) && cbr_send_time(f, offsets_[i], 0) < f.stop) {
            queue_.schedule(cbr_send_time(f, offsets_[i], 0), EventKind::traffic_tick, TrafficTickPayload{i, 0});
        }
    }
    for (const auto& fe : cfg_.failures) {
        inject_failure(fe.link, fe.at);
        if (fe.restore_at) {
            inject_restore(fe.link, *fe.restore_at);
        }
    }
}

void Simulator::inject_failure(LinkKey link, SimTime at)
{
    topo_.link(link);
    queue_.schedule(at, EventKind::link_failure, LinkPayload{link});
}

void Simulator::inject_restore(LinkKey link, SimTime at)
{
    topo_.link(link);
    queue_.schedule(at, EventKind::link_restore, LinkPayload{link});
}

metrics::MetricsReport Simulator::run()
{
    while (step()) {
    }
    return collector_.finalize();
}

bool Simulator::step()
{
    if (finished_) {
        return false;
    }
    auto e = queue_.step();
    if (!e) {
        finished_ = true;
        return false;
    }
    return dispatch(*e);
}

std::size_t Simulator::run_until(SimTime t)
{
    if (finished_) {
        return 0;
    }
    return queue_.run_until(t, [this](const Event& e) { return dispatch(e); });
}

bool Simulator::dispatch(const Event& e)
{
    switch (e.kind) {
    case EventKind::packet_arrival: on_arrival(std::get<ArrivalPayload>(e.payload)); break;
    case EventKind::transmit_complete: {
        const auto& p = std::get<TransmitCompletePayload>(e.payload);
        --tx_.at({p.from, p.to}).occupancy;
        break;
    }
    case EventKind::traffic_tick: on_tick(std::get<TrafficTickPayload>(e.payload)); break;
    case EventKind::link_failure: on_link_failure(std::get<LinkPayload>(e.payload).link); break;
    case EventKind::link_restore: on_link_restore(std::get<LinkPayload>(e.payload).link); break;
    case EventKind::discovery_timeout: on_discovery_timeout(std::get<DiscoveryTimeoutPayload>(e.payload)); break;
    case EventKind::metrics_sample: on_sample(); break;
    case EventKind::sim_end:
        log("end", std::nullopt, std::nullopt, "in_flight=" + std::to_string(packets_.size()));
        finished_ = true;
        return false;
    }
    return true;
}

void Simulator::log(const char* kind, std::optional<NodeId> node, std::optional<PacketId> pkt,
                    const std::string& detail)
{
    if (!cfg_.trace) {
        return;
    }
    std::string line = std::to_string(now().ns());
    line += '\t';
    line += kind;
    line += '\t';
    line += node ? topo_.name(*node) : "-";
    line += '\t';
    line += pkt ? std::to_string(*pkt) : "-";
    line += '\t';
    line += detail;
    trace_.push_back(std::move(line));
}

void Simulator::on_tick(const TrafficTickPayload& p)
{
    const TrafficFlow& f = cfg_.flows[p.flow];
    const policy::PathTable& table = tables_[p.flow];

    Packet pkt;
    pkt.id = next_packet_++;
    pkt.kind = PacketKind::data;
    pkt.src = f.src;
    pkt.dst = f.dst;
    pkt.size = f.packet_size;
    pkt.created_at = now();
    pkt.flow = p.flow;
    if (const auto* sel = table.selected_path()) {
        pkt.path_label = sel->path.label;
        pkt.route = sel->path.hops;
    } else {
        pkt.path_label = kAodvLabel;
    }
    collector_.record_send(metrics::PacketTag{pkt.id, true, f.name, pkt.path_label, pkt.created_at});
    log("send", f.src, pkt.id,
        "flow=" + f.name + " path=" + pkt.path_label + " size=" + std::to_string(pkt.size) +
            " dst=" + topo_.name(f.dst));
    const PacketId id = pkt.id;
    packets_.emplace(id, std::move(pkt));
    route_from_source(id);

    const std::uint64_t next = p.index + 1;
    if (!f.count || next < *f.count) {
        const SimTime t = cbr_send_time(f, offsets_[p.flow], next);
        if (t < f.stop) {
            queue_.schedule(t, EventKind::traffic_tick, TrafficTickPayload{p.flow, next});
        }
    }
}

void Simulator::route_from_source(PacketId id)
{
    Packet& pkt = packets_.at(id);
    if (!pkt.route.empty()) {
        transmit(id, pkt.route[0], pkt.route[1]);
        return;
    }
    aodv::NodeProtocolState& state = nodes_[pkt.src.value];
    auto r = aodv::originate_rreq(state, pkt.dst, now(), aodv::PendingPacket{id, pkt.dst});
    if (r.next_hop) {
        aodv::use_route(state, pkt.dst, now(), std::nullopt);
        transmit(id, pkt.src, *r.next_hop);
        return;
    }
    for (const auto& d : r.dropped) {
        drop(d.id, pkt.src, "buffer-full");
    }
    if (r.broadcast) {
        flood(state.self(), *r.broadcast);
        queue_.schedule(now() + cfg_.aodv.discovery_timeout, EventKind::discovery_timeout,
                        DiscoveryTimeoutPayload{state.self(), r.broadcast->dest, r.broadcast->rreq_id});
    }
}

void Simulator::on_arrival(const ArrivalPayload& p)
{
    auto it = packets_.find(p.packet);
    if (it == packets_.end()) {
        throw Error("arrival of unknown packet " + std::to_string(p.packet));
    }
    if (!topo_.is_up(p.from, p.to)) {
        drop(p.packet, p.to, "link-down");
        return;
    }
    Packet& pkt = it->second;
    log("rx", p.to, pkt.id,
        "from=" + topo_.name(p.from) + " type=" + std::string(to_string(pkt.kind)) +
            " size=" + std::to_string(pkt.size));
    debit(pkt.id, cfg_.energy.rx_cost(pkt.size));

    if (pkt.kind != PacketKind::data) {
        Packet copy = std::move(pkt);
        collector_.record_receive(copy.id, now());
        packets_.erase(it);
        on_control(std::move(copy), p.from, p.to);
        return;
    }

    if (p.to == pkt.dst) {
        pkt.delivered_at = now();
        collector_.record_receive(pkt.id, now());
        log("deliver", p.to, pkt.id, "flow=" + cfg_.flows[pkt.flow].name + " path=" + pkt.path_label);
        packets_.erase(it);
        return;
    }

    if (!pkt.route.empty()) {
        ++pkt.hop;
        if (pkt.hop + 1 >= pkt.route.size() || pkt.route[pkt.hop] != p.to) {
            throw Error("source-routed packet " + std::to_string(pkt.id) + " off its route");
        }
        transmit(pkt.id, p.to, pkt.route[pkt.hop + 1]);
        return;
    }

    aodv::NodeProtocolState& state = nodes_[p.to.value];
    if (auto next = aodv::lookup_route(state, pkt.dst, now())) {
        aodv::use_route(state, pkt.dst, now(), p.from);
        transmit(pkt.id, p.to, *next);
    } else {
        drop(pkt.id, p.to, "no-route");
    }
}

void Simulator::on_control(Packet pkt, NodeId from, NodeId at)
{
    aodv::NodeProtocolState& state = nodes_[at.value];
    const aodv::Message& msg = *pkt.control;
    if (const auto* rreq = std::get_if<aodv::Rreq>(&msg)) {
        auto r = aodv::process_rreq(state, *rreq, from, now());
        if (r.reply) {
            send_control(at, *r.reply);
        }
        if (r.relay) {
            flood(at, *r.relay);
        }
    } else if (const auto* rrep = std::get_if<aodv::Rrep>(&msg)) {
        auto r = aodv::process_rrep(state, *rrep, from, now());
        if (r.forward) {
            send_control(at, *r.forward);
        }
        if (!r.flushed.empty()) {
            release_pending(at, r.flushed, *r.next_hop);
        }
    } else {
        for (const auto& s : aodv::process_rerr(state, std::get<aodv::Rerr>(msg), from, now())) {
            send_control(at, s);
        }
    }
}

void Simulator::release_pending(NodeId node, const std::vector<aodv::PendingPacket>& flushed, NodeId next_hop)
{
    for (const auto& pp : flushed) {
        aodv::use_route(nodes_[node.value], pp.dest, now(), std::nullopt);
        transmit(pp.id, node, next_hop);
    }
}

PacketId Simulator::new_control(NodeId from, NodeId to, aodv::Message msg)
{
    Packet pkt;
    pkt.id = next_packet_++;
    pkt.kind = kind_of(msg);
    pkt.src = from;
    pkt.dst = to;
    pkt.size = aodv::wire_size(msg, cfg_.aodv);
    pkt.created_at = now();
    pkt.control = std::move(msg);
    collector_.record_send(metrics::PacketTag{pkt.id, false, {}, {}, pkt.created_at});
    const PacketId id = pkt.id;
    packets_.emplace(id, std::move(pkt));
    return id;
}

void Simulator::send_control(NodeId from, const aodv::Send& s)
{
    transmit(new_control(from, s.to, s.message), from, s.to);
}

void Simulator::flood(NodeId from, const aodv::Rreq& rreq)
{
    for (NodeId n : topo_.neighbors(from)) {
        transmit(new_control(from, n, rreq), from, n);
    }
}

void Simulator::transmit(PacketId id, NodeId from, NodeId to)
{
    Packet& pkt = packets_.at(id);
    const Link& link = topo_.link(LinkKey::of(from, to));
    if (link.state == LinkState::down) {
        drop(id, from, "link-down");
        link_broken(from, to);
        return;
    }
    Transmitter& t = tx_[{from, to}];
    if (t.occupancy >= link.queue_capacity) {
        drop(id, from, "queue-full");
        return;
    }
    const SimTime start = std::max(now(), t.busy_until);
    t.busy_until = start + serialization_delay(pkt.size, link.bandwidth_bps);
    ++t.occupancy;
    queue_.schedule(t.busy_until, EventKind::transmit_complete, TransmitCompletePayload{from, to});
    queue_.schedule(t.busy_until + link.prop_delay, EventKind::packet_arrival, ArrivalPayload{id, from, to});

    log("tx", from, id,
        "to=" + topo_.name(to) + " type=" + std::string(to_string(pkt.kind)) + " size=" + std::to_string(pkt.size));
    collector_.record_transmit(id, link_names_.at(link.key), static_cast<std::uint64_t>(pkt.size) * 8);
    debit(id, cfg_.energy.tx_cost(pkt.size));
}

void Simulator::debit(PacketId id, std::int64_t pj)
{
    energy_pj_ += pj;
    collector_.record_energy(id, pj);
}

void Simulator::drop(PacketId id, NodeId at, const char* reason)
{
    auto it = packets_.find(id);
    if (it == packets_.end()) {
        throw Error("drop of unknown packet " + std::to_string(id));
    }
    log("drop", at, id, "type=" + std::string(to_string(it->second.kind)) + " reason=" + reason);
    collector_.record_drop(id, now());
    packets_.erase(it);
}

void Simulator::link_broken(NodeId node, NodeId neighbor)
{
    for (const auto& s : aodv::handle_link_break(nodes_[node.value], neighbor, now())) {
        send_control(node, s);
    }
}

void Simulator::on_link_failure(LinkKey link)
{
    if (!topo_.set_link_state(link, LinkState::down)) {
        return;
    }
    log("link-down", link.a, std::nullopt, "link=" + link_names_.at(link));
    link_broken(link.a, link.b);
    link_broken(link.b, link.a);

    for (std::size_t i = 0; i < tables_.size(); ++i) {
        policy::PathTable& table = tables_[i];
        for (std::size_t c = 0; c < table.candidates.size(); ++c) {
            auto& cand = table.candidates[c];
            const auto& links = path_links_.at(cand.path.label);
            if (!cand.alive || std::find(links.begin(), links.end(), link) == links.end()) {
                continue;
            }
            if (table.selected == c) {
                auto sel = policy::handle_path_failure(table, cand.path.label, cfg_.flows[i].demand());
                log("reselect", cfg_.flows[i].src, std::nullopt,
                    "flow=" + cfg_.flows[i].name + " path=" + (sel ? table.candidates[*sel].path.label : "none"));
            } else {
                cand.alive = false;
            }
        }
    }
}

void Simulator::on_link_restore(LinkKey link)
{
    if (!topo_.set_link_state(link, LinkState::up)) {
        return;
    }
    log("link-up", link.a, std::nullopt, "link=" + link_names_.at(link));
    for (auto& table : tables_) {
        for (auto& cand : table.candidates) {
            if (!cand.alive && validate_path(topo_, cand.path)) {
                policy::restore_path(table, cand.path.label);
            }
        }
    }
}

void Simulator::on_discovery_timeout(const DiscoveryTimeoutPayload& p)
{
    aodv::NodeProtocolState& state = nodes_[p.node.value];
    auto r = aodv::discovery_timeout(state, p.dest, p.rreq_id, now());
    for (const auto& d : r.dropped) {
        drop(d.id, p.node, "no-route");
    }
    if (!r.flushed.empty()) {
        release_pending(p.node, r.flushed, *r.next_hop);
    }
    if (r.broadcast) {
        flood(p.node, *r.broadcast);
        queue_.schedule(now() + cfg_.aodv.discovery_timeout, EventKind::discovery_timeout,
                        DiscoveryTimeoutPayload{p.node, p.dest, r.broadcast->rreq_id});
    }
}

void Simulator::on_sample()
{
    metrics::SampleInput in;
    in.now = now();
    in.window = now() - last_sample_;
    last_sample_ = now();
    for (const auto& [id, pkt] : packets_) {
        if (pkt.kind != PacketKind::data) {
            in.in_flight_control += 1;
            continue;
        }
        in.in_flight_data += 1;
        in.in_flight_flows[cfg_.flows[pkt.flow].name] += 1;
        in.in_flight_paths[pkt.path_label] += 1;
    }
    auto names = [&](const std::vector<LinkKey>& links) {
        std::vector<std::string> out;
        for (LinkKey l : links) {
            out.push_back(link_names_.at(l));
        }
        return out;
    };
    for (const auto& [label, links] : path_links_) {
        in.path_links[label] = names(links);
    }
    for (std::size_t i = 0; i < cfg_.flows.size(); ++i) {
        if (cfg_.flows[i].routing != Routing::policy) {
            continue;
        }
        const auto* sel = tables_[i].selected_path();
        in.flow_links[cfg_.flows[i].name] = sel ? names(path_links_.at(sel->path.label)) : std::vector<std::string>{};
    }
    for (auto& v : collector_.sample(in)) {
        violations_.push_back("conservation violated for " + v + " at " + format_seconds(now()) + " s");
    }
    log("sample", std::nullopt, std::nullopt, "in_flight=" + std::to_string(packets_.size()));
}

}  // namespace vpnsim

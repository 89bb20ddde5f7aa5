#include "vpnsim/aodv.hpp"

#include "vpnsim/error.hpp"

#include <algorithm>

namespace vpnsim::aodv {

std::uint32_t wire_size(const Message& m, const Config& cfg)
{
    if (std::holds_alternative<Rreq>(m)) {
        return cfg.rreq_size;
    }
    if (std::holds_alternative<Rrep>(m)) {
        return cfg.rrep_size;
    }
    const auto& rerr = std::get<Rerr>(m);
    return cfg.rerr_base_size + cfg.rerr_per_dest_size * static_cast<std::uint32_t>(rerr.unreachable.size());
}

const RouteEntry* NodeProtocolState::entry(NodeId dest) const
{
    auto it = table_.find(dest);
    return it == table_.end() ? nullptr : &it->second;
}

struct Access {
    static auto& table(NodeProtocolState& s) { return s.table_; }
    static auto& pending(NodeProtocolState& s) { return s.pending_; }
    static auto& discoveries(NodeProtocolState& s) { return s.discoveries_; }

    static bool seen(NodeProtocolState& s, NodeId origin, std::uint32_t id)
    {
        return s.seen_.contains({origin, id});
    }

    static void remember(NodeProtocolState& s, NodeId origin, std::uint32_t id)
    {
        if (!s.seen_.insert({origin, id}).second) {
            return;
        }
        s.seen_order_.emplace_back(origin, id);
        while (s.seen_order_.size() > s.config_.seen_cache_capacity) {
            s.seen_.erase(s.seen_order_.front());
            s.seen_order_.pop_front();
        }
    }

    static Rreq new_flood(NodeProtocolState& s, NodeId dest)
    {
        ++s.own_seq_;
        const std::uint32_t id = s.next_rreq_id_++;
        remember(s, s.self_, id);
        const RouteEntry* e = s.entry(dest);
        return Rreq{s.self_, s.own_seq_, id, dest, e ? e->dest_seq : 0, 1};
    }

    static SeqNo bump_for_reply(NodeProtocolState& s, SeqNo known)
    {
        s.own_seq_ = std::max(s.own_seq_, known) + 1;
        return s.own_seq_;
    }

    static std::vector<PendingPacket> take_pending(NodeProtocolState& s, NodeId dest)
    {
        std::vector<PendingPacket> out;
        auto& q = s.pending_;
        for (auto it = q.begin(); it != q.end();) {
            if (it->dest == dest) {
                out.push_back(*it);
                it = q.erase(it);
            } else {
                ++it;
            }
        }
        return out;
    }
};

namespace {

// Installs or refreshes a route. Newer sequence numbers always win; an
// equal one wins with fewer hops or over an unusable entry.
bool update_route(NodeProtocolState& s, NodeId dest, NodeId next_hop, std::uint32_t hops, SeqNo seq,
                  SimTime expiry, SimTime now)
{
    auto& table = Access::table(s);
    auto it = table.find(dest);
    if (it == table.end()) {
        table.emplace(dest, RouteEntry{dest, next_hop, hops, seq, expiry, true, {}});
        return true;
    }
    RouteEntry& e = it->second;
    const bool better = seq > e.dest_seq || (seq == e.dest_seq && (hops < e.hop_count || !e.usable(now)));
    if (better) {
        e.next_hop = next_hop;
        e.hop_count = hops;
        e.dest_seq = seq;
        e.expiry = expiry;
        e.active = true;
        return true;
    }
    if (e.usable(now) && e.next_hop == next_hop && e.dest_seq == seq && e.hop_count == hops) {
        e.expiry = std::max(e.expiry, expiry);
    }
    return false;
}

std::vector<Send> fan_out(const std::set<NodeId>& precursors, std::vector<Unreachable> list, NodeId skip)
{
    std::vector<Send> out;
    if (list.empty()) {
        return out;
    }
    for (NodeId p : precursors) {
        if (p != skip) {
            out.push_back(Send{p, Rerr{list}});
        }
    }
    return out;
}

}  // namespace

OriginateResult originate_rreq(NodeProtocolState& state, NodeId dest, SimTime now, std::optional<PendingPacket> data)
{
    if (dest == state.self()) {
        throw InvalidArgument("route discovery toward self");
    }
    OriginateResult out;
    if (auto hop = lookup_route(state, dest, now)) {
        out.next_hop = hop;
        return out;
    }
    if (data) {
        auto& q = Access::pending(state);
        q.push_back(*data);
        while (q.size() > state.config().pending_capacity) {
            out.dropped.push_back(q.front());
            q.pop_front();
        }
    }
    auto& disc = Access::discoveries(state);
    if (disc.contains(dest)) {
        return out;
    }
    Rreq rreq = Access::new_flood(state, dest);
    disc[dest] = {rreq.rreq_id, state.config().rreq_retries};
    out.broadcast = rreq;
    return out;
}

RreqResult process_rreq(NodeProtocolState& state, const Rreq& rreq, NodeId from, SimTime now)
{
    RreqResult out;
    if (rreq.origin == state.self() || rreq.origin == rreq.dest || Access::seen(state, rreq.origin, rreq.rreq_id)) {
        return out;
    }
    Access::remember(state, rreq.origin, rreq.rreq_id);

    const Config& cfg = state.config();
    update_route(state, rreq.origin, from, rreq.hop_count, rreq.origin_seq, now + cfg.route_lifetime, now);

    if (rreq.dest == state.self()) {
        const SeqNo seq = Access::bump_for_reply(state, rreq.dest_seq_known);
        out.kind = RreqResult::Kind::reply;
        out.reply = Send{from, Rrep{rreq.origin, state.self(), seq, 1, cfg.route_lifetime}};
        return out;
    }

    auto& table = Access::table(state);
    auto it = table.find(rreq.dest);
    if (it != table.end() && it->second.usable(now) && it->second.dest_seq > rreq.dest_seq_known) {
        RouteEntry& fwd = it->second;
        fwd.precursors.insert(from);
        out.kind = RreqResult::Kind::reply;
        out.reply = Send{from, Rrep{rreq.origin, rreq.dest, fwd.dest_seq, fwd.hop_count + 1, fwd.expiry - now}};
        return out;
    }

    Rreq relay = rreq;
    relay.hop_count = rreq.hop_count + 1;
    out.kind = RreqResult::Kind::rebroadcast;
    out.relay = relay;
    return out;
}

RrepResult process_rrep(NodeProtocolState& state, const Rrep& rrep, NodeId from, SimTime now)
{
    RrepResult out;
    if (rrep.dest == state.self()) {
        return out;
    }
    if (!update_route(state, rrep.dest, from, rrep.hop_count, rrep.dest_seq, now + rrep.lifetime, now)) {
        return out;
    }
    out.next_hop = from;

    if (rrep.origin == state.self()) {
        Access::discoveries(state).erase(rrep.dest);
        out.kind = RrepResult::Kind::deliver;
        out.flushed = Access::take_pending(state, rrep.dest);
        return out;
    }

    auto& table = Access::table(state);
    auto rev = table.find(rrep.origin);
    if (rev == table.end() || !rev->second.usable(now)) {
        out.kind = RrepResult::Kind::no_reverse_route;
        return out;
    }
    const NodeId toward_origin = rev->second.next_hop;
    table.at(rrep.dest).precursors.insert(toward_origin);
    rev->second.expiry = std::max(rev->second.expiry, now + state.config().route_lifetime);

    Rrep relay = rrep;
    relay.hop_count = rrep.hop_count + 1;
    out.kind = RrepResult::Kind::forward;
    out.forward = Send{toward_origin, relay};
    return out;
}

std::vector<Send> handle_link_break(NodeProtocolState& state, NodeId neighbor, SimTime now)
{
    (void)now;
    std::vector<Unreachable> lost;
    std::set<NodeId> precursors;
    for (auto& [dest, e] : Access::table(state)) {
        if (e.active && e.next_hop == neighbor) {
            e.active = false;
            ++e.dest_seq;
            lost.push_back(Unreachable{dest, e.dest_seq});
            precursors.insert(e.precursors.begin(), e.precursors.end());
        }
    }
    return fan_out(precursors, std::move(lost), neighbor);
}

std::vector<Send> process_rerr(NodeProtocolState& state, const Rerr& rerr, NodeId from, SimTime now)
{
    (void)now;
    std::vector<Unreachable> lost;
    std::set<NodeId> precursors;
    auto& table = Access::table(state);
    for (const Unreachable& u : rerr.unreachable) {
        auto it = table.find(u.dest);
        if (it == table.end()) {
            continue;
        }
        RouteEntry& e = it->second;
        if (e.active && e.next_hop == from && u.dest_seq >= e.dest_seq) {
            e.active = false;
            e.dest_seq = u.dest_seq;
            lost.push_back(Unreachable{u.dest, e.dest_seq});
            precursors.insert(e.precursors.begin(), e.precursors.end());
        }
    }
    return fan_out(precursors, std::move(lost), from);
}

std::optional<NodeId> lookup_route(const NodeProtocolState& state, NodeId dest, SimTime now)
{
    const RouteEntry* e = state.entry(dest);
    if (e && e->usable(now)) {
        return e->next_hop;
    }
    return std::nullopt;
}

void use_route(NodeProtocolState& state, NodeId dest, SimTime now, std::optional<NodeId> upstream)
{
    auto& table = Access::table(state);
    auto it = table.find(dest);
    if (it == table.end() || !it->second.usable(now)) {
        return;
    }
    it->second.expiry = std::max(it->second.expiry, now + state.config().route_lifetime);
    if (upstream) {
        it->second.precursors.insert(*upstream);
    }
}

TimeoutResult discovery_timeout(NodeProtocolState& state, NodeId dest, std::uint32_t rreq_id, SimTime now)
{
    TimeoutResult out;
    auto& disc = Access::discoveries(state);
    auto it = disc.find(dest);
    if (it == disc.end() || it->second.rreq_id != rreq_id) {
        return out;
    }
    if (auto hop = lookup_route(state, dest, now)) {
        disc.erase(it);
        out.next_hop = hop;
        out.flushed = Access::take_pending(state, dest);
        return out;
    }
    if (it->second.retries_left > 0) {
        --it->second.retries_left;
        Rreq rreq = Access::new_flood(state, dest);
        it->second.rreq_id = rreq.rreq_id;
        out.broadcast = rreq;
        return out;
    }
    disc.erase(it);
    out.dropped = Access::take_pending(state, dest);
    return out;
}

}  // namespace vpnsim::aodv

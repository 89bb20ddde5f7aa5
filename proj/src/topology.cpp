#include "vpnsim/topology.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>

namespace vpnsim {

NodeId Topology::add_node(std::string name, Position position, double tx_range)
{
    if (!(tx_range > 0.0)) {
        throw InvalidArgument("node '" + name + "': tx_range must be positive");
    }
    if (by_name_.contains(name)) {
        throw InvalidArgument("duplicate node name '" + name + "'");
    }
    NodeId id{static_cast<std::uint32_t>(nodes_.size())};
    by_name_.emplace(name, id);
    nodes_.push_back(Node{id, std::move(name), position, tx_range});
    adjacency_.emplace_back();
    return id;
}

void Topology::add_link(NodeId u, NodeId v, double bandwidth_bps, SimTime prop_delay,
                        std::size_t queue_capacity)
{
    check(u);
    check(v);
    if (u == v) {
        throw InvalidArgument("link endpoints must be distinct (" + name(u) + ")");
    }
    if (!(bandwidth_bps > 0.0)) {
        throw InvalidArgument("link " + name(u) + "-" + name(v) + ": bandwidth must be positive");
    }
    if (prop_delay < SimTime{}) {
        throw InvalidArgument("link " + name(u) + "-" + name(v) + ": negative propagation delay");
    }
    if (queue_capacity == 0) {
        throw InvalidArgument("link " + name(u) + "-" + name(v) + ": queue capacity must be >= 1");
    }
    const LinkKey key = LinkKey::of(u, v);
    if (index_.contains(key)) {
        throw InvalidArgument("duplicate link " + describe(key));
    }
    index_.emplace(key, links_.size());
    links_.push_back(Link{key, bandwidth_bps, prop_delay, LinkState::up, queue_capacity});
    adjacency_[u.value].insert(v);
    adjacency_[v.value].insert(u);
}

void Topology::check(NodeId id) const
{
    if (id.value >= nodes_.size()) {
        throw UnknownNode("unknown node id " + std::to_string(id.value));
    }
}

const Node& Topology::node(NodeId id) const
{
    check(id);
    return nodes_[id.value];
}

std::optional<NodeId> Topology::find(std::string_view name) const
{
    auto it = by_name_.find(name);
    if (it == by_name_.end()) {
        return std::nullopt;
    }
    return it->second;
}

const Link& Topology::link(LinkKey key) const
{
    auto it = index_.find(key);
    if (it == index_.end()) {
        throw UnknownLink("unknown link " + describe(key));
    }
    return links_[it->second];
}

bool Topology::is_up(NodeId u, NodeId v) const
{
    auto it = index_.find(LinkKey::of(u, v));
    return it != index_.end() && links_[it->second].state == LinkState::up;
}

std::vector<NodeId> Topology::neighbors(NodeId node) const
{
    check(node);
    const auto& adj = adjacency_[node.value];
    return {adj.begin(), adj.end()};
}

bool Topology::set_link_state(LinkKey key, LinkState state)
{
    auto it = index_.find(key);
    if (it == index_.end()) {
        throw UnknownLink("unknown link " + describe(key));
    }
    Link& l = links_[it->second];
    if (l.state == state) {
        return false;
    }
    l.state = state;
    if (state == LinkState::up) {
        adjacency_[key.a.value].insert(key.b);
        adjacency_[key.b.value].insert(key.a);
    } else {
        adjacency_[key.a.value].erase(key.b);
        adjacency_[key.b.value].erase(key.a);
    }
    return true;
}

bool Topology::is_connected() const
{
    if (nodes_.empty()) {
        return true;
    }
    std::vector<bool> seen(nodes_.size(), false);
    std::deque<std::uint32_t> frontier{0};
    seen[0] = true;
    std::size_t reached = 1;
    while (!frontier.empty()) {
        const auto u = frontier.front();
        frontier.pop_front();
        for (NodeId v : adjacency_[u]) {
            if (!seen[v.value]) {
                seen[v.value] = true;
                ++reached;
                frontier.push_back(v.value);
            }
        }
    }
    return reached == nodes_.size();
}

std::vector<LinkKey> Topology::path_links(const PathSpec& path) const
{
    std::vector<LinkKey> out;
    for (std::size_t i = 0; i + 1 < path.hops.size(); ++i) {
        const LinkKey key = LinkKey::of(path.hops[i], path.hops[i + 1]);
        if (!index_.contains(key)) {
            throw UnknownLink("path '" + path.label + "' uses unknown link " + describe(key));
        }
        out.push_back(key);
    }
    return out;
}

std::string Topology::describe(LinkKey key) const
{
    auto label = [&](NodeId n) {
        return n.value < nodes_.size() ? nodes_[n.value].name : "#" + std::to_string(n.value);
    };
    return label(key.a) + "-" + label(key.b);
}

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// std::uniform_real_distribution is not bit-identical across standard
// libraries; take the top 53 bits directly.
double unit_uniform(std::mt19937_64& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Topology place_once(const RandomTopologyParams& p, std::uint64_t seed)
{
    std::mt19937_64 rng(splitmix64(seed));
    Topology topo;
    for (std::size_t i = 0; i < p.nodes; ++i) {
        const double x = unit_uniform(rng) * p.width;
        const double y = unit_uniform(rng) * p.height;
        topo.add_node("n" + std::to_string(i), Position{x, y}, p.range);
    }
    const auto& nodes = topo.nodes();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        for (std::size_t j = i + 1; j < nodes.size(); ++j) {
            const double d = std::hypot(nodes[i].position.x - nodes[j].position.x,
                                        nodes[i].position.y - nodes[j].position.y);
            if (d <= p.range) {
                topo.add_link(nodes[i].id, nodes[j].id, p.bandwidth_bps,
                              SimTime(std::llround(d / 3e8 * 1e9)), p.queue_capacity);
            }
        }
    }
    return topo;
}

}  // namespace

Topology generate_random_topology(const RandomTopologyParams& p)
{
    if (p.nodes < 1) {
        throw InvalidArgument("random topology needs at least one node");
    }
    if (!(p.width > 0.0) || !(p.height > 0.0) || !(p.range > 0.0)) {
        throw InvalidArgument("random topology area and range must be positive");
    }
    if (!(p.bandwidth_bps > 0.0)) {
        throw InvalidArgument("random topology bandwidth must be positive");
    }
    for (int attempt = 0; attempt <= p.max_retries; ++attempt) {
        Topology t = place_once(p, p.seed + static_cast<std::uint64_t>(attempt) * 0xD1B54A32D192ED03ULL);
        if (t.is_connected()) {
            return t;
        }
    }
    throw ConnectivityUnattainable("no connected placement of " + std::to_string(p.nodes) +
                                   " nodes after " + std::to_string(p.max_retries) + " retries");
}

bool validate_path(const Topology& topo, const PathSpec& path)
{
    if (path.hops.size() < 2) {
        return false;
    }
    std::set<NodeId> seen;
    for (NodeId n : path.hops) {
        if (n.value >= topo.node_count() || !seen.insert(n).second) {
            return false;
        }
    }
    for (std::size_t i = 0; i + 1 < path.hops.size(); ++i) {
        if (!topo.is_up(path.hops[i], path.hops[i + 1])) {
            return false;
        }
    }
    return true;
}

}  // namespace vpnsim

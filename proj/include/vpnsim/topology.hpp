#pragma once

#include "vpnsim/error.hpp"
#include "vpnsim/sim_time.hpp"

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace vpnsim {

struct NodeId {
    std::uint32_t value = 0;
    constexpr auto operator<=>(const NodeId&) const = default;
};

struct Position {
    double x = 0.0;
    double y = 0.0;
};

struct Node {
    NodeId id;
    std::string name;
    Position position;
    double tx_range = 0.0;  // meters
};

enum class LinkState { up, down };

/// Unordered node pair; always stored with `a < b`.
struct LinkKey {
    NodeId a;
    NodeId b;

    static LinkKey of(NodeId u, NodeId v) { return u < v ? LinkKey{u, v} : LinkKey{v, u}; }
    bool touches(NodeId n) const { return a == n || b == n; }
    NodeId other(NodeId n) const { return n == a ? b : a; }
    constexpr auto operator<=>(const LinkKey&) const = default;
};

inline constexpr std::size_t kDefaultQueueCapacity = 50;

struct Link {
    LinkKey key;
    double bandwidth_bps = 0.0;
    SimTime prop_delay;
    LinkState state = LinkState::up;
    std::size_t queue_capacity = kDefaultQueueCapacity;
};

/// Ordered hop list; a path is valid when consecutive hops share an up link
/// and no node repeats.
struct PathSpec {
    std::string label;
    std::vector<NodeId> hops;
};

class Topology {
public:
    NodeId add_node(std::string name, Position position, double tx_range);
    void add_link(NodeId u, NodeId v, double bandwidth_bps, SimTime prop_delay,
                  std::size_t queue_capacity = kDefaultQueueCapacity);

    std::size_t node_count() const { return nodes_.size(); }
    const std::vector<Node>& nodes() const { return nodes_; }
    const Node& node(NodeId id) const;
    std::optional<NodeId> find(std::string_view name) const;
    const std::string& name(NodeId id) const { return node(id).name; }

    const std::vector<Link>& links() const { return links_; }
    const Link& link(LinkKey key) const;
    bool has_link(NodeId u, NodeId v) const { return index_.contains(LinkKey::of(u, v)); }
    bool is_up(NodeId u, NodeId v) const;

    /// Nodes joined to `node` by an up link, ascending.
    std::vector<NodeId> neighbors(NodeId node) const;

    /// Returns true when the state actually changed.
    bool set_link_state(LinkKey key, LinkState state);

    bool is_connected() const;

    /// Links traversed by a path, in hop order. Throws UnknownLink for a
    /// missing hop pair.
    std::vector<LinkKey> path_links(const PathSpec& path) const;

    std::string describe(LinkKey key) const;

private:
    void check(NodeId id) const;

    std::vector<Node> nodes_;
    std::vector<Link> links_;
    std::map<LinkKey, std::size_t> index_;
    std::map<std::string, NodeId, std::less<>> by_name_;
    std::vector<std::set<NodeId>> adjacency_;  // up links only
};

struct RandomTopologyParams {
    std::size_t nodes = 50;
    double width = 1000.0;
    double height = 1000.0;
    double range = 250.0;
    std::uint64_t seed = 0;
    double bandwidth_bps = 2e6;
    std::size_t queue_capacity = kDefaultQueueCapacity;
    int max_retries = 100;
};

/// Uniform placement in the area, unit-disk links. Retries with a perturbed
/// seed until the graph is connected.
Topology generate_random_topology(const RandomTopologyParams& params);

bool validate_path(const Topology& topo, const PathSpec& path);

}  // namespace vpnsim

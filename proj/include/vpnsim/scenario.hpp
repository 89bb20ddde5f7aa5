#pragma once

// Scenario documents: versioned JSON, every object closed (unknown keys are
// errors). Times are seconds, bandwidths bit/s, energy joules.

#include "vpnsim/engine.hpp"
#include "vpnsim/hose.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vpnsim {

inline constexpr int kScenarioVersion = 1;

struct NodeSpec {
    std::string name;
    double x = 0.0;
    double y = 0.0;
    double range = 250.0;

    bool operator==(const NodeSpec&) const = default;
};

struct LinkSpec {
    std::string a;
    std::string b;
    double bandwidth_bps = 2e6;
    SimTime delay;
    std::size_t queue = kDefaultQueueCapacity;

    bool operator==(const LinkSpec&) const = default;
};

struct RandomSpec {
    std::size_t nodes = 50;
    double width = 1000.0;
    double height = 1000.0;
    double range = 250.0;
    std::uint64_t seed = 0;
    double bandwidth_bps = 2e6;
    std::size_t queue = kDefaultQueueCapacity;
    int retries = 100;

    bool operator==(const RandomSpec&) const = default;
};

struct TopologySpec {
    std::optional<RandomSpec> random;  // when set, nodes/links are empty
    std::vector<NodeSpec> nodes;
    std::vector<LinkSpec> links;

    bool operator==(const TopologySpec&) const = default;
};

struct PathEntry {
    std::string label;
    std::vector<std::string> hops;
    double bandwidth_bps = 0.0;

    bool operator==(const PathEntry&) const = default;
};

struct FlowSpec {
    std::string name;
    std::string src;
    std::string dst;
    std::uint32_t packet_size = 512;
    SimTime interval;
    SimTime start;
    SimTime stop;
    std::optional<std::uint64_t> count;
    SimTime jitter;
    Routing routing = Routing::aodv;
    std::vector<std::string> candidates;
    std::optional<double> demand_bps;

    bool operator==(const FlowSpec&) const = default;
};

struct FailureSpec {
    std::string a;
    std::string b;
    SimTime at;
    std::optional<SimTime> restore;

    bool operator==(const FailureSpec&) const = default;
};

struct HoseEndpointSpec {
    std::string name;
    std::string node;
    double b_plus = 0.0;
    double b_minus = 0.0;

    bool operator==(const HoseEndpointSpec&) const = default;
};

// Either `path` (a label from the scenario's paths) or explicit `hops`.
struct HosePathSpec {
    std::optional<std::string> path;
    std::vector<std::string> hops;
    double fraction = 0.0;

    bool operator==(const HosePathSpec&) const = default;
};

struct HoseRouteSpec {
    std::string from;
    std::string to;
    std::vector<HosePathSpec> paths;

    bool operator==(const HoseRouteSpec&) const = default;
};

struct HoseSection {
    std::vector<HoseEndpointSpec> endpoints;
    std::vector<HoseRouteSpec> routing;

    bool operator==(const HoseSection&) const = default;
};

struct Scenario {
    int version = kScenarioVersion;
    std::string name;
    SimTime duration;
    SimTime sample_interval = SimTime::from_ms(500);
    std::size_t runs = 5;
    std::size_t min_runs = 5;
    std::uint64_t seed = 0;
    std::optional<std::string> measured_flow;
    TopologySpec topology;
    std::vector<PathEntry> paths;
    std::vector<FlowSpec> flows;
    std::vector<FailureSpec> failures;
    std::optional<HoseSection> hose;
    EnergyModel energy;
    aodv::Config aodv;

    bool operator==(const Scenario&) const = default;
};

Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::string& file);
std::string serialize_scenario(const Scenario& s);

Topology build_topology(const Scenario& s);

/// Engine configuration for one run with the given seed.
SimConfig build_sim_config(const Scenario& s, const Topology& topo, std::uint64_t seed, bool trace);

struct HoseModel {
    hose::HoseSpec spec;
    hose::RoutingFractions fractions;
    std::vector<LinkKey> links;  // every topology link, in topology order
};

std::optional<HoseModel> build_hose(const Scenario& s, const Topology& topo);

inline constexpr std::string_view kSweepParameters[] = {"packet_size", "flow_interval", "failure_time"};

/// Copy of `s` with one parameter replaced on every flow (or failure).
/// failure_time shifts restores by the same amount.
Scenario apply_sweep(const Scenario& s, std::string_view parameter, double value);

}  // namespace vpnsim

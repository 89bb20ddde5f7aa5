#pragma once

// Hose-model bandwidth reservation.
//
// A VPN endpoint e declares an egress bound b+(e) and an ingress bound b-(e).
// A traffic matrix D is valid when every row sum stays within b+ and every
// column sum within b-. Given multipath routing fractions, the traffic a link
// carries is sum_{u,v} d_uv * f_uv(link); a reservation x is valid when that
// sum is <= x_link for every valid D. The smallest valid x_link is therefore
// the maximum of a linear function over the transportation polytope, which is
// what worst_case_link_load computes.

#include "vpnsim/topology.hpp"

#include <compare>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace vpnsim::hose {

inline constexpr double kTolerance = 1e-9;

struct EndpointId {
    std::uint32_t value = 0;
    constexpr auto operator<=>(const EndpointId&) const = default;
};

struct EndpointPair {
    EndpointId from;
    EndpointId to;
    constexpr auto operator<=>(const EndpointPair&) const = default;
};

struct Endpoint {
    std::string name;
    NodeId node;
    double b_plus = 0.0;   // egress bound, bit/s
    double b_minus = 0.0;  // ingress bound, bit/s
};

class HoseSpec {
public:
    EndpointId add_endpoint(std::string name, NodeId node, double b_plus, double b_minus);

    std::size_t size() const { return endpoints_.size(); }
    bool contains(EndpointId e) const { return e.value < endpoints_.size(); }
    const Endpoint& endpoint(EndpointId e) const;
    const std::vector<Endpoint>& endpoints() const { return endpoints_; }

private:
    std::vector<Endpoint> endpoints_;
};

/// Sparse demand matrix d_uv, u != v, all entries >= 0.
class TrafficMatrix {
public:
    void set(EndpointId from, EndpointId to, double demand);
    double get(EndpointId from, EndpointId to) const;
    const std::map<EndpointPair, double>& demands() const { return demands_; }

private:
    std::map<EndpointPair, double> demands_;
};

struct WeightedPath {
    PathSpec path;
    double fraction = 0.0;
};

/// Per ordered endpoint pair, the paths its traffic is split over.
class RoutingFractions {
public:
    /// Throws InvalidArgument unless fractions are >= 0 and sum to 1 within
    /// kTolerance. Fractions are never renormalised.
    void set(EndpointPair pair, std::vector<WeightedPath> paths);

    bool has(EndpointPair pair) const { return routes_.contains(pair); }
    const std::map<EndpointPair, std::vector<WeightedPath>>& routes() const { return routes_; }

    /// f_uv(link): sum of fractions of (u,v) paths that traverse `link`.
    double weight(EndpointPair pair, LinkKey link) const;

private:
    std::map<EndpointPair, std::vector<WeightedPath>> routes_;
};

/// Dense |Q| x |Q| weight matrix, row = sender, column = receiver. The
/// diagonal is ignored.
class WeightMatrix {
public:
    explicit WeightMatrix(std::size_t n) : n_(n), w_(n * n, 0.0) {}
    std::size_t size() const { return n_; }
    double& at(std::size_t u, std::size_t v) { return w_[u * n_ + v]; }
    double at(std::size_t u, std::size_t v) const { return w_[u * n_ + v]; }

private:
    std::size_t n_;
    std::vector<double> w_;
};

WeightMatrix link_weights(const RoutingFractions& f, const HoseSpec& hose, LinkKey link);

struct WorstCase {
    double load = 0.0;
    TrafficMatrix witness;  // valid matrix attaining `load`
};

using Reservation = std::map<LinkKey, double>;

bool validate_traffic_matrix(const TrafficMatrix& d, const HoseSpec& hose);

double link_load(const TrafficMatrix& d, const RoutingFractions& f, LinkKey link);

/// max sum w_uv d_uv over all valid D. Exact up to floating point rounding.
WorstCase max_weighted_traffic(const HoseSpec& hose, const WeightMatrix& w);

WorstCase worst_case_link_load(const RoutingFractions& f, const HoseSpec& hose, LinkKey link);

/// Per-link solves run in parallel when built with OpenMP.
Reservation minimal_reservation(const RoutingFractions& f, const HoseSpec& hose,
                                const std::vector<LinkKey>& links);

/// Serial reference for minimal_reservation.
Reservation minimal_reservation_serial(const RoutingFractions& f, const HoseSpec& hose,
                                       const std::vector<LinkKey>& links);

double reservation_cost(const Reservation& x);

}  // namespace vpnsim::hose

#include "vpnsim/hose.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace vpnsim::hose {

EndpointId HoseSpec::add_endpoint(std::string name, NodeId node, double b_plus, double b_minus)
{
    if (!(b_plus >= 0.0) || !(b_minus >= 0.0) || !std::isfinite(b_plus) || !std::isfinite(b_minus)) {
        throw InvalidArgument("endpoint '" + name + "': hose bounds must be finite and >= 0");
    }
    EndpointId id{static_cast<std::uint32_t>(endpoints_.size())};
    endpoints_.push_back(Endpoint{std::move(name), node, b_plus, b_minus});
    return id;
}

const Endpoint& HoseSpec::endpoint(EndpointId e) const
{
    if (!contains(e)) {
        throw InvalidArgument("endpoint " + std::to_string(e.value) + " is not in the hose spec");
    }
    return endpoints_[e.value];
}

void TrafficMatrix::set(EndpointId from, EndpointId to, double demand)
{
    if (from == to) {
        throw InvalidArgument("traffic matrix has no self pairs");
    }
    if (!(demand >= 0.0) || !std::isfinite(demand)) {
        throw InvalidArgument("traffic demand must be finite and >= 0");
    }
    demands_[EndpointPair{from, to}] = demand;
}

double TrafficMatrix::get(EndpointId from, EndpointId to) const
{
    auto it = demands_.find(EndpointPair{from, to});
    return it == demands_.end() ? 0.0 : it->second;
}

void RoutingFractions::set(EndpointPair pair, std::vector<WeightedPath> paths)
{
    if (pair.from == pair.to) {
        throw InvalidArgument("routing fractions have no self pairs");
    }
    double total = 0.0;
    for (const auto& p : paths) {
        if (!(p.fraction >= 0.0)) {
            throw InvalidArgument("path '" + p.path.label + "' has a negative fraction");
        }
        std::vector<NodeId> sorted = p.path.hops;
        std::sort(sorted.begin(), sorted.end());
        if (p.path.hops.size() < 2 || std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
            throw InvalidArgument("path '" + p.path.label + "' must have >= 2 distinct hops");
        }
        total += p.fraction;
    }
    if (std::abs(total - 1.0) > kTolerance) {
        throw InvalidArgument("routing fractions for a pair must sum to 1 (got " + std::to_string(total) + ")");
    }
    routes_[pair] = std::move(paths);
}

double RoutingFractions::weight(EndpointPair pair, LinkKey link) const
{
    auto it = routes_.find(pair);
    if (it == routes_.end()) {
        return 0.0;
    }
    double w = 0.0;
    for (const auto& wp : it->second) {
        const auto& hops = wp.path.hops;
        for (std::size_t i = 0; i + 1 < hops.size(); ++i) {
            if (LinkKey::of(hops[i], hops[i + 1]) == link) {
                w += wp.fraction;
                break;
            }
        }
    }
    return w;
}

WeightMatrix link_weights(const RoutingFractions& f, const HoseSpec& hose, LinkKey link)
{
    WeightMatrix w(hose.size());
    for (const auto& [pair, paths] : f.routes()) {
        if (!hose.contains(pair.from) || !hose.contains(pair.to)) {
            throw InvalidArgument("routing fractions reference an endpoint outside the hose spec");
        }
        w.at(pair.from.value, pair.to.value) = f.weight(pair, link);
    }
    return w;
}

bool validate_traffic_matrix(const TrafficMatrix& d, const HoseSpec& hose)
{
    std::vector<double> out(hose.size(), 0.0);
    std::vector<double> in(hose.size(), 0.0);
    for (const auto& [pair, demand] : d.demands()) {
        if (!hose.contains(pair.from) || !hose.contains(pair.to)) {
            throw InvalidArgument("traffic matrix references an endpoint outside the hose spec");
        }
        out[pair.from.value] += demand;
        in[pair.to.value] += demand;
    }
    for (std::size_t e = 0; e < hose.size(); ++e) {
        const auto& ep = hose.endpoints()[e];
        if (out[e] > ep.b_plus + kTolerance || in[e] > ep.b_minus + kTolerance) {
            return false;
        }
    }
    return true;
}

double link_load(const TrafficMatrix& d, const RoutingFractions& f, LinkKey link)
{
    double load = 0.0;
    for (const auto& [pair, demand] : d.demands()) {
        if (demand <= 0.0) {
            continue;
        }
        if (!f.has(pair)) {
            throw InvalidArgument("no routing fractions for demanded pair (" + std::to_string(pair.from.value) +
                                  "," + std::to_string(pair.to.value) + ")");
        }
        load += demand * f.weight(pair, link);
    }
    return load;
}

namespace {

// Min-cost flow on source -> senders -> receivers -> sink, costs -w on the
// middle arcs. Successive shortest paths (Bellman-Ford, since arc costs are
// negative) stopping as soon as the cheapest augmenting path has
// non-negative cost: that is the maximum-weight flow, i.e. the LP optimum.
class TransportSolver {
public:
    TransportSolver(const HoseSpec& hose, const WeightMatrix& w) : n_(hose.size()), graph_(2 * n_ + 2)
    {
        const std::size_t src = source(), dst = sink();
        for (std::size_t u = 0; u < n_; ++u) {
            add_arc(src, sender(u), hose.endpoints()[u].b_plus, 0.0);
            add_arc(receiver(u), dst, hose.endpoints()[u].b_minus, 0.0);
        }
        for (std::size_t u = 0; u < n_; ++u) {
            for (std::size_t v = 0; v < n_; ++v) {
                if (u == v || w.at(u, v) <= 0.0) {
                    continue;
                }
                const double cap = std::min(hose.endpoints()[u].b_plus, hose.endpoints()[v].b_minus);
                if (cap <= 0.0) {
                    continue;
                }
                middle_.push_back({u, v, graph_[sender(u)].size()});
                add_arc(sender(u), receiver(v), cap, -w.at(u, v));
            }
        }
    }

    void solve()
    {
        constexpr double kEps = 1e-12;
        const std::size_t nodes = graph_.size();
        for (;;) {
            std::vector<double> dist(nodes, std::numeric_limits<double>::infinity());
            std::vector<std::pair<std::size_t, std::size_t>> prev(nodes, {SIZE_MAX, SIZE_MAX});
            dist[source()] = 0.0;
            for (std::size_t round = 0; round + 1 < nodes; ++round) {
                bool changed = false;
                for (std::size_t u = 0; u < nodes; ++u) {
                    if (dist[u] == std::numeric_limits<double>::infinity()) {
                        continue;
                    }
                    for (std::size_t i = 0; i < graph_[u].size(); ++i) {
                        const Arc& a = graph_[u][i];
                        if (a.cap > kEps && dist[u] + a.cost < dist[a.to] - kEps) {
                            dist[a.to] = dist[u] + a.cost;
                            prev[a.to] = {u, i};
                            changed = true;
                        }
                    }
                }
                if (!changed) {
                    break;
                }
            }
            if (!(dist[sink()] < -kEps)) {
                return;
            }
            double push = std::numeric_limits<double>::infinity();
            for (std::size_t v = sink(); v != source(); v = prev[v].first) {
                const auto [u, i] = prev[v];
                push = std::min(push, graph_[u][i].cap);
            }
            for (std::size_t v = sink(); v != source(); v = prev[v].first) {
                const auto [u, i] = prev[v];
                Arc& a = graph_[u][i];
                a.cap -= push;
                graph_[a.to][a.rev].cap += push;
            }
        }
    }

    TrafficMatrix witness() const
    {
        TrafficMatrix d;
        for (const auto& m : middle_) {
            const Arc& a = graph_[sender(m.u)][m.arc];
            const double flow = graph_[a.to][a.rev].cap;
            if (flow > 0.0) {
                d.set(EndpointId{static_cast<std::uint32_t>(m.u)}, EndpointId{static_cast<std::uint32_t>(m.v)},
                      flow);
            }
        }
        return d;
    }

private:
    struct Arc {
        std::size_t to;
        std::size_t rev;
        double cap;
        double cost;
    };
    struct Middle {
        std::size_t u, v, arc;
    };

    std::size_t source() const { return 0; }
    std::size_t sink() const { return 2 * n_ + 1; }
    std::size_t sender(std::size_t u) const { return 1 + u; }
    std::size_t receiver(std::size_t v) const { return 1 + n_ + v; }

    void add_arc(std::size_t from, std::size_t to, double cap, double cost)
    {
        graph_[from].push_back(Arc{to, graph_[to].size(), cap, cost});
        graph_[to].push_back(Arc{from, graph_[from].size() - 1, 0.0, -cost});
    }

    std::size_t n_;
    std::vector<std::vector<Arc>> graph_;
    std::vector<Middle> middle_;
};

}  // namespace

WorstCase max_weighted_traffic(const HoseSpec& hose, const WeightMatrix& w)
{
    if (w.size() != hose.size()) {
        throw InvalidArgument("weight matrix size does not match the hose spec");
    }
    for (std::size_t u = 0; u < w.size(); ++u) {
        for (std::size_t v = 0; v < w.size(); ++v) {
            const double x = w.at(u, v);
            if (u != v && (!(x >= -kTolerance) || !(x <= 1.0 + kTolerance))) {
                throw InvalidArgument("link weight outside [0,1]");
            }
        }
    }
    TransportSolver solver(hose, w);
    solver.solve();
    WorstCase out{0.0, solver.witness()};
    for (const auto& [pair, demand] : out.witness.demands()) {
        out.load += demand * w.at(pair.from.value, pair.to.value);
    }
    return out;
}

WorstCase worst_case_link_load(const RoutingFractions& f, const HoseSpec& hose, LinkKey link)
{
    return max_weighted_traffic(hose, link_weights(f, hose, link));
}

Reservation minimal_reservation_serial(const RoutingFractions& f, const HoseSpec& hose,
                                       const std::vector<LinkKey>& links)
{
    Reservation x;
    for (LinkKey l : links) {
        x[l] = worst_case_link_load(f, hose, l).load;
    }
    return x;
}

Reservation minimal_reservation(const RoutingFractions& f, const HoseSpec& hose, const std::vector<LinkKey>& links)
{
    std::vector<double> loads(links.size(), 0.0);
    std::vector<std::string> errors(links.size());
    const auto count = static_cast<std::ptrdiff_t>(links.size());

#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        try {
            loads[i] = worst_case_link_load(f, hose, links[i]).load;
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    }

    Reservation x;
    for (std::size_t i = 0; i < links.size(); ++i) {
        if (!errors[i].empty()) {
            throw InvalidArgument(errors[i]);
        }
        x[links[i]] = loads[i];
    }
    return x;
}

double reservation_cost(const Reservation& x)
{
    double total = 0.0;
    for (const auto& [link, bw] : x) {
        total += bw;
    }
    return total;
}

}  // namespace vpnsim::hose

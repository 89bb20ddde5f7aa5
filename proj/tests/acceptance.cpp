// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include "oracles.hpp"

#include "vpnsim/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

using namespace vpnsim;
namespace fs = std::filesystem;

namespace {

struct Check {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& what)
    {
        if (!cond && ok) {
            ok = false;
            detail = what;
        }
    }
};

struct TraceLine {
    std::int64_t t = 0;
    std::string kind;
    std::string node;
    std::string packet;
    std::string detail;
};

TraceLine parse_line(const std::string& line)
{
    std::vector<std::string> f;
    std::stringstream ss(line);
    while (std::getline(ss, f.emplace_back(), '\t')) {
    }
    f.pop_back();
    f.resize(5);
    return TraceLine{std::stoll(f[0]), f[1], f[2], f[3], f[4]};
}

bool has(const std::string& detail, const std::string& token)
{
    std::stringstream ss(detail);
    std::string w;
    while (ss >> w) {
        if (w == token) {
            return true;
        }
    }
    return false;
}

std::string fmt(double v)
{
    return metrics::format_value(v);
}

// 1. Three-path ordering.
Check table_ordering()
{
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    const Scenario s = load_scenario(VPNSIM_SCENARIO_DIR "/table1.json");
    const RunSetResult r = run_set(s);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    c.require(secs < 10.0, "runtime " + fmt(secs) + " s");
    c.require(s.runs >= 5 && r.runs.size() == s.runs, "fewer than five runs");
    c.require(r.violations().empty(), "invariant violations");
    const auto& m = r.mean;
    const auto& p1 = m.paths.at("p1");
    const auto& p2 = m.paths.at("p2");
    const auto& p3 = m.paths.at("p3");
    const auto& vpn = m.flows.at(m.measured_flow);
    c.require(p1.packets_sent > 0 && p2.packets_sent > 0 && p3.packets_sent > 0, "a path carried nothing");
    c.require(vpn.packets_sent == p2.packets_sent, "measured stream not on the 1.8e6 path");
    for (const auto& run : r.runs) {
        c.require(run.report.flows.at(m.measured_flow).packets_sent == run.report.paths.at("p2").packets_sent,
                  "measured stream left the 1.8e6 path in seed " + std::to_string(run.seed));
    }
    c.require(p2.pdr > p3.pdr && p3.pdr > p1.pdr,
              "pdr " + fmt(p2.pdr) + " / " + fmt(p3.pdr) + " / " + fmt(p1.pdr));
    c.require(p2.packets_dropped < p3.packets_dropped && p3.packets_dropped < p1.packets_dropped, "loss order");
    c.require(p2.mean_delay_s < p3.mean_delay_s && p3.mean_delay_s < p1.mean_delay_s, "delay order");
    c.require(p2.energy_j < p3.energy_j && p3.energy_j < p1.energy_j, "energy order");
    if (c.ok) {
        c.detail = "pdr " + fmt(p2.pdr) + " > " + fmt(p3.pdr) + " > " + fmt(p1.pdr) + ", " + fmt(secs) + " s";
    }
    return c;
}

// 2. Failover shifts deliveries to the next-minimum path.
Check failover()
{
    Check c;
    const Scenario s = load_scenario(VPNSIM_SCENARIO_DIR "/failover.json");
    c.require(s.failures.size() == 1, "scenario must have one failure");
    if (!c.ok) {
        return c;
    }
    const SimTime tf = s.failures[0].at;
    const std::string fa = s.failures[0].a, fb = s.failures[0].b;
    const RunSetResult r = run_set(s, true);
    SimTime last_send;
    for (const auto& f : s.flows) {
        last_send = std::max(last_send, f.stop);
    }
    for (const auto& run : r.runs) {
        const std::string seed = "seed " + std::to_string(run.seed) + ": ";
        c.require(run.violations.empty(), seed + "violations");
        std::set<std::string> crossed_before;  // p2 packets already past the failed link
        std::size_t p3_after = 0;
        for (const auto& line : run.trace) {
            const TraceLine l = parse_line(line);
            const bool after = l.t >= tf.ns();
            if (l.kind == "rx" && l.node == fb && has(l.detail, "from=" + fa) && !after) {
                crossed_before.insert(l.packet);
            }
            if (l.kind == "send" && has(l.detail, "path=p2")) {
                c.require(!after, seed + "p2 send after the failure");
            }
            if (l.kind == "deliver" && has(l.detail, "path=p3")) {
                c.require(after, seed + "p3 delivery before the failure");
                ++p3_after;
            }
            if (l.kind == "deliver" && has(l.detail, "path=p2") && after) {
                c.require(crossed_before.contains(l.packet), seed + "p2 delivery of packet " + l.packet +
                                                                 " that had not crossed the link in time");
            }
        }
        c.require(p3_after > 0, seed + "no p3 deliveries");

        const auto& p3 = run.report.paths.at("p3").samples;
        const auto& p2 = run.report.paths.at("p2").samples;
        double prev = -1;
        double frozen = -1;
        for (std::size_t i = 0; i < p3.size(); ++i) {
            const SimTime t = p3[i].time;
            if (t <= tf) {
                c.require(p3[i].received == 0, seed + "p3 counter moved before the failure");
                prev = p3[i].received;
                continue;
            }
            if (t <= last_send) {
                c.require(p3[i].received > prev, seed + "p3 counter not increasing at " + format_seconds(t));
            }
            prev = p3[i].received;
            if (t >= tf + s.sample_interval) {
                if (frozen < 0) {
                    frozen = p2[i].received;
                }
                c.require(p2[i].received == frozen, seed + "p2 counter moved at " + format_seconds(t));
            }
        }
    }
    if (c.ok) {
        c.detail = std::to_string(r.runs.size()) + " seeds, failure at " + format_seconds(tf) + " s";
    }
    return c;
}

// Complete graph with random two-hop detours for every ordered pair.
hose::RoutingFractions random_routing(std::mt19937_64& rng, std::size_t n)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    hose::RoutingFractions f;
    for (std::uint32_t a = 0; a < n; ++a) {
        for (std::uint32_t b = 0; b < n; ++b) {
            if (a == b) {
                continue;
            }
            std::vector<hose::WeightedPath> ps;
            ps.push_back({PathSpec{"", {NodeId{a}, NodeId{b}}}, u(rng)});
            for (std::uint32_t w = 0; w < n; ++w) {
                if (w != a && w != b && rng() % 2) {
                    ps.push_back({PathSpec{"", {NodeId{a}, NodeId{w}, NodeId{b}}}, u(rng)});
                }
            }
            double total = 0;
            for (const auto& p : ps) {
                total += p.fraction;
            }
            for (auto& p : ps) {
                p.fraction /= total;
            }
            f.set({hose::EndpointId{a}, hose::EndpointId{b}}, ps);
        }
    }
    return f;
}

// 3. Worst-case link load against exact and grid oracles.
Check hose_oracles()
{
    Check c;
    constexpr double kGridStep = 0.01;
    const std::vector<double> grid{0.0, 0.5, 1.0};
    std::mt19937_64 rng(2024);
    std::size_t instances = 0;
    double worst_exact = 0, worst_grid = 0;
    while (instances < 240) {
        const std::size_t n = 2 + instances % 3;
        oracle::HoseInstance inst;
        hose::HoseSpec spec;
        for (std::uint32_t k = 0; k < n; ++k) {
            inst.b_plus.push_back(grid[rng() % grid.size()]);
            inst.b_minus.push_back(grid[rng() % grid.size()]);
            spec.add_endpoint("e" + std::to_string(k), NodeId{k}, inst.b_plus.back(), inst.b_minus.back());
        }
        const auto f = random_routing(rng, n);
        const std::uint32_t a = static_cast<std::uint32_t>(rng() % n);
        std::uint32_t b = static_cast<std::uint32_t>(rng() % (n - 1));
        b += b >= a ? 1 : 0;
        const LinkKey link = LinkKey::of(NodeId{a}, NodeId{b});
        inst.w = oracle::weights_from_paths(f, n, link);

        const hose::WorstCase wc = hose::worst_case_link_load(f, spec, link);
        const double exact = oracle::extreme_point_max(inst);
        const double brute = oracle::grid_max(inst, kGridStep);
        worst_exact = std::max(worst_exact, std::abs(wc.load - exact));
        worst_grid = std::max(worst_grid, std::abs(wc.load - brute));
        const std::string tag = "instance " + std::to_string(instances) + ": ";
        c.require(std::abs(wc.load - exact) <= 1e-9, tag + "extreme-point mismatch " + fmt(wc.load) + " vs " + fmt(exact));
        c.require(std::abs(wc.load - brute) <= 1e-2, tag + "grid mismatch " + fmt(wc.load) + " vs " + fmt(brute));
        c.require(oracle::valid_matrix(inst, wc.witness, 1e-9), tag + "witness invalid");
        c.require(std::abs(hose::link_load(wc.witness, f, link) - wc.load) <= 1e-9, tag + "witness not tight");
        ++instances;
    }
    if (c.ok) {
        c.detail = std::to_string(instances) + " instances, max error " + fmt(worst_exact) + " exact / " +
                   fmt(worst_grid) + " grid";
    }
    return c;
}

// 4. Unit bounds with 0/1 weights reduce to bipartite matching.
Check matching()
{
    Check c;
    std::mt19937_64 rng(77);
    std::size_t count = 0;
    for (std::size_t n = 2; n <= 6; ++n) {
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
            oracle::HoseInstance inst{std::vector<double>(n, 1.0), std::vector<double>(n, 1.0),
                                      std::vector<std::vector<double>>(n, std::vector<double>(n, 0.0))};
            const unsigned density = 1 + static_cast<unsigned>(rng() % 4);
            for (std::size_t u = 0; u < n; ++u) {
                for (std::size_t v = 0; v < n; ++v) {
                    if (u != v && rng() % 5 < density) {
                        adj[u][v] = true;
                        inst.w[u][v] = 1.0;
                    }
                }
            }
            const double load = hose::max_weighted_traffic(oracle::to_spec(inst), oracle::to_weights(inst)).load;
            const int m = oracle::brute_force_matching(adj);
            c.require(load == static_cast<double>(m),
                      "n=" + std::to_string(n) + ": load " + fmt(load) + " vs matching " + std::to_string(m));
            ++count;
        }
    }
    if (c.ok) {
        c.detail = std::to_string(count) + " instances, |Q| 2..6";
    }
    return c;
}

// Walks usable next hops toward `dest` from `from`. Returns the node list
// (ending at dest) or an empty vector with `why` set. With `allow_break`, a
// chain that ends at a node without a usable entry (a stale route whose
// error message is still travelling) is returned as is.
std::vector<NodeId> walk(const Simulator& sim, NodeId from, NodeId dest, std::string& why, bool allow_break = false)
{
    std::vector<NodeId> chain{from};
    std::set<NodeId> seen{from};
    const aodv::RouteEntry* prev = nullptr;
    NodeId at = from;
    while (at != dest) {
        const aodv::RouteEntry* e = sim.protocol(at).entry(dest);
        if (!e || !e->usable(sim.now())) {
            if (allow_break && prev) {
                return chain;
            }
            why = "broken chain at node " + std::to_string(at.value);
            return {};
        }
        if (prev && !(e->dest_seq > prev->dest_seq || (e->dest_seq == prev->dest_seq && e->hop_count < prev->hop_count))) {
            why = "(dest_seq, -hops) not increasing at node " + std::to_string(at.value);
            return {};
        }
        if (!sim.topology().is_up(at, e->next_hop)) {
            why = "next hop over a missing or down link";
            return {};
        }
        prev = e;
        at = e->next_hop;
        if (!seen.insert(at).second) {
            why = "loop";
            return {};
        }
        chain.push_back(at);
    }
    return chain;
}

// 5. AODV routes: loop-free, valid, shortest under uniform delays.
Check aodv_routes()
{
    Check c;
    std::mt19937_64 rng(5150);
    std::size_t topologies = 0, discoveries = 0, snapshots = 0;
    while (topologies < 120 && c.ok) {
        RandomTopologyParams p;
        p.nodes = 4 + rng() % 9;
        p.width = 600;
        p.height = 600;
        p.range = 250;
        p.seed = rng();
        const Topology topo = generate_random_topology(p);
        ++topologies;
        const auto n = static_cast<std::uint32_t>(topo.node_count());

        // One discovery per ordered pair, each in a fresh network.
        for (std::uint32_t src = 0; src < n && c.ok; ++src) {
            const auto hops = oracle::bfs_hops(topo, NodeId{src});
            for (std::uint32_t dst = 0; dst < n && c.ok; ++dst) {
                if (src == dst) {
                    continue;
                }
                SimConfig cfg;
                cfg.topology = topo;
                TrafficFlow f;
                f.name = "f";
                f.src = NodeId{src};
                f.dst = NodeId{dst};
                f.interval = SimTime::from_seconds(1);
                f.start = SimTime::from_ms(10);
                f.stop = SimTime::from_seconds(1);
                f.count = 1;
                cfg.flows = {f};
                cfg.duration = SimTime::from_seconds(1);
                Simulator sim(std::move(cfg));
                const auto report = sim.run();
                const std::string tag = "topology " + std::to_string(topologies) + " " + std::to_string(src) +
                                        "->" + std::to_string(dst) + ": ";
                c.require(report.overall.packets_received == 1, tag + "packet not delivered");
                std::string why;
                const auto chain = walk(sim, NodeId{src}, NodeId{dst}, why);
                c.require(!chain.empty(), tag + why);
                c.require(chain.size() - 1 == static_cast<std::size_t>(hops[dst]),
                          tag + "route has " + std::to_string(chain.size() - 1) + " hops, BFS " +
                              std::to_string(hops[dst]));
                const auto* e = sim.protocol(NodeId{src}).entry(NodeId{dst});
                c.require(e && e->hop_count == static_cast<std::uint32_t>(hops[dst]), tag + "hop_count differs from BFS");
                why.clear();
                const auto back = walk(sim, NodeId{dst}, NodeId{src}, why);
                c.require(!back.empty() && back.size() - 1 == static_cast<std::size_t>(hops[dst]),
                          tag + "reverse route not shortest " + why);
                ++discoveries;
            }
        }

        // Concurrent flows with a link failure: at every snapshot, every
        // usable route is loop-free, sequence-monotone and over up links.
        SimConfig cfg;
        cfg.topology = topo;
        for (int k = 0; k < 4; ++k) {
            TrafficFlow f;
            f.name = "f" + std::to_string(k);
            f.src = NodeId{static_cast<std::uint32_t>(rng() % n)};
            do {
                f.dst = NodeId{static_cast<std::uint32_t>(rng() % n)};
            } while (f.dst == f.src);
            f.interval = SimTime::from_ms(20 + static_cast<std::int64_t>(rng() % 30));
            f.start = SimTime::from_ms(static_cast<std::int64_t>(rng() % 100));
            f.stop = SimTime::from_seconds(3);
            cfg.flows.push_back(f);
        }
        if (!topo.links().empty()) {
            const auto& l = topo.links()[rng() % topo.links().size()];
            cfg.failures.push_back({l.key, SimTime::from_seconds(1.0), SimTime::from_seconds(2.0)});
        }
        cfg.duration = SimTime::from_seconds(3);
        Simulator sim(std::move(cfg));
        for (std::int64_t ms = 50; ms <= 3000 && c.ok; ms += 50) {
            sim.run_until(SimTime::from_ms(ms));
            for (std::uint32_t u = 0; u < n; ++u) {
                for (const auto& [dest, e] : sim.protocol(NodeId{u}).table()) {
                    if (!e.usable(sim.now())) {
                        continue;
                    }
                    std::string why;
                    const bool ok = !walk(sim, NodeId{u}, dest, why, true).empty();
                    c.require(ok,
                              "topology " + std::to_string(topologies) + " at " + std::to_string(ms) + " ms: " + why);
                }
            }
            ++snapshots;
        }
        c.require(sim.violations().empty(), "conservation violated in a multi-flow run");
    }
    if (c.ok) {
        c.detail = std::to_string(topologies) + " topologies, " + std::to_string(discoveries) + " discoveries, " +
                   std::to_string(snapshots) + " snapshots";
    }
    return c;
}

std::map<std::string, std::string> read_tree(const fs::path& root)
{
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) {
            std::ifstream f(e.path(), std::ios::binary);
            std::stringstream ss;
            ss << f.rdbuf();
            out[fs::relative(e.path(), root).string()] = ss.str();
        }
    }
    return out;
}

// 6. Conservation, determinism, exact energy ledger.
Check conservation_determinism()
{
    Check c;
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(VPNSIM_SCENARIO_DIR)) {
        if (e.path().extension() == ".json") {
            files.push_back(e.path());
        }
    }
    std::sort(files.begin(), files.end());
    c.require(!files.empty(), "no shipped scenarios");
    const fs::path scratch = fs::temp_directory_path() / "vpnsim_acceptance";
    std::size_t runs = 0;
    for (const auto& file : files) {
        const Scenario s = load_scenario(file.string());
        const std::string tag = s.name + ": ";
        fs::remove_all(scratch);
        const auto a = run_scenario(s, scratch / "a", true);
        const auto b = run_scenario(s, scratch / "b", true);
        const auto ta = read_tree(a.dir);
        c.require(ta.size() > 1 && ta == read_tree(b.dir), tag + "output trees differ");

        c.require(a.result.violations().empty(), tag + "invariant violations");
        for (const auto& run : a.result.runs) {
            const std::string seed = tag + "seed " + std::to_string(run.seed) + ": ";
            const std::string cons = oracle::check_conservation(run.report);
            c.require(cons.empty(), seed + "conservation: " + cons);
            const auto totals = oracle::recompute_from_trace(run.trace, s.energy);
            c.require(totals.energy_pj == run.energy_ledger_pj, seed + "trace energy differs from the ledger");
            c.require(run.energy_ledger_pj == run.report.overall.energy_pj, seed + "ledger differs from the report");
            const std::string diff = oracle::compare_report(run.report, totals);
            c.require(diff.empty(), seed + "report differs from the trace: " + diff);
            ++runs;
        }
        const auto serial = run_set_serial(s, true);
        for (std::size_t k = 0; k < serial.runs.size(); ++k) {
            c.require(serial.runs[k].trace == a.result.runs[k].trace, tag + "serial and parallel traces differ");
        }
        c.require(serial.reservation == a.result.reservation, tag + "serial and parallel reservations differ");
    }
    fs::remove_all(scratch);
    if (c.ok) {
        c.detail = std::to_string(files.size()) + " scenarios, " + std::to_string(runs) + " runs";
    }
    return c;
}

// 7. Policy failover chain and scale invariance.
Check policy_properties()
{
    Check c;
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> bw(1e5, 1e7);
    std::uniform_real_distribution<double> scale(1e-3, 1e3);
    for (int trial = 0; trial < 2000; ++trial) {
        policy::PathTable t;
        const std::size_t n = 1 + rng() % 8;
        std::set<double> used;
        while (t.candidates.size() < n) {
            const double b = std::round(bw(rng));
            if (used.insert(b).second) {
                t.candidates.push_back({PathSpec{"c" + std::to_string(t.candidates.size()), {}}, b, true});
            }
        }
        const double demand = std::round(bw(rng) * 0.5);

        policy::PathTable chain = t;
        chain.selected = policy::select_path(chain, demand);
        double last = -1;
        std::size_t visited = 0;
        while (chain.selected) {
            const double b = chain.candidates[*chain.selected].allocated_bps;
            c.require(b > last, "chain not strictly increasing");
            c.require(b >= demand, "infeasible selection");
            last = b;
            ++visited;
            policy::handle_path_failure(chain, chain.candidates[*chain.selected].path.label, demand);
        }
        const auto feasible = static_cast<std::size_t>(std::count_if(
            t.candidates.begin(), t.candidates.end(), [&](const auto& x) { return x.allocated_bps >= demand; }));
        c.require(visited == feasible, "chain skipped a feasible candidate");

        // Keep the demand off every bandwidth so rounding cannot flip feasibility.
        bool clear = true;
        for (const auto& x : t.candidates) {
            clear = clear && std::abs(x.allocated_bps - demand) > 1e-6 * demand;
        }
        const double k = trial % 2 ? std::ldexp(1.0, static_cast<int>(rng() % 60) - 30) : scale(rng);
        if (trial % 2 == 0 && !clear) {
            continue;
        }
        policy::PathTable scaled = t;
        for (auto& x : scaled.candidates) {
            x.allocated_bps *= k;
        }
        const auto a = policy::select_path(t, demand);
        const auto b = policy::select_path(scaled, demand * k);
        c.require(a == b, "selection changed under scaling by " + fmt(k));
    }
    // Exact ties under power-of-two scaling still resolve by label.
    policy::PathTable ties;
    for (const char* l : {"b", "a", "c"}) {
        ties.candidates.push_back({PathSpec{l, {}}, 1.5e6, true});
    }
    for (int e = -20; e <= 20; ++e) {
        policy::PathTable s = ties;
        for (auto& x : s.candidates) {
            x.allocated_bps = std::ldexp(x.allocated_bps, e);
        }
        c.require(policy::select_path(s, std::ldexp(1e6, e)) == 1u, "tie broken differently after scaling");
    }
    if (c.ok) {
        c.detail = "2000 random tables";
    }
    return c;
}

// 8. Serialization delay of one 512-byte packet.
Check serialization()
{
    Check c;
    SimConfig cfg;
    cfg.topology.add_node("s", {}, 250);
    cfg.topology.add_node("d", {150, 0}, 250);
    cfg.topology.add_link(NodeId{0}, NodeId{1}, 1.8e6, SimTime{});
    policy::CandidatePath p;
    p.path = PathSpec{"p", {NodeId{0}, NodeId{1}}};
    p.allocated_bps = 1.8e6;
    cfg.paths = {p};
    TrafficFlow f;
    f.name = "f";
    f.src = NodeId{0};
    f.dst = NodeId{1};
    f.interval = SimTime::from_seconds(1);
    f.start = SimTime::from_ms(100);
    f.stop = SimTime::from_seconds(1);
    f.count = 1;
    f.routing = Routing::policy;
    cfg.flows = {f};
    cfg.duration = SimTime::from_seconds(1);
    cfg.trace = true;
    Simulator sim(std::move(cfg));
    sim.run();
    std::int64_t sent = -1, delivered = -1;
    for (const auto& line : sim.trace()) {
        const TraceLine l = parse_line(line);
        if (l.kind == "send") {
            sent = l.t;
        }
        if (l.kind == "deliver") {
            delivered = l.t;
        }
    }
    const std::int64_t expected = std::llround(4096.0 / 1.8e6 * 1e9);
    c.require(expected == 2'275'556, "expected constant");
    c.require(sent >= 0 && delivered >= 0, "packet not delivered");
    c.require(delivered - sent == expected, "delay " + std::to_string(delivered - sent) + " ns");
    if (c.ok) {
        c.detail = std::to_string(delivered - sent) + " ns";
    }
    return c;
}

}  // namespace

int main()
{
    const std::vector<std::pair<const char*, std::function<Check()>>> criteria{
        {"table1-ordering", table_ordering},
        {"failover", failover},
        {"hose-oracles", hose_oracles},
        {"hose-matching", matching},
        {"aodv-routes", aodv_routes},
        {"conservation-determinism", conservation_determinism},
        {"policy-properties", policy_properties},
        {"serialization-delay", serialization},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Check c;
        try {
            c = criteria[i].second();
        } catch (const std::exception& e) {
            c.ok = false;
            c.detail = std::string("exception: ") + e.what();
        }
        std::printf("%s %zu %s: %s\n", c.ok ? "PASS" : "FAIL", i + 1, criteria[i].first, c.detail.c_str());
        std::fflush(stdout);
        failed += c.ok ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}

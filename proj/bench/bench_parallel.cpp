// Parallel kernels against their serial references: independent runs of a
// scenario, and per-link hose reservation solves.

#include "vpnsim/runner.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace vpnsim;

namespace {

void BM_RunSet(benchmark::State& state, bool parallel)
{
    Scenario s = load_scenario(VPNSIM_SCENARIO_DIR "/random50.json");
    s.runs = static_cast<std::size_t>(state.range(0));
    s.min_runs = 1;
    for (auto _ : state) {
        auto r = parallel ? run_set(s) : run_set_serial(s);
        benchmark::DoNotOptimize(r.mean.overall.pdr);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

// Complete graph on n nodes, every endpoint pair split over the direct link
// and all two-hop detours.
struct HoseCase {
    hose::HoseSpec spec;
    hose::RoutingFractions fractions;
    std::vector<LinkKey> links;
};

HoseCase make_hose(std::uint32_t n)
{
    HoseCase h;
    std::mt19937_64 rng(n);
    std::uniform_real_distribution<double> u(0.5, 1.5);
    for (std::uint32_t i = 0; i < n; ++i) {
        h.spec.add_endpoint("e" + std::to_string(i), NodeId{i}, u(rng) * 1e6, u(rng) * 1e6);
        for (std::uint32_t j = i + 1; j < n; ++j) {
            h.links.push_back(LinkKey::of(NodeId{i}, NodeId{j}));
        }
    }
    for (std::uint32_t a = 0; a < n; ++a) {
        for (std::uint32_t b = 0; b < n; ++b) {
            if (a == b) {
                continue;
            }
            std::vector<hose::WeightedPath> ps{{PathSpec{"", {NodeId{a}, NodeId{b}}}, 0.5}};
            const double share = 0.5 / static_cast<double>(n - 2);
            for (std::uint32_t w = 0; w < n; ++w) {
                if (w != a && w != b) {
                    ps.push_back({PathSpec{"", {NodeId{a}, NodeId{w}, NodeId{b}}}, share});
                }
            }
            h.fractions.set({hose::EndpointId{a}, hose::EndpointId{b}}, ps);
        }
    }
    return h;
}

void BM_Reservation(benchmark::State& state, bool parallel)
{
    const HoseCase h = make_hose(static_cast<std::uint32_t>(state.range(0)));
    for (auto _ : state) {
        auto x = parallel ? hose::minimal_reservation(h.fractions, h.spec, h.links)
                          : hose::minimal_reservation_serial(h.fractions, h.spec, h.links);
        benchmark::DoNotOptimize(x.size());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(h.links.size()));
}

}  // namespace

BENCHMARK_CAPTURE(BM_RunSet, serial, false)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK_CAPTURE(BM_RunSet, parallel, true)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK_CAPTURE(BM_Reservation, serial, false)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK_CAPTURE(BM_Reservation, parallel, true)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();

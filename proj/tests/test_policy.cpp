#include "vpnsim/error.hpp"
#include "vpnsim/policy.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace vpnsim;
using namespace vpnsim::policy;

namespace {

PathTable three()
{
    PathTable t;
    t.candidates.push_back({PathSpec{"p1", {}}, 2.1e6, true});
    t.candidates.push_back({PathSpec{"p2", {}}, 1.8e6, true});
    t.candidates.push_back({PathSpec{"p3", {}}, 1.9e6, true});
    return t;
}

}  // namespace

TEST_CASE("select_path picks the smallest feasible bandwidth")
{
    auto t = three();
    CHECK(select_path(t, 1.0e6) == 1u);
    CHECK(select_path(t, 2.0e6) == 0u);
    CHECK(select_path(t, 1.8e6) == 1u);
    CHECK_FALSE(select_path(t, 3.0e6));
    CHECK(select_path(t, 0.0) == 1u);
    CHECK_FALSE(select_path(PathTable{}, 1.0));
    CHECK_THROWS_AS(select_path(t, -1.0), InvalidArgument);
}

TEST_CASE("ties resolve to the smaller label")
{
    PathTable t;
    t.candidates.push_back({PathSpec{"zeta", {}}, 1e6, true});
    t.candidates.push_back({PathSpec{"alpha", {}}, 1e6, true});
    t.candidates.push_back({PathSpec{"mid", {}}, 1e6, true});
    CHECK(select_path(t, 5e5) == 1u);
}

TEST_CASE("handle_path_failure")
{
    auto t = three();
    t.selected = select_path(t, 1e6);
    CHECK(handle_path_failure(t, "p2", 1e6) == 2u);
    CHECK(t.selected == 2u);
    CHECK_FALSE(t.candidates[1].alive);

    auto u = three();
    u.selected = select_path(u, 1e6);
    CHECK(handle_path_failure(u, "p1", 1e6) == 1u);

    auto all = three();
    handle_path_failure(all, "p1", 1e6);
    handle_path_failure(all, "p2", 1e6);
    CHECK_FALSE(handle_path_failure(all, "p3", 1e6));
    CHECK_FALSE(all.selected);
    CHECK_THROWS_AS(handle_path_failure(all, "nope", 1e6), InvalidArgument);
}

TEST_CASE("restore_path re-enters the pool without preempting")
{
    auto t = three();
    t.selected = select_path(t, 1e6);
    handle_path_failure(t, "p2", 1e6);
    restore_path(t, "p2");
    CHECK(t.candidates[1].alive);
    CHECK(t.selected == 2u);
    CHECK(select_path(t, 1e6) == 1u);
    CHECK_THROWS_AS(restore_path(t, "nope"), InvalidArgument);
}

TEST_CASE("failover visits candidates in increasing bandwidth")
{
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        PathTable t;
        const std::size_t n = 1 + rng() % 8;
        for (std::size_t i = 0; i < n; ++i) {
            t.candidates.push_back({PathSpec{"c" + std::to_string(i), {}}, 1e6 + static_cast<double>(rng() % 20) * 1e5, true});
        }
        const double demand = static_cast<double>(rng() % 25) * 1e5;
        t.selected = select_path(t, demand);
        double last = -1;
        std::string last_label;
        while (t.selected) {
            const auto& c = t.candidates[*t.selected];
            CHECK(c.allocated_bps >= demand);
            CHECK((c.allocated_bps > last || (c.allocated_bps == last && c.path.label > last_label)));
            last = c.allocated_bps;
            last_label = c.path.label;
            handle_path_failure(t, c.path.label, demand);
        }
        // Exhaustion only once nothing feasible is alive.
        for (const auto& c : t.candidates) {
            CHECK((!c.alive || c.allocated_bps < demand));
        }
    }
}

TEST_CASE("selection is invariant under common scaling")
{
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> bw(1.0, 10.0);
    std::uniform_real_distribution<double> scale(1e-3, 1e3);
    for (int trial = 0; trial < 500; ++trial) {
        PathTable t;
        for (std::size_t i = 0; i < 5; ++i) {
            t.candidates.push_back({PathSpec{"c" + std::to_string(i), {}}, bw(rng), true});
        }
        const double demand = bw(rng) * 0.9;
        const auto before = select_path(t, demand);
        // Powers of two scale exactly; other factors only round monotonically.
        const double k = trial % 2 ? std::ldexp(1.0, static_cast<int>(rng() % 40) - 20) : scale(rng);
        PathTable s = t;
        for (auto& c : s.candidates) {
            c.allocated_bps *= k;
        }
        const auto after = select_path(s, demand * k);
        CHECK(before == after);
    }
}

#include "vpnsim/scenario.hpp"

#include <doctest.h>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace vpnsim;
using nlohmann::json;

namespace {

json minimal()
{
    return json::parse(R"({
      "version": 1,
      "name": "mini",
      "duration": 2.0,
      "topology": {
        "nodes": [{"name": "a", "x": 0, "y": 0}, {"name": "b", "x": 100, "y": 0}, {"name": "c", "x": 200, "y": 0}],
        "links": [{"a": "a", "b": "b", "bandwidth": 1.8e6}, {"a": "b", "b": "c", "bandwidth": 1.8e6, "delay": 0.001}]
      },
      "paths": [{"label": "p", "hops": ["a", "b", "c"], "bandwidth": 1.8e6}],
      "flows": [{"name": "f", "src": "a", "dst": "c", "interval": 0.1, "start": 0.1, "stop": 1.5, "routing": "policy"}]
    })");
}

std::string error_of(const json& doc)
{
    try {
        parse_scenario(doc.dump());
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("defaults are applied")
{
    const Scenario s = parse_scenario(minimal().dump());
    CHECK(s.name == "mini");
    CHECK(s.duration == SimTime::from_seconds(2.0));
    CHECK(s.runs == 5);
    CHECK(s.sample_interval == SimTime::from_ms(500));
    REQUIRE(s.flows.size() == 1);
    CHECK(s.flows[0].packet_size == 512);
    CHECK(s.flows[0].routing == Routing::policy);
    CHECK(s.topology.links[0].queue == kDefaultQueueCapacity);
    CHECK(s.energy == EnergyModel{});
    CHECK(s.aodv == aodv::Config{});
}

TEST_CASE("the shipped three-path scenario")
{
    const Scenario s = load_scenario(VPNSIM_SCENARIO_DIR "/table1.json");
    REQUIRE(s.paths.size() == 3);
    CHECK(s.paths[0].bandwidth_bps == 2.1e6);
    CHECK(s.paths[1].bandwidth_bps == 1.8e6);
    CHECK(s.paths[2].bandwidth_bps == 1.9e6);
    CHECK(s.flows[0].packet_size == 512);
}

TEST_CASE("missing and unknown keys are named")
{
    auto doc = minimal();
    doc.erase("duration");
    CHECK(error_of(doc).find("duration") != std::string::npos);

    doc = minimal();
    doc["topology"]["links"][0]["bandwith"] = 1e6;
    const auto e = error_of(doc);
    CHECK(e.find("unknown key") != std::string::npos);
    CHECK(e.find("bandwith") != std::string::npos);

    doc = minimal();
    doc["flows"][0].erase("interval");
    CHECK(error_of(doc).find("flows[0]: missing required field 'interval'") != std::string::npos);

    doc = minimal();
    doc["version"] = 2;
    CHECK(error_of(doc).find("version") != std::string::npos);

    doc = minimal();
    doc["flows"][0]["dst"] = "zz";
    CHECK(error_of(doc).find("zz") != std::string::npos);

    doc = minimal();
    doc["paths"][0]["hops"] = json::array({"a", "c"});
    CHECK_FALSE(error_of(doc).empty());

    doc = minimal();
    doc["flows"][0]["routing"] = "ospf";
    CHECK_FALSE(error_of(doc).empty());

    doc = minimal();
    doc["duration"] = "long";
    CHECK_FALSE(error_of(doc).empty());

    CHECK_THROWS_AS(parse_scenario("{ not json"), ScenarioError);
    CHECK_THROWS_AS(load_scenario("/nonexistent/file.json"), Error);
}

TEST_CASE("round trip parse, serialize, parse")
{
    for (const char* file : {"table1.json", "failover.json", "random50.json"}) {
        CAPTURE(file);
        const Scenario a = load_scenario(std::string(VPNSIM_SCENARIO_DIR "/") + file);
        const std::string text = serialize_scenario(a);
        const Scenario b = parse_scenario(text);
        CHECK(a == b);
        CHECK(serialize_scenario(b) == text);
    }
    auto doc = minimal();
    doc["flows"][0]["count"] = 3;
    doc["flows"][0]["demand"] = 1e5;
    doc["flows"][0]["jitter"] = 0.01;
    doc["failures"] = json::array({{{"link", {"a", "b"}}, {"at", 0.5}, {"restore", 0.75}}});
    doc["energy"] = {{"tx_per_byte", 1e-7}, {"rx_per_byte", 2e-7}, {"per_packet", 3e-6}};
    const Scenario a = parse_scenario(doc.dump());
    CHECK(a.energy.tx_pj_per_byte == 100'000);
    CHECK(a.failures[0].restore == SimTime::from_ms(750));
    CHECK(parse_scenario(serialize_scenario(a)) == a);
}

TEST_CASE("topology and engine configuration")
{
    const Scenario s = parse_scenario(minimal().dump());
    const Topology t = build_topology(s);
    CHECK(t.node_count() == 3);
    CHECK(t.link(LinkKey::of(NodeId{1}, NodeId{2})).prop_delay == SimTime::from_ms(1));
    const SimConfig cfg = build_sim_config(s, t, 7, true);
    CHECK(cfg.seed == 7);
    CHECK(cfg.trace);
    REQUIRE(cfg.paths.size() == 1);
    CHECK(cfg.paths[0].path.hops.size() == 3);
    CHECK_FALSE(build_hose(s, t));

    const Scenario r = load_scenario(VPNSIM_SCENARIO_DIR "/random50.json");
    const Topology rt = build_topology(r);
    CHECK(rt.node_count() == 50);
    CHECK(rt.is_connected());
    auto h = build_hose(r, rt);
    REQUIRE(h);
    CHECK(h->links.size() == rt.links().size());
}

TEST_CASE("apply_sweep")
{
    const Scenario s = load_scenario(VPNSIM_SCENARIO_DIR "/failover.json");
    const Scenario p = apply_sweep(s, "packet_size", 1024);
    for (const auto& f : p.flows) {
        CHECK(f.packet_size == 1024);
    }
    CHECK_THROWS_AS(apply_sweep(s, "packet_size", 10.5), InvalidArgument);
    CHECK_THROWS_AS(apply_sweep(s, "packet_size", 0), InvalidArgument);

    const Scenario i = apply_sweep(s, "flow_interval", 0.01);
    CHECK(i.flows[0].interval == SimTime::from_ms(10));

    const Scenario f = apply_sweep(s, "failure_time", 4.0);
    REQUIRE(f.failures.size() == 1);
    CHECK(f.failures[0].at == SimTime::from_seconds(4.0));
    CHECK(*f.failures[0].restore - f.failures[0].at == *s.failures[0].restore - s.failures[0].at);

    CHECK_THROWS_AS(apply_sweep(s, "nodes", 10), InvalidArgument);
}

TEST_CASE("the README example parses")
{
    // Keep the documented example honest.
    const std::string readme = slurp(VPNSIM_SOURCE_DIR "/README.md");
    const auto begin = readme.find("```json\n");
    REQUIRE(begin != std::string::npos);
    const auto end = readme.find("```", begin + 8);
    const Scenario s = parse_scenario(readme.substr(begin + 8, end - begin - 8));
    CHECK(s.paths.size() == 3);
}

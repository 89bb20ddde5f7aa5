#include "vpnsim/scenario.hpp"

#include "vpnsim/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace vpnsim {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& where, const std::string& what)
{
    throw ScenarioError(where.empty() ? what : where + ": " + what);
}

// Closed-object reader: every key must be consumed before done().
class Reader {
public:
    Reader(const json& j, std::string where) : j_(j), where_(std::move(where))
    {
        if (!j_.is_object()) {
            fail(where_, "expected an object");
        }
    }

    const std::string& where() const { return where_; }
    std::string at(const std::string& key) const { return where_.empty() ? key : where_ + "." + key; }

    const json* opt(const std::string& key)
    {
        used_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    const json& req(const std::string& key)
    {
        const json* v = opt(key);
        if (!v) {
            fail(where_, "missing required field '" + key + "'");
        }
        return *v;
    }

    void done() const
    {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!used_.contains(it.key())) {
                fail(where_, "unknown key '" + it.key() + "'");
            }
        }
    }

    double num_of(const std::string& key, const json& v) const
    {
        if (!v.is_number()) {
            fail(at(key), "expected a number");
        }
        const double d = v.get<double>();
        if (!std::isfinite(d)) {
            fail(at(key), "expected a finite number");
        }
        return d;
    }

    double num(const std::string& key) { return num_of(key, req(key)); }
    double num(const std::string& key, double def)
    {
        const json* v = opt(key);
        return v ? num_of(key, *v) : def;
    }

    std::uint64_t uint_of(const std::string& key, const json& v) const
    {
        if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
            fail(at(key), "expected a non-negative integer");
        }
        return v.get<std::uint64_t>();
    }

    std::uint64_t uint(const std::string& key) { return uint_of(key, req(key)); }
    std::uint64_t uint(const std::string& key, std::uint64_t def)
    {
        const json* v = opt(key);
        return v ? uint_of(key, *v) : def;
    }

    std::string str_of(const std::string& key, const json& v) const
    {
        if (!v.is_string()) {
            fail(at(key), "expected a string");
        }
        return v.get<std::string>();
    }

    std::string str(const std::string& key) { return str_of(key, req(key)); }

    SimTime time_of(const std::string& key, const json& v) const
    {
        const double s = num_of(key, v);
        if (s < 0.0) {
            fail(at(key), "must be >= 0");
        }
        return SimTime::from_seconds(s);
    }

    SimTime time(const std::string& key) { return time_of(key, req(key)); }
    SimTime time(const std::string& key, SimTime def)
    {
        const json* v = opt(key);
        return v ? time_of(key, *v) : def;
    }

    std::vector<std::string> strings(const std::string& key, const json& v) const
    {
        if (!v.is_array()) {
            fail(at(key), "expected an array of strings");
        }
        std::vector<std::string> out;
        for (const auto& e : v) {
            out.push_back(str_of(key, e));
        }
        return out;
    }

    const json& array(const std::string& key, const json& v) const
    {
        if (!v.is_array()) {
            fail(at(key), "expected an array");
        }
        return v;
    }

private:
    const json& j_;
    std::string where_;
    std::set<std::string> used_;
};

std::string idx(const std::string& base, std::size_t i)
{
    return base + "[" + std::to_string(i) + "]";
}

std::int64_t joules_to_pj(Reader& r, const std::string& key, std::int64_t def)
{
    const json* v = r.opt(key);
    if (!v) {
        return def;
    }
    const double j = r.num_of(key, *v);
    if (j < 0.0) {
        fail(r.at(key), "must be >= 0");
    }
    return std::llround(j * 1e12);
}

TopologySpec parse_topology(const json& j)
{
    Reader r(j, "topology");
    TopologySpec t;
    if (const json* rv = r.opt("random")) {
        Reader q(*rv, "topology.random");
        RandomSpec p;
        p.nodes = q.uint("nodes");
        if (const json* area = q.opt("area")) {
            const double a = q.num_of("area", *area);
            p.width = p.height = a;
            if (q.opt("width") || q.opt("height")) {
                fail(q.where(), "give either 'area' or 'width'/'height'");
            }
        } else {
            p.width = q.num("width");
            p.height = q.num("height");
        }
        p.range = q.num("range");
        p.seed = q.uint("seed", 0);
        p.bandwidth_bps = q.num("bandwidth", p.bandwidth_bps);
        p.queue = q.uint("queue", p.queue);
        p.retries = static_cast<int>(q.uint("retries", static_cast<std::uint64_t>(p.retries)));
        q.done();
        t.random = p;
        if (r.opt("nodes") || r.opt("links")) {
            fail("topology", "'random' excludes 'nodes' and 'links'");
        }
        r.done();
        return t;
    }
    const json& nodes = r.array("nodes", r.req("nodes"));
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        Reader q(nodes[i], idx("topology.nodes", i));
        NodeSpec n;
        n.name = q.str("name");
        n.x = q.num("x", 0.0);
        n.y = q.num("y", 0.0);
        n.range = q.num("range", n.range);
        q.done();
        t.nodes.push_back(std::move(n));
    }
    if (const json* lv = r.opt("links")) {
        const json& links = r.array("links", *lv);
        for (std::size_t i = 0; i < links.size(); ++i) {
            Reader q(links[i], idx("topology.links", i));
            LinkSpec l;
            l.a = q.str("a");
            l.b = q.str("b");
            l.bandwidth_bps = q.num("bandwidth", l.bandwidth_bps);
            l.delay = q.time("delay", SimTime{});
            l.queue = q.uint("queue", l.queue);
            q.done();
            t.links.push_back(std::move(l));
        }
    }
    r.done();
    return t;
}

FlowSpec parse_flow(const json& j, const std::string& where)
{
    Reader r(j, where);
    FlowSpec f;
    f.name = r.str("name");
    f.src = r.str("src");
    f.dst = r.str("dst");
    f.packet_size = static_cast<std::uint32_t>(r.uint("packet_size", 512));
    f.interval = r.time("interval");
    f.start = r.time("start", SimTime{});
    f.stop = r.time("stop");
    if (const json* c = r.opt("count")) {
        f.count = r.uint_of("count", *c);
    }
    f.jitter = r.time("jitter", SimTime{});
    if (const json* rt = r.opt("routing")) {
        const std::string s = r.str_of("routing", *rt);
        if (s == "aodv") {
            f.routing = Routing::aodv;
        } else if (s == "policy") {
            f.routing = Routing::policy;
        } else {
            fail(r.at("routing"), "expected \"aodv\" or \"policy\"");
        }
    }
    if (const json* c = r.opt("candidates")) {
        f.candidates = r.strings("candidates", *c);
    }
    if (const json* d = r.opt("demand")) {
        f.demand_bps = r.num_of("demand", *d);
    }
    r.done();
    if (f.routing == Routing::aodv && (!f.candidates.empty() || f.demand_bps)) {
        fail(where, "'candidates' and 'demand' apply to policy flows only");
    }
    return f;
}

HoseSection parse_hose(const json& j)
{
    Reader r(j, "hose");
    HoseSection h;
    const json& eps = r.array("endpoints", r.req("endpoints"));
    for (std::size_t i = 0; i < eps.size(); ++i) {
        Reader q(eps[i], idx("hose.endpoints", i));
        HoseEndpointSpec e;
        e.name = q.str("name");
        e.node = q.str("node");
        e.b_plus = q.num("b_plus");
        e.b_minus = q.num("b_minus");
        q.done();
        h.endpoints.push_back(std::move(e));
    }
    if (const json* rv = r.opt("routing")) {
        const json& routes = r.array("routing", *rv);
        for (std::size_t i = 0; i < routes.size(); ++i) {
            const std::string where = idx("hose.routing", i);
            Reader q(routes[i], where);
            HoseRouteSpec rs;
            rs.from = q.str("from");
            rs.to = q.str("to");
            const json& paths = q.array("paths", q.req("paths"));
            for (std::size_t k = 0; k < paths.size(); ++k) {
                Reader pr(paths[k], idx(where + ".paths", k));
                HosePathSpec p;
                const json* label = pr.opt("path");
                const json* hops = pr.opt("hops");
                if ((label != nullptr) == (hops != nullptr)) {
                    fail(pr.where(), "give exactly one of 'path' and 'hops'");
                }
                if (label) {
                    p.path = pr.str_of("path", *label);
                } else {
                    p.hops = pr.strings("hops", *hops);
                }
                p.fraction = pr.num("fraction");
                pr.done();
                rs.paths.push_back(std::move(p));
            }
            q.done();
            h.routing.push_back(std::move(rs));
        }
    }
    r.done();
    return h;
}

aodv::Config parse_aodv(const json& j)
{
    Reader r(j, "aodv");
    aodv::Config c;
    c.route_lifetime = r.time("route_lifetime", c.route_lifetime);
    c.discovery_timeout = r.time("discovery_timeout", c.discovery_timeout);
    c.rreq_retries = static_cast<int>(r.uint("rreq_retries", static_cast<std::uint64_t>(c.rreq_retries)));
    c.pending_capacity = r.uint("pending_capacity", c.pending_capacity);
    c.seen_cache_capacity = r.uint("seen_cache_capacity", c.seen_cache_capacity);
    c.rreq_size = static_cast<std::uint32_t>(r.uint("rreq_size", c.rreq_size));
    c.rrep_size = static_cast<std::uint32_t>(r.uint("rrep_size", c.rrep_size));
    c.rerr_base_size = static_cast<std::uint32_t>(r.uint("rerr_base_size", c.rerr_base_size));
    c.rerr_per_dest_size = static_cast<std::uint32_t>(r.uint("rerr_per_dest_size", c.rerr_per_dest_size));
    r.done();
    if (c.discovery_timeout <= SimTime{} || c.route_lifetime <= SimTime{}) {
        fail("aodv", "timers must be positive");
    }
    return c;
}

NodeId lookup(const Topology& topo, const std::string& name, const std::string& where)
{
    auto id = topo.find(name);
    if (!id) {
        fail(where, "unknown node '" + name + "'");
    }
    return *id;
}

PathSpec resolve_hops(const Topology& topo, const std::string& label, const std::vector<std::string>& hops,
                      const std::string& where)
{
    PathSpec p;
    p.label = label;
    for (const auto& h : hops) {
        p.hops.push_back(lookup(topo, h, where));
    }
    return p;
}

// Cross-reference checks that need the built topology.
void validate(const Scenario& s)
{
    if (s.version != kScenarioVersion) {
        fail("version", "unsupported version " + std::to_string(s.version));
    }
    if (s.name.empty() || s.name.find_first_of("/\\") != std::string::npos || s.name == "." || s.name == "..") {
        fail("name", "must be a non-empty plain file name");
    }
    if (s.duration <= SimTime{}) {
        fail("duration", "must be positive");
    }
    if (s.sample_interval <= SimTime{}) {
        fail("sample_interval", "must be positive");
    }
    if (s.runs == 0) {
        fail("runs", "must be positive");
    }
    if (s.flows.empty()) {
        fail("flows", "at least one flow is required");
    }
    const Topology topo = build_topology(s);
    // The engine re-validates flows, paths and failures against the topology.
    Simulator probe(build_sim_config(s, topo, s.seed, false));
    build_hose(s, topo);
}

ojson time_json(SimTime t)
{
    return static_cast<double>(t.ns()) / 1e9;
}

ojson pj_json(std::int64_t pj)
{
    return static_cast<double>(pj) / 1e12;
}

}  // namespace

Scenario parse_scenario(std::string_view text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ScenarioError(std::string("malformed scenario: ") + e.what());
    }
    Reader r(doc, "");
    Scenario s;
    s.version = static_cast<int>(r.uint("version"));
    if (s.version != kScenarioVersion) {
        fail("version", "unsupported version " + std::to_string(s.version));
    }
    s.name = r.str("name");
    s.duration = r.time("duration");
    s.sample_interval = r.time("sample_interval", s.sample_interval);
    s.runs = r.uint("runs", s.runs);
    s.min_runs = r.uint("min_runs", s.min_runs);
    s.seed = r.uint("seed", 0);
    if (const json* m = r.opt("measured_flow")) {
        s.measured_flow = r.str_of("measured_flow", *m);
    }
    s.topology = parse_topology(r.req("topology"));
    if (const json* pv = r.opt("paths")) {
        const json& paths = r.array("paths", *pv);
        for (std::size_t i = 0; i < paths.size(); ++i) {
            Reader q(paths[i], idx("paths", i));
            PathEntry p;
            p.label = q.str("label");
            p.hops = q.strings("hops", q.req("hops"));
            p.bandwidth_bps = q.num("bandwidth");
            q.done();
            s.paths.push_back(std::move(p));
        }
    }
    const json& flows = r.array("flows", r.req("flows"));
    for (std::size_t i = 0; i < flows.size(); ++i) {
        s.flows.push_back(parse_flow(flows[i], idx("flows", i)));
    }
    if (const json* fv = r.opt("failures")) {
        const json& fails = r.array("failures", *fv);
        for (std::size_t i = 0; i < fails.size(); ++i) {
            Reader q(fails[i], idx("failures", i));
            FailureSpec f;
            const auto link = q.strings("link", q.req("link"));
            if (link.size() != 2) {
                fail(q.at("link"), "expected two node names");
            }
            f.a = link[0];
            f.b = link[1];
            f.at = q.time("at");
            if (const json* rs = q.opt("restore")) {
                f.restore = q.time_of("restore", *rs);
                if (*f.restore <= f.at) {
                    fail(q.at("restore"), "must come after 'at'");
                }
            }
            q.done();
            s.failures.push_back(std::move(f));
        }
    }
    if (const json* h = r.opt("hose")) {
        s.hose = parse_hose(*h);
    }
    if (const json* e = r.opt("energy")) {
        Reader q(*e, "energy");
        s.energy.tx_pj_per_byte = joules_to_pj(q, "tx_per_byte", s.energy.tx_pj_per_byte);
        s.energy.rx_pj_per_byte = joules_to_pj(q, "rx_per_byte", s.energy.rx_pj_per_byte);
        s.energy.overhead_pj_per_packet = joules_to_pj(q, "per_packet", s.energy.overhead_pj_per_packet);
        q.done();
    }
    if (const json* a = r.opt("aodv")) {
        s.aodv = parse_aodv(*a);
    }
    r.done();
    validate(s);
    return s;
}

Scenario load_scenario(const std::string& file)
{
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw ScenarioError("cannot read scenario file '" + file + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

std::string serialize_scenario(const Scenario& s)
{
    ojson doc;
    doc["version"] = s.version;
    doc["name"] = s.name;
    doc["duration"] = time_json(s.duration);
    doc["sample_interval"] = time_json(s.sample_interval);
    doc["runs"] = s.runs;
    doc["min_runs"] = s.min_runs;
    doc["seed"] = s.seed;
    if (s.measured_flow) {
        doc["measured_flow"] = *s.measured_flow;
    }

    ojson topo = ojson::object();
    if (s.topology.random) {
        const RandomSpec& p = *s.topology.random;
        topo["random"] = {{"nodes", p.nodes},       {"width", p.width},       {"height", p.height},
                          {"range", p.range},       {"seed", p.seed},         {"bandwidth", p.bandwidth_bps},
                          {"queue", p.queue},       {"retries", p.retries}};
    } else {
        ojson nodes = ojson::array();
        for (const auto& n : s.topology.nodes) {
            nodes.push_back({{"name", n.name}, {"x", n.x}, {"y", n.y}, {"range", n.range}});
        }
        ojson links = ojson::array();
        for (const auto& l : s.topology.links) {
            links.push_back({{"a", l.a},
                             {"b", l.b},
                             {"bandwidth", l.bandwidth_bps},
                             {"delay", time_json(l.delay)},
                             {"queue", l.queue}});
        }
        topo["nodes"] = nodes;
        topo["links"] = links;
    }
    doc["topology"] = topo;

    ojson paths = ojson::array();
    for (const auto& p : s.paths) {
        paths.push_back({{"label", p.label}, {"hops", p.hops}, {"bandwidth", p.bandwidth_bps}});
    }
    doc["paths"] = paths;

    ojson flows = ojson::array();
    for (const auto& f : s.flows) {
        ojson o;
        o["name"] = f.name;
        o["src"] = f.src;
        o["dst"] = f.dst;
        o["packet_size"] = f.packet_size;
        o["interval"] = time_json(f.interval);
        o["start"] = time_json(f.start);
        o["stop"] = time_json(f.stop);
        if (f.count) {
            o["count"] = *f.count;
        }
        o["jitter"] = time_json(f.jitter);
        o["routing"] = f.routing == Routing::policy ? "policy" : "aodv";
        if (f.routing == Routing::policy) {
            o["candidates"] = f.candidates;
            if (f.demand_bps) {
                o["demand"] = *f.demand_bps;
            }
        }
        flows.push_back(o);
    }
    doc["flows"] = flows;

    ojson fails = ojson::array();
    for (const auto& f : s.failures) {
        ojson o;
        o["link"] = {f.a, f.b};
        o["at"] = time_json(f.at);
        if (f.restore) {
            o["restore"] = time_json(*f.restore);
        }
        fails.push_back(o);
    }
    doc["failures"] = fails;

    if (s.hose) {
        ojson eps = ojson::array();
        for (const auto& e : s.hose->endpoints) {
            eps.push_back({{"name", e.name}, {"node", e.node}, {"b_plus", e.b_plus}, {"b_minus", e.b_minus}});
        }
        ojson routes = ojson::array();
        for (const auto& r : s.hose->routing) {
            ojson ps = ojson::array();
            for (const auto& p : r.paths) {
                ojson o;
                if (p.path) {
                    o["path"] = *p.path;
                } else {
                    o["hops"] = p.hops;
                }
                o["fraction"] = p.fraction;
                ps.push_back(o);
            }
            routes.push_back({{"from", r.from}, {"to", r.to}, {"paths", ps}});
        }
        doc["hose"] = {{"endpoints", eps}, {"routing", routes}};
    }

    doc["energy"] = {{"tx_per_byte", pj_json(s.energy.tx_pj_per_byte)},
                     {"rx_per_byte", pj_json(s.energy.rx_pj_per_byte)},
                     {"per_packet", pj_json(s.energy.overhead_pj_per_packet)}};
    const aodv::Config& a = s.aodv;
    doc["aodv"] = {{"route_lifetime", time_json(a.route_lifetime)},
                   {"discovery_timeout", time_json(a.discovery_timeout)},
                   {"rreq_retries", a.rreq_retries},
                   {"pending_capacity", a.pending_capacity},
                   {"seen_cache_capacity", a.seen_cache_capacity},
                   {"rreq_size", a.rreq_size},
                   {"rrep_size", a.rrep_size},
                   {"rerr_base_size", a.rerr_base_size},
                   {"rerr_per_dest_size", a.rerr_per_dest_size}};
    return doc.dump(2) + "\n";
}

Topology build_topology(const Scenario& s)
{
    if (s.topology.random) {
        const RandomSpec& p = *s.topology.random;
        RandomTopologyParams params;
        params.nodes = p.nodes;
        params.width = p.width;
        params.height = p.height;
        params.range = p.range;
        params.seed = p.seed;
        params.bandwidth_bps = p.bandwidth_bps;
        params.queue_capacity = p.queue;
        params.max_retries = p.retries;
        return generate_random_topology(params);
    }
    Topology topo;
    for (std::size_t i = 0; i < s.topology.nodes.size(); ++i) {
        const NodeSpec& n = s.topology.nodes[i];
        if (topo.find(n.name)) {
            fail(idx("topology.nodes", i), "duplicate node '" + n.name + "'");
        }
        topo.add_node(n.name, Position{n.x, n.y}, n.range);
    }
    for (std::size_t i = 0; i < s.topology.links.size(); ++i) {
        const LinkSpec& l = s.topology.links[i];
        const std::string where = idx("topology.links", i);
        try {
            topo.add_link(lookup(topo, l.a, where), lookup(topo, l.b, where), l.bandwidth_bps, l.delay, l.queue);
        } catch (const InvalidArgument& e) {
            fail(where, e.what());
        }
    }
    return topo;
}

SimConfig build_sim_config(const Scenario& s, const Topology& topo, std::uint64_t seed, bool trace)
{
    SimConfig cfg;
    cfg.topology = topo;
    for (std::size_t i = 0; i < s.paths.size(); ++i) {
        const PathEntry& p = s.paths[i];
        policy::CandidatePath c;
        c.path = resolve_hops(topo, p.label, p.hops, idx("paths", i));
        c.allocated_bps = p.bandwidth_bps;
        cfg.paths.push_back(std::move(c));
    }
    for (std::size_t i = 0; i < s.flows.size(); ++i) {
        const FlowSpec& f = s.flows[i];
        const std::string where = idx("flows", i);
        TrafficFlow t;
        t.name = f.name;
        t.src = lookup(topo, f.src, where);
        t.dst = lookup(topo, f.dst, where);
        t.packet_size = f.packet_size;
        t.interval = f.interval;
        t.start = f.start;
        t.stop = f.stop;
        t.count = f.count;
        t.jitter = f.jitter;
        t.routing = f.routing;
        t.candidates = f.candidates;
        t.demand_bps = f.demand_bps;
        cfg.flows.push_back(std::move(t));
    }
    for (std::size_t i = 0; i < s.failures.size(); ++i) {
        const FailureSpec& f = s.failures[i];
        const std::string where = idx("failures", i);
        const NodeId a = lookup(topo, f.a, where);
        const NodeId b = lookup(topo, f.b, where);
        if (!topo.has_link(a, b)) {
            fail(where, "no link " + f.a + "-" + f.b);
        }
        cfg.failures.push_back(FailureEvent{LinkKey::of(a, b), f.at, f.restore});
    }
    cfg.energy = s.energy;
    cfg.aodv = s.aodv;
    cfg.duration = s.duration;
    cfg.sample_interval = s.sample_interval;
    cfg.seed = seed;
    cfg.measured_flow = s.measured_flow;
    cfg.trace = trace;
    return cfg;
}

std::optional<HoseModel> build_hose(const Scenario& s, const Topology& topo)
{
    if (!s.hose) {
        return std::nullopt;
    }
    HoseModel m;
    std::map<std::string, hose::EndpointId> ids;
    for (std::size_t i = 0; i < s.hose->endpoints.size(); ++i) {
        const HoseEndpointSpec& e = s.hose->endpoints[i];
        const std::string where = idx("hose.endpoints", i);
        if (ids.contains(e.name)) {
            fail(where, "duplicate endpoint '" + e.name + "'");
        }
        try {
            ids[e.name] = m.spec.add_endpoint(e.name, lookup(topo, e.node, where), e.b_plus, e.b_minus);
        } catch (const InvalidArgument& ex) {
            fail(where, ex.what());
        }
    }
    auto endpoint = [&](const std::string& name, const std::string& where) {
        auto it = ids.find(name);
        if (it == ids.end()) {
            fail(where, "unknown endpoint '" + name + "'");
        }
        return it->second;
    };
    for (std::size_t i = 0; i < s.hose->routing.size(); ++i) {
        const HoseRouteSpec& r = s.hose->routing[i];
        const std::string where = idx("hose.routing", i);
        const hose::EndpointPair pair{endpoint(r.from, where), endpoint(r.to, where)};
        const NodeId from = m.spec.endpoint(pair.from).node;
        const NodeId to = m.spec.endpoint(pair.to).node;
        std::vector<hose::WeightedPath> paths;
        for (std::size_t k = 0; k < r.paths.size(); ++k) {
            const HosePathSpec& p = r.paths[k];
            const std::string pw = idx(where + ".paths", k);
            PathSpec spec;
            if (p.path) {
                auto it = std::find_if(s.paths.begin(), s.paths.end(),
                                       [&](const PathEntry& e) { return e.label == *p.path; });
                if (it == s.paths.end()) {
                    fail(pw, "unknown path '" + *p.path + "'");
                }
                spec = resolve_hops(topo, it->label, it->hops, pw);
            } else {
                spec = resolve_hops(topo, "", p.hops, pw);
            }
            if (spec.hops.empty() || spec.hops.front() != from || spec.hops.back() != to) {
                fail(pw, "path does not join the endpoints' nodes");
            }
            if (!validate_path(topo, spec)) {
                fail(pw, "path is not valid in the topology");
            }
            paths.push_back(hose::WeightedPath{std::move(spec), p.fraction});
        }
        try {
            m.fractions.set(pair, std::move(paths));
        } catch (const InvalidArgument& ex) {
            fail(where, ex.what());
        }
    }
    for (const auto& l : topo.links()) {
        m.links.push_back(l.key);
    }
    return m;
}

Scenario apply_sweep(const Scenario& s, std::string_view parameter, double value)
{
    Scenario out = s;
    if (parameter == "packet_size") {
        if (!(value >= 1.0) || value != std::floor(value) || value > 65535.0) {
            throw InvalidArgument("packet_size must be a positive integer");
        }
        for (auto& f : out.flows) {
            f.packet_size = static_cast<std::uint32_t>(value);
        }
    } else if (parameter == "flow_interval") {
        if (!(value > 0.0)) {
            throw InvalidArgument("flow_interval must be positive");
        }
        for (auto& f : out.flows) {
            f.interval = SimTime::from_seconds(value);
        }
    } else if (parameter == "failure_time") {
        if (out.failures.empty()) {
            throw InvalidArgument("failure_time sweep needs a scenario with failures");
        }
        if (!(value >= 0.0)) {
            throw InvalidArgument("failure_time must be >= 0");
        }
        const SimTime at = SimTime::from_seconds(value);
        for (auto& f : out.failures) {
            if (f.restore) {
                f.restore = at + (*f.restore - f.at);
            }
            f.at = at;
        }
    } else {
        throw InvalidArgument("unknown sweep parameter '" + std::string(parameter) +
                              "' (expected packet_size, flow_interval or failure_time)");
    }
    validate(out);
    return out;
}

}  // namespace vpnsim

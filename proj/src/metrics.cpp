#include "vpnsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>

namespace vpnsim::metrics {

MetricsCollector::MetricsCollector(const std::vector<std::string>& flows, const std::vector<std::string>& paths,
                                   const std::vector<std::string>& links, std::string measured_flow)
    : measured_flow_(std::move(measured_flow))
{
    for (const auto& f : flows) {
        flows_[f];
    }
    for (const auto& p : paths) {
        paths_[p];
    }
    for (const auto& l : links) {
        link_window_bits_[l] = 0;
        link_usage_[l];
    }
}

MetricsCollector::Live& MetricsCollector::live(PacketId id, const char* what)
{
    auto it = outstanding_.find(id);
    if (it == outstanding_.end()) {
        throw InvalidArgument(std::string(what) + " for unknown packet id " + std::to_string(id));
    }
    return it->second;
}

template <typename F>
void MetricsCollector::each_scope(const Live& l, F&& f)
{
    if (!l.data) {
        f(control_);
        return;
    }
    f(overall_);
    if (l.flow) {
        f(*l.flow);
    }
    if (l.path) {
        f(*l.path);
    }
}

void MetricsCollector::record_send(const PacketTag& tag)
{
    if (outstanding_.contains(tag.id)) {
        throw InvalidArgument("packet id " + std::to_string(tag.id) + " sent twice");
    }
    Live l{tag.data, nullptr, nullptr, tag.created};
    if (tag.data) {
        auto f = flows_.find(tag.flow);
        auto p = paths_.find(tag.path);
        if (f == flows_.end() || p == paths_.end()) {
            throw InvalidArgument("packet " + std::to_string(tag.id) + " has an unregistered flow or path");
        }
        l.flow = &f->second;
        l.path = &p->second;
    }
    auto [it, ok] = outstanding_.emplace(tag.id, l);
    each_scope(it->second, [](Counters& c) { ++c.sent; });
}

void MetricsCollector::record_receive(PacketId id, SimTime now)
{
    Live& l = live(id, "receive");
    const std::int64_t delay = (now - l.created).ns();
    each_scope(l, [&](Counters& c) {
        ++c.received;
        c.delay_ns += delay;
        c.window_delay_ns += delay;
        ++c.window_deliveries;
    });
    outstanding_.erase(id);
}

void MetricsCollector::record_drop(PacketId id, SimTime now)
{
    (void)now;
    Live& l = live(id, "drop");
    each_scope(l, [](Counters& c) { ++c.dropped; });
    outstanding_.erase(id);
}

void MetricsCollector::record_energy(PacketId id, std::int64_t pj)
{
    Live& l = live(id, "energy debit");
    if (!l.data) {
        control_.energy_pj += pj;
        overall_.energy_pj += pj;
        return;
    }
    each_scope(l, [&](Counters& c) { c.energy_pj += pj; });
}

void MetricsCollector::record_transmit(PacketId id, const std::string& link, std::uint64_t bits)
{
    Live& l = live(id, "transmit");
    auto it = link_window_bits_.find(link);
    if (it == link_window_bits_.end()) {
        throw InvalidArgument("transmit on unregistered link " + link);
    }
    it->second += bits;
    if (!l.data) {
        control_.window_bits += bits;
        overall_.window_bits += bits;
        return;
    }
    each_scope(l, [&](Counters& c) { c.window_bits += bits; });
}

std::vector<std::string> MetricsCollector::sample(const SampleInput& in)
{
    const double window_s = in.window.seconds();
    std::map<std::string, double> link_bps;
    for (auto& [link, bits] : link_window_bits_) {
        const double bps = window_s > 0 ? static_cast<double>(bits) / window_s : 0.0;
        link_bps[link] = bps;
        link_usage_[link].push_back(bps);
        bits = 0;
    }
    auto mean_over = [&](const std::vector<std::string>& links) {
        if (links.empty()) {
            return 0.0;
        }
        double sum = 0;
        for (const auto& l : links) {
            sum += link_bps.at(l);
        }
        return sum / static_cast<double>(links.size());
    };

    std::vector<std::string> violations;
    auto push = [&](const std::string& name, Counters& c, double in_flight, const std::vector<std::string>* links) {
        Sample s;
        s.time = in.now;
        s.sent = static_cast<double>(c.sent);
        s.received = static_cast<double>(c.received);
        s.dropped = static_cast<double>(c.dropped);
        s.in_flight = in_flight;
        s.energy_j = static_cast<double>(c.energy_pj) * 1e-12;
        s.pdr = c.sent ? 100.0 * static_cast<double>(c.received) / static_cast<double>(c.sent) : 0.0;
        if (c.window_deliveries) {
            c.last_window_delay_s =
                static_cast<double>(c.window_delay_ns) / static_cast<double>(c.window_deliveries) * 1e-9;
        }
        s.routing_delay_s = c.last_window_delay_s;
        if (links) {
            s.bandwidth_bps = mean_over(*links);
        } else {
            s.bandwidth_bps = window_s > 0 ? static_cast<double>(c.window_bits) / window_s : 0.0;
        }
        c.window_delay_ns = 0;
        c.window_deliveries = 0;
        c.window_bits = 0;
        c.samples.push_back(s);
        if (static_cast<double>(c.sent) != static_cast<double>(c.received + c.dropped) + in_flight) {
            violations.push_back(name);
        }
    };
    auto lookup = [](const std::map<std::string, double>& m, const std::string& k) {
        auto it = m.find(k);
        return it == m.end() ? 0.0 : it->second;
    };
    auto links_for = [](const std::map<std::string, std::vector<std::string>>& m,
                        const std::string& k) -> const std::vector<std::string>* {
        auto it = m.find(k);
        return it == m.end() ? nullptr : &it->second;
    };

    push("overall", overall_, in.in_flight_data, nullptr);
    push("control", control_, in.in_flight_control, nullptr);
    for (auto& [name, c] : flows_) {
        push("flow:" + name, c, lookup(in.in_flight_flows, name), links_for(in.flow_links, name));
    }
    for (auto& [name, c] : paths_) {
        push("path:" + name, c, lookup(in.in_flight_paths, name), links_for(in.path_links, name));
    }
    // Overall bandwidth is the sum over all links, not a per-scope count.
    double total = 0;
    for (const auto& [link, bps] : link_bps) {
        total += bps;
    }
    overall_.samples.back().bandwidth_bps = total;
    return violations;
}

ScopeReport MetricsCollector::report(const Counters& c)
{
    ScopeReport r;
    r.packets_sent = static_cast<double>(c.sent);
    r.packets_received = static_cast<double>(c.received);
    r.packets_dropped = static_cast<double>(c.dropped);
    r.pdr = c.sent ? 100.0 * static_cast<double>(c.received) / static_cast<double>(c.sent) : 0.0;
    r.mean_delay_s = c.received ? static_cast<double>(c.delay_ns) / static_cast<double>(c.received) * 1e-9 : 0.0;
    r.energy_pj = c.energy_pj;
    r.energy_j = static_cast<double>(c.energy_pj) * 1e-12;
    r.samples = c.samples;
    return r;
}

MetricsReport MetricsCollector::finalize() const
{
    MetricsReport out;
    out.overall = report(overall_);
    out.control = report(control_);
    for (const auto& [name, c] : flows_) {
        out.flows[name] = report(c);
    }
    for (const auto& [name, c] : paths_) {
        out.paths[name] = report(c);
    }
    out.bandwidth_usage = link_usage_;
    out.measured_flow = measured_flow_;
    return out;
}

namespace {

double sorted_mean(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    double sum = 0;
    for (double x : v) {
        sum += x;
    }
    return sum / static_cast<double>(v.size());
}

template <typename Get>
double mean_of(std::span<const MetricsReport> runs, Get&& get)
{
    std::vector<double> v;
    v.reserve(runs.size());
    for (const auto& r : runs) {
        v.push_back(get(r));
    }
    return sorted_mean(std::move(v));
}

ScopeReport mean_scope(std::span<const MetricsReport> runs, const std::function<const ScopeReport&(const MetricsReport&)>& at)
{
    ScopeReport out;
    out.packets_sent = mean_of(runs, [&](const auto& r) { return at(r).packets_sent; });
    out.packets_received = mean_of(runs, [&](const auto& r) { return at(r).packets_received; });
    out.packets_dropped = mean_of(runs, [&](const auto& r) { return at(r).packets_dropped; });
    out.pdr = mean_of(runs, [&](const auto& r) { return at(r).pdr; });
    out.mean_delay_s = mean_of(runs, [&](const auto& r) { return at(r).mean_delay_s; });
    out.energy_j = mean_of(runs, [&](const auto& r) { return at(r).energy_j; });
    out.energy_pj = std::llround(mean_of(runs, [&](const auto& r) { return static_cast<double>(at(r).energy_pj); }));

    const std::size_t n = at(runs.front()).samples.size();
    for (const auto& r : runs) {
        if (at(r).samples.size() != n) {
            throw InvalidArgument("runs have different sample counts; cannot average time series");
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        Sample s;
        s.time = at(runs.front()).samples[i].time;
        auto field = [&](double Sample::*m) {
            return mean_of(runs, [&](const auto& r) { return at(r).samples[i].*m; });
        };
        s.sent = field(&Sample::sent);
        s.received = field(&Sample::received);
        s.dropped = field(&Sample::dropped);
        s.in_flight = field(&Sample::in_flight);
        s.energy_j = field(&Sample::energy_j);
        s.pdr = field(&Sample::pdr);
        s.routing_delay_s = field(&Sample::routing_delay_s);
        s.bandwidth_bps = field(&Sample::bandwidth_bps);
        out.samples.push_back(s);
    }
    return out;
}

template <typename Map>
void require_same_keys(std::span<const MetricsReport> runs, Map MetricsReport::*member, const char* what)
{
    for (const auto& r : runs) {
        if ((r.*member).size() != (runs.front().*member).size() ||
            !std::equal((r.*member).begin(), (r.*member).end(), (runs.front().*member).begin(),
                        [](const auto& a, const auto& b) { return a.first == b.first; })) {
            throw InvalidArgument(std::string("runs disagree on their ") + what);
        }
    }
}

}  // namespace

MetricsReport aggregate_runs(std::span<const MetricsReport> runs, std::size_t min_runs)
{
    if (runs.size() < min_runs || runs.empty()) {
        throw InvalidArgument("aggregation needs at least " + std::to_string(std::max<std::size_t>(min_runs, 1)) +
                              " runs, got " + std::to_string(runs.size()));
    }
    require_same_keys(runs, &MetricsReport::flows, "flows");
    require_same_keys(runs, &MetricsReport::paths, "paths");
    require_same_keys(runs, &MetricsReport::bandwidth_usage, "links");

    MetricsReport out;
    out.measured_flow = runs.front().measured_flow;
    out.overall = mean_scope(runs, [](const MetricsReport& r) -> const ScopeReport& { return r.overall; });
    out.control = mean_scope(runs, [](const MetricsReport& r) -> const ScopeReport& { return r.control; });
    for (const auto& [name, _] : runs.front().flows) {
        out.flows[name] = mean_scope(runs, [&](const MetricsReport& r) -> const ScopeReport& { return r.flows.at(name); });
    }
    for (const auto& [name, _] : runs.front().paths) {
        out.paths[name] = mean_scope(runs, [&](const MetricsReport& r) -> const ScopeReport& { return r.paths.at(name); });
    }
    for (const auto& [link, series] : runs.front().bandwidth_usage) {
        std::vector<double> mean(series.size());
        for (std::size_t i = 0; i < series.size(); ++i) {
            mean[i] = mean_of(runs, [&](const MetricsReport& r) {
                const auto& s = r.bandwidth_usage.at(link);
                if (s.size() != series.size()) {
                    throw InvalidArgument("runs have different sample counts for link " + link);
                }
                return s[i];
            });
        }
        out.bandwidth_usage[link] = std::move(mean);
    }
    return out;
}

std::vector<SeriesRow> emit_timeseries(const ScopeReport& scope, std::string_view metric)
{
    double Sample::*field = nullptr;
    if (metric == "bandwidth") {
        field = &Sample::bandwidth_bps;
    } else if (metric == "packets_received") {
        field = &Sample::received;
    } else if (metric == "pdr") {
        field = &Sample::pdr;
    } else if (metric == "energy") {
        field = &Sample::energy_j;
    } else if (metric == "routing_delay") {
        field = &Sample::routing_delay_s;
    } else if (metric == "packet_loss") {
        field = &Sample::dropped;
    } else {
        throw InvalidArgument("unknown time-series metric '" + std::string(metric) + "'");
    }
    std::vector<SeriesRow> rows;
    rows.reserve(scope.samples.size());
    for (const auto& s : scope.samples) {
        rows.push_back(SeriesRow{s.time, s.*field});
    }
    return rows;
}

void write_timeseries_csv(std::ostream& out, const std::vector<SeriesRow>& rows)
{
    out << "time_s,value\n";
    for (const auto& r : rows) {
        out << format_seconds(r.time) << ',' << format_value(r.value) << '\n';
    }
}

std::string format_value(double v)
{
    if (v == 0.0) {
        return "0";
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

}  // namespace vpnsim::metrics

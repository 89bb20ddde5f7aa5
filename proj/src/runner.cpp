#include "vpnsim/runner.hpp"

#include "vpnsim/error.hpp"

#include <exception>
#include <fstream>
#include <ostream>
#include <set>
#include <system_error>

namespace vpnsim {

namespace fs = std::filesystem;

namespace {

void check_scope(const std::string& name, const metrics::ScopeReport& r, std::vector<std::string>& out)
{
    if (r.packets_received + r.packets_dropped > r.packets_sent) {
        out.push_back(name + ": received + dropped exceeds sent");
    }
    if (r.pdr < 0.0 || r.pdr > 100.0) {
        out.push_back(name + ": pdr outside [0, 100]");
    }
}

std::ofstream open(const fs::path& p)
{
    std::ofstream f(p, std::ios::binary);
    if (!f) {
        throw Error("cannot write " + p.string());
    }
    return f;
}

void write_series(const fs::path& dir, const metrics::ScopeReport& scope)
{
    fs::create_directories(dir);
    for (auto metric : metrics::kSeriesMetrics) {
        auto f = open(dir / (std::string(metric) + ".csv"));
        metrics::write_timeseries_csv(f, metrics::emit_timeseries(scope, metric));
    }
}

void write_rows(std::ostream& out, const std::vector<SummaryRow>& rows, const std::string& prefix)
{
    using metrics::format_value;
    for (const auto& r : rows) {
        out << prefix << r.label << ',' << format_value(r.bandwidth_bps) << ',' << format_value(r.packets_received)
            << ',' << format_value(r.pdr) << ',' << format_value(r.routing_delay_s) << ','
            << format_value(r.energy_j) << ',' << format_value(r.packet_loss) << '\n';
    }
}

constexpr const char* kSummaryHeader = "path,bandwidth_bps,packets_received,pdr,routing_delay_s,energy_j,packet_loss";

template <typename Body>
fs::path publish(const fs::path& final_dir, Body&& body)
{
    fs::path tmp = final_dir;
    tmp += ".partial";
    fs::remove_all(tmp);
    try {
        fs::create_directories(tmp);
        body(tmp);
        fs::remove_all(final_dir);
        fs::rename(tmp, final_dir);
    } catch (...) {
        std::error_code ec;
        fs::remove_all(tmp, ec);
        throw;
    }
    return final_dir;
}

RunSetResult finish(const Scenario& s, std::vector<RunResult> runs, bool parallel)
{
    RunSetResult out;
    std::vector<metrics::MetricsReport> reports;
    for (const auto& r : runs) {
        reports.push_back(r.report);
    }
    out.mean = metrics::aggregate_runs(reports, s.min_runs);
    out.runs = std::move(runs);
    if (s.hose) {
        const Topology topo = build_topology(s);
        auto model = build_hose(s, topo);
        out.reservation = parallel ? hose::minimal_reservation(model->fractions, model->spec, model->links)
                                   : hose::minimal_reservation_serial(model->fractions, model->spec, model->links);
    }
    return out;
}

}  // namespace

std::vector<std::string> RunSetResult::violations() const
{
    std::vector<std::string> out;
    for (const auto& r : runs) {
        for (const auto& v : r.violations) {
            out.push_back("seed " + std::to_string(r.seed) + ": " + v);
        }
    }
    return out;
}

RunResult run_once(const Scenario& s, const Topology& topo, std::uint64_t seed, bool trace)
{
    Simulator sim(build_sim_config(s, topo, seed, trace));
    RunResult r;
    r.seed = seed;
    r.report = sim.run();
    r.trace = sim.trace();
    r.energy_ledger_pj = sim.energy_ledger_pj();
    r.violations = sim.violations();
    if (r.energy_ledger_pj != r.report.overall.energy_pj) {
        r.violations.push_back("energy ledger disagrees with the report");
    }
    check_scope("overall", r.report.overall, r.violations);
    for (const auto& [name, scope] : r.report.paths) {
        check_scope("path " + name, scope, r.violations);
    }
    for (const auto& [name, scope] : r.report.flows) {
        check_scope("flow " + name, scope, r.violations);
    }
    return r;
}

RunSetResult run_set(const Scenario& s, bool trace)
{
    const Topology topo = build_topology(s);
    std::vector<RunResult> runs(s.runs);
    std::vector<std::exception_ptr> errors(s.runs);
    const auto count = static_cast<std::ptrdiff_t>(s.runs);

#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t k = 0; k < count; ++k) {
        try {
            runs[k] = run_once(s, topo, s.seed + static_cast<std::uint64_t>(k), trace);
        } catch (...) {
            errors[k] = std::current_exception();
        }
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    return finish(s, std::move(runs), true);
}

RunSetResult run_set_serial(const Scenario& s, bool trace)
{
    const Topology topo = build_topology(s);
    std::vector<RunResult> runs;
    for (std::size_t k = 0; k < s.runs; ++k) {
        runs.push_back(run_once(s, topo, s.seed + k, trace));
    }
    return finish(s, std::move(runs), false);
}

std::vector<SummaryRow> summary_table(const Scenario& s, const metrics::MetricsReport& report)
{
    std::vector<SummaryRow> rows;
    auto row = [&](const std::string& label, double bw) {
        const metrics::ScopeReport& r = report.paths.at(label);
        rows.push_back(SummaryRow{label, bw, r.packets_received, r.pdr, r.mean_delay_s, r.energy_j, r.packets_dropped});
    };
    for (const auto& p : s.paths) {
        row(p.label, p.bandwidth_bps);
    }
    auto it = report.paths.find(kAodvLabel);
    if (it != report.paths.end() && it->second.packets_sent > 0) {
        row(kAodvLabel, 0.0);
    }
    return rows;
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows)
{
    out << kSummaryHeader << '\n';
    write_rows(out, rows, "");
}

void write_tree(const fs::path& dir, const Scenario& s, const RunSetResult& result, bool trace)
{
    fs::create_directories(dir);
    {
        auto f = open(dir / "scenario.json");
        f << serialize_scenario(s);
    }
    const auto rows = summary_table(s, result.mean);
    {
        auto f = open(dir / "summary.csv");
        write_summary_csv(f, rows);
    }
    {
        auto f = open(dir / "runs.csv");
        f << "run,seed," << kSummaryHeader << '\n';
        for (std::size_t k = 0; k < result.runs.size(); ++k) {
            const auto& r = result.runs[k];
            write_rows(f, summary_table(s, r.report), std::to_string(k) + "," + std::to_string(r.seed) + ",");
        }
    }
    auto measured = result.mean.flows.find(result.mean.measured_flow);
    if (measured != result.mean.flows.end()) {
        write_series(dir, measured->second);
    }
    for (const auto& r : rows) {
        write_series(dir / "paths" / r.label, result.mean.paths.at(r.label));
    }
    if (result.reservation) {
        auto f = open(dir / "reservation.csv");
        f << "link,reservation_bps\n";
        const Topology topo = build_topology(s);
        for (const auto& [link, bw] : *result.reservation) {
            f << topo.describe(link) << ',' << metrics::format_value(bw) << '\n';
        }
        f << "total," << metrics::format_value(hose::reservation_cost(*result.reservation)) << '\n';
    }
    if (trace) {
        for (std::size_t k = 0; k < result.runs.size(); ++k) {
            const auto& r = result.runs[k];
            const fs::path rd = dir / ("run-" + std::to_string(k));
            fs::create_directories(rd);
            auto t = open(rd / "trace.tsv");
            t << "time_ns\tevent\tnode\tpacket\tdetail\n";
            for (const auto& line : r.trace) {
                t << line << '\n';
            }
            auto f = open(rd / "summary.csv");
            write_summary_csv(f, summary_table(s, r.report));
        }
    }
}

ScenarioOutcome run_scenario(const Scenario& s, const fs::path& out, bool trace)
{
    ScenarioOutcome o;
    o.result = run_set(s, trace);
    o.dir = publish(out / s.name, [&](const fs::path& tmp) { write_tree(tmp, s, o.result, trace); });
    return o;
}

SweepOutcome sweep(const Scenario& s, std::string_view parameter, const std::vector<double>& values,
                   const fs::path& out, bool trace)
{
    if (values.empty()) {
        throw InvalidArgument("sweep needs at least one value");
    }
    std::set<std::string> seen;
    std::vector<Scenario> variants;
    for (double v : values) {
        if (!seen.insert(metrics::format_value(v)).second) {
            throw InvalidArgument("duplicate sweep value " + metrics::format_value(v));
        }
        variants.push_back(apply_sweep(s, parameter, v));
    }
    SweepOutcome o;
    o.values = values;
    for (const auto& v : variants) {
        o.results.push_back(run_set(v, trace));
    }
    const fs::path final_dir = out / (s.name + "_sweep_" + std::string(parameter));
    o.dir = publish(final_dir, [&](const fs::path& tmp) {
        auto f = open(tmp / "summary.csv");
        f << "value," << kSummaryHeader << '\n';
        for (std::size_t i = 0; i < values.size(); ++i) {
            const std::string v = metrics::format_value(values[i]);
            write_tree(tmp / v, variants[i], o.results[i], trace);
            write_rows(f, summary_table(variants[i], o.results[i].mean), v + ",");
        }
    });
    return o;
}

}  // namespace vpnsim

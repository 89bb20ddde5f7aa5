#pragma once

// Run orchestration: repetitions over seeds, aggregation, output trees.
//
// Output tree of one scenario (`<out>/<name>/`):
//   scenario.json            normalized copy of the input
//   summary.csv              one row per path, mean over runs
//   runs.csv                 the same rows for every run
//   <metric>.csv             time series of the measured flow
//   paths/<label>/<metric>.csv
//   reservation.csv          per-link hose reservation (when a hose is given)
//   run-<k>/trace.tsv, run-<k>/summary.csv   with tracing on

#include "vpnsim/metrics.hpp"
#include "vpnsim/scenario.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace vpnsim {

struct RunResult {
    std::uint64_t seed = 0;
    metrics::MetricsReport report;
    std::vector<std::string> trace;
    std::int64_t energy_ledger_pj = 0;
    std::vector<std::string> violations;
};

struct RunSetResult {
    std::vector<RunResult> runs;
    metrics::MetricsReport mean;
    std::optional<hose::Reservation> reservation;

    std::vector<std::string> violations() const;
};

RunResult run_once(const Scenario& s, const Topology& topo, std::uint64_t seed, bool trace);

/// Runs seeds s.seed .. s.seed+runs-1; independent runs execute in parallel
/// when built with OpenMP.
RunSetResult run_set(const Scenario& s, bool trace = false);

/// Serial reference for run_set.
RunSetResult run_set_serial(const Scenario& s, bool trace = false);

struct SummaryRow {
    std::string label;
    double bandwidth_bps = 0;
    double packets_received = 0;
    double pdr = 0;
    double routing_delay_s = 0;
    double energy_j = 0;
    double packet_loss = 0;
};

/// Candidate paths in scenario order, then the AODV scope when it carried
/// data.
std::vector<SummaryRow> summary_table(const Scenario& s, const metrics::MetricsReport& report);

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);

/// Writes the full output tree of `result` into `dir` (created).
void write_tree(const std::filesystem::path& dir, const Scenario& s, const RunSetResult& result, bool trace);

struct ScenarioOutcome {
    std::filesystem::path dir;
    RunSetResult result;
};

/// Runs and writes `<out>/<name>/`. The tree is assembled in a temporary
/// sibling and renamed into place, so a failure leaves no partial output.
ScenarioOutcome run_scenario(const Scenario& s, const std::filesystem::path& out, bool trace = false);

struct SweepOutcome {
    std::filesystem::path dir;
    std::vector<double> values;
    std::vector<RunSetResult> results;
};

/// One output tree per value under `<out>/<name>_sweep_<param>/<value>/`
/// plus `<name>_sweep_<param>/summary.csv` combining every value. Kept
/// beside, not inside, the plain tree so neither overwrites the other.
SweepOutcome sweep(const Scenario& s, std::string_view parameter, const std::vector<double>& values,
                   const std::filesystem::path& out, bool trace = false);

}  // namespace vpnsim

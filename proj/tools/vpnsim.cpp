// vpnsim: run a scenario file and write summary tables and time series.

#include "vpnsim/error.hpp"
#include "vpnsim/runner.hpp"
#include "vpnsim/scenario.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

namespace {

std::vector<double> parse_values(const std::string& list)
{
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= list.size()) {
        const std::size_t comma = list.find(',', pos);
        const std::string item = list.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (item.empty() || used != item.size()) {
            throw vpnsim::InvalidArgument("bad sweep value '" + item + "'");
        }
        out.push_back(v);
        if (comma == std::string::npos) {
            break;
        }
        pos = comma + 1;
    }
    return out;
}

void print_summary(const vpnsim::Scenario& s, const vpnsim::RunSetResult& r)
{
    std::cout << s.name << ": " << r.runs.size() << " runs, seeds " << s.seed << ".."
              << s.seed + r.runs.size() - 1 << "\n";
    vpnsim::write_summary_csv(std::cout, vpnsim::summary_table(s, r.mean));
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Discrete-event simulator for hose-model VPNs over AODV ad-hoc networks"};
    std::string scenario_file;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> runs;
    std::string out = "out";
    std::string sweep_arg;
    bool trace = false;
    bool quiet = false;
    app.add_option("--scenario", scenario_file, "Scenario file (JSON)")->required()->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "Base seed (overrides the scenario)");
    app.add_option("--runs", runs, "Number of runs (overrides the scenario)");
    app.add_option("--out", out, "Output root directory")->capture_default_str();
    app.add_option("--sweep", sweep_arg, "Parameter sweep, e.g. packet_size=256,512,1024");
    app.add_flag("--trace", trace, "Write per-run event traces");
    app.add_flag("--quiet", quiet, "Print nothing on success");
    CLI11_PARSE(app, argc, argv);

    try {
        vpnsim::Scenario s = vpnsim::load_scenario(scenario_file);
        if (seed) {
            s.seed = *seed;
        }
        if (runs) {
            if (*runs == 0) {
                throw vpnsim::InvalidArgument("--runs must be positive");
            }
            s.runs = *runs;
        }

        std::vector<std::string> violations;
        if (!sweep_arg.empty()) {
            const auto eq = sweep_arg.find('=');
            if (eq == std::string::npos) {
                throw vpnsim::InvalidArgument("--sweep expects <param>=<v1,v2,...>");
            }
            const std::string param = sweep_arg.substr(0, eq);
            const auto values = parse_values(sweep_arg.substr(eq + 1));
            auto o = vpnsim::sweep(s, param, values, out, trace);
            for (std::size_t i = 0; i < o.results.size(); ++i) {
                for (auto& v : o.results[i].violations()) {
                    violations.push_back(param + "=" + vpnsim::metrics::format_value(values[i]) + ": " + v);
                }
            }
            if (!quiet) {
                for (std::size_t i = 0; i < o.results.size(); ++i) {
                    std::cout << param << " = " << vpnsim::metrics::format_value(values[i]) << "\n";
                    print_summary(vpnsim::apply_sweep(s, param, values[i]), o.results[i]);
                }
                std::cout << "wrote " << o.dir.string() << "\n";
            }
        } else {
            auto o = vpnsim::run_scenario(s, out, trace);
            violations = o.result.violations();
            if (!quiet) {
                print_summary(s, o.result);
                std::cout << "wrote " << o.dir.string() << "\n";
            }
        }
        for (const auto& v : violations) {
            std::cerr << "invariant violated: " << v << "\n";
        }
        return violations.empty() ? 0 : 3;
    } catch (const vpnsim::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

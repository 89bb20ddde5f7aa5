#pragma once

#include "vpnsim/error.hpp"
#include "vpnsim/event_queue.hpp"
#include "vpnsim/sim_time.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vpnsim::metrics {

/// One point of a scope's time series. Counters are cumulative; the delay
/// is the mean over deliveries inside the window ending at `time`.
struct Sample {
    SimTime time;
    double sent = 0;
    double received = 0;
    double dropped = 0;
    double in_flight = 0;
    double energy_j = 0;
    double pdr = 0;
    double routing_delay_s = 0;
    double bandwidth_bps = 0;
};

struct ScopeReport {
    double packets_sent = 0;
    double packets_received = 0;
    double packets_dropped = 0;
    double pdr = 0;  // percent
    double mean_delay_s = 0;
    double energy_j = 0;
    std::int64_t energy_pj = 0;
    std::vector<Sample> samples;
};

struct MetricsReport {
    ScopeReport overall;  // data packets; energy includes control traffic
    ScopeReport control;
    std::map<std::string, ScopeReport> paths;
    std::map<std::string, ScopeReport> flows;
    std::map<std::string, std::vector<double>> bandwidth_usage;  // per link, bit/s per window
    std::string measured_flow;
};

struct RunSet {
    std::vector<MetricsReport> reports;
    MetricsReport mean;
};

/// Scope keys a packet is accounted under.
struct PacketTag {
    PacketId id = 0;
    bool data = true;
    std::string flow;
    std::string path;
    SimTime created;
};

struct SampleInput {
    SimTime now;
    SimTime window;
    std::map<std::string, double> in_flight_flows;
    std::map<std::string, double> in_flight_paths;
    double in_flight_data = 0;
    double in_flight_control = 0;
    // Links whose utilisation stands for a scope's bandwidth; scopes absent
    // here report their own serialized bits instead.
    std::map<std::string, std::vector<std::string>> path_links;
    std::map<std::string, std::vector<std::string>> flow_links;
};

class MetricsCollector {
public:
    MetricsCollector(const std::vector<std::string>& flows, const std::vector<std::string>& paths,
                     const std::vector<std::string>& links, std::string measured_flow);

    // Live entries point into the scope maps.
    MetricsCollector(const MetricsCollector&) = delete;
    MetricsCollector& operator=(const MetricsCollector&) = delete;
    MetricsCollector(MetricsCollector&&) = default;
    MetricsCollector& operator=(MetricsCollector&&) = default;

    void record_send(const PacketTag& tag);
    void record_receive(PacketId id, SimTime now);
    void record_drop(PacketId id, SimTime now);
    void record_energy(PacketId id, std::int64_t pj);
    void record_transmit(PacketId id, const std::string& link, std::uint64_t bits);

    /// Appends one sample to every scope and returns the names of scopes
    /// whose counters violate sent = received + dropped + in_flight.
    std::vector<std::string> sample(const SampleInput& in);

    MetricsReport finalize() const;

    std::size_t outstanding() const { return outstanding_.size(); }

private:
    struct Counters {
        std::uint64_t sent = 0;
        std::uint64_t received = 0;
        std::uint64_t dropped = 0;
        std::int64_t delay_ns = 0;
        std::int64_t energy_pj = 0;
        std::int64_t window_delay_ns = 0;
        std::uint64_t window_deliveries = 0;
        std::uint64_t window_bits = 0;
        double last_window_delay_s = 0;
        std::vector<Sample> samples;
    };

    struct Live {
        bool data = true;
        Counters* flow = nullptr;
        Counters* path = nullptr;
        SimTime created;
    };

    Live& live(PacketId id, const char* what);
    template <typename F>
    void each_scope(const Live& l, F&& f);
    static ScopeReport report(const Counters& c);

    Counters overall_;
    Counters control_;
    std::map<std::string, Counters> flows_;
    std::map<std::string, Counters> paths_;
    std::map<std::string, std::uint64_t> link_window_bits_;
    std::map<std::string, std::vector<double>> link_usage_;
    std::map<PacketId, Live> outstanding_;
    std::string measured_flow_;
};

/// Element-wise mean of scalar metrics and of time series per sample index.
/// Values are summed in sorted order so the result does not depend on the
/// order of `runs`.
MetricsReport aggregate_runs(std::span<const MetricsReport> runs, std::size_t min_runs = 5);

struct SeriesRow {
    SimTime time;
    double value = 0;
};

inline constexpr std::string_view kSeriesMetrics[] = {"bandwidth", "packets_received", "pdr",
                                                      "energy", "routing_delay", "packet_loss"};

std::vector<SeriesRow> emit_timeseries(const ScopeReport& scope, std::string_view metric);

/// CSV with header `time_s,value`.
void write_timeseries_csv(std::ostream& out, const std::vector<SeriesRow>& rows);

/// Shortest stable decimal rendering used in every CSV output.
std::string format_value(double v);

}  // namespace vpnsim::metrics

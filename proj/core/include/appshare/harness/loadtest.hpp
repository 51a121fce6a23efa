#pragma once

#include "appshare/harness/simulation.hpp"
#include "appshare/harness/stats.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace appshare::harness {

struct LoadRow
{
    std::size_t n_remote_sessions = 0;
    std::size_t n_upstream_sessions = 0;
    std::uint64_t total_bytes_queued = 0;
    double per_session_bytes_mean = 0;
    double rtt_ms_p50 = 0;
    double rtt_ms_p95 = 0;
};

enum class LoadColumn { UpstreamSessions, TotalBytes, PerSessionBytes, RttP50, RttP95 };

/// Throws Error{ConfigError} for unknown names.
LoadColumn parse_load_column(std::string_view name);
double column_value(const LoadRow& row, LoadColumn column);

struct LoadTestOptions
{
    Mode mode = Mode::Brokered;
    std::size_t n_max = 9;
    std::size_t events_per_session = 100;
    Duration quantum = 50ms;
    Duration service = 2ms;
    /// Gap between a client's consecutive inputs, on average.
    Duration input_spacing = 5ms;
    std::uint64_t seed = 1;
};

struct LoadReport
{
    Mode mode = Mode::Brokered;
    std::vector<LoadRow> rows;
    bool complete = true;
    std::string failure;
};

/// Rows for n = 0..n_max. Each new client spawns one app, sends its inputs
/// and stays connected; the row is taken once all of them are answered.
/// A setup failure stops the run and marks the report incomplete.
LoadReport loadtest(const LoadTestOptions& options);

/// Header line, then one line per row. A leading '#' comment line names the
/// proxies in use (and the failure, for an incomplete report).
std::string to_csv(const LoadReport& report);
/// Ignores '#' lines; throws Error{ParseError}.
std::vector<LoadRow> parse_csv(std::string_view text);

/// OLS of a column against n_remote_sessions over rows with n >= from_n.
LinearFit fit_linear(const std::vector<LoadRow>& rows, LoadColumn column, std::size_t from_n = 0);

struct FairnessOptions
{
    std::size_t clients = 4;
    std::size_t rotations = 25;
    Duration quantum = 50ms;
    Duration service = 2ms;
    /// Inputs each client sends per rotation, on average; 0 keeps clients idle.
    double inputs_per_rotation = 1.0;
    std::uint64_t seed = 1;
};

struct FairnessReport
{
    std::vector<std::uint64_t> allocations; ///< per client, in join order
    std::uint64_t slices = 0;
    std::vector<double> rtt_ms;
    double rtt_ms_p50 = 0;
    double rtt_ms_p95 = 0;
};

/// Drives exactly clients × rotations scheduler slices (brokered mode) with
/// inputs arriving at uniformly random times.
FairnessReport fairness_report(const FairnessOptions& options);

struct RttModelRow
{
    std::size_t clients = 0;
    double measured_p50 = 0;
    double expected_p50 = 0;
    bool within = false;
};

/// Measures p50 input→update latency for each client count and compares it
/// with (n-1)·quantum/2 + service, where service is the measured p50 at n=1.
/// `within` uses a tolerance of one quantum.
std::vector<RttModelRow> rtt_model(const std::vector<std::size_t>& client_counts, FairnessOptions base);

} // namespace appshare::harness

#include "appshare/harness/loadtest.hpp"

#include "appshare/error.hpp"
#include "appshare/wire/text.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

namespace appshare::harness {

namespace {

constexpr std::string_view kCsvHeader =
    "n_remote_sessions,n_upstream_sessions,total_bytes_queued,per_session_bytes_mean,rtt_ms_p50,rtt_ms_p95";

std::vector<double> rtt_since(const broker::Broker& b, std::size_t& seen)
{
    const auto all = b.metrics().rtt_samples_ms;
    std::vector<double> out;
    if (all.size() > seen)
        out.assign(all.begin() + static_cast<std::ptrdiff_t>(seen), all.end());
    seen = all.size();
    return out;
}

std::string fmt(double v)
{
    std::ostringstream s;
    s << std::fixed << std::setprecision(3) << v;
    return s.str();
}

} // namespace

LoadColumn parse_load_column(std::string_view name)
{
    if (name == "n_upstream_sessions")
        return LoadColumn::UpstreamSessions;
    if (name == "total_bytes_queued")
        return LoadColumn::TotalBytes;
    if (name == "per_session_bytes_mean")
        return LoadColumn::PerSessionBytes;
    if (name == "rtt_ms_p50")
        return LoadColumn::RttP50;
    if (name == "rtt_ms_p95")
        return LoadColumn::RttP95;
    throw Error(Errc::ConfigError, "unknown column '" + std::string(name) + "'");
}

double column_value(const LoadRow& row, LoadColumn column)
{
    switch (column) {
    case LoadColumn::UpstreamSessions: return static_cast<double>(row.n_upstream_sessions);
    case LoadColumn::TotalBytes: return static_cast<double>(row.total_bytes_queued);
    case LoadColumn::PerSessionBytes: return row.per_session_bytes_mean;
    case LoadColumn::RttP50: return row.rtt_ms_p50;
    case LoadColumn::RttP95: return row.rtt_ms_p95;
    }
    return 0;
}

LoadReport loadtest(const LoadTestOptions& options)
{
    LoadReport report;
    report.mode = options.mode;

    SimConfig cfg;
    cfg.mode = options.mode;
    cfg.quantum = options.quantum;
    cfg.service = options.service;
    Simulation sim(cfg);
    std::mt19937_64 rng(options.seed);
    std::size_t rtt_seen = 0;

    auto snapshot = [&](std::size_t n, const std::vector<double>& rtts) {
        LoadRow row;
        row.n_remote_sessions = n;
        row.n_upstream_sessions = sim.upstream_sessions();
        row.total_bytes_queued = sim.retained_bytes_total();
        row.per_session_bytes_mean = n == 0 ? 0 : static_cast<double>(row.total_bytes_queued) / static_cast<double>(n);
        row.rtt_ms_p50 = percentile(rtts, 50);
        row.rtt_ms_p95 = percentile(rtts, 95);
        report.rows.push_back(row);
    };

    // Control row: nothing remote yet.
    snapshot(0, {});

    const auto settle_limit = options.quantum * static_cast<long>(options.n_max + 2) * 4 + 10s;
    for (std::size_t n = 1; n <= options.n_max; ++n) {
        std::size_t c;
        try {
            c = sim.add_client();
        } catch (const Error& e) {
            report.complete = false;
            report.failure = e.what();
            return report;
        }
        sim.spawn(c, "app" + std::to_string(n));
        if (!sim.run_until([&] { return sim.client(c).focused().has_value() || !sim.client_open(c); }, settle_limit)
            || !sim.client(c).focused()) {
            report.complete = false;
            report.failure = Error(Errc::SessionSetupFailure).what() + std::string(": spawn for client ") + std::to_string(n);
            return report;
        }

        const auto span_ms = std::max<std::int64_t>(
            1, static_cast<std::int64_t>(options.events_per_session) * std::chrono::duration_cast<std::chrono::milliseconds>(options.input_spacing).count());
        std::vector<std::int64_t> at(options.events_per_session);
        std::uniform_int_distribution<std::int64_t> when(0, span_ms - 1);
        for (auto& t : at)
            t = when(rng);
        std::sort(at.begin(), at.end());

        const auto start = sim.now();
        for (std::size_t k = 0; k < at.size(); ++k) {
            sim.advance_to(start + std::chrono::milliseconds(at[k]));
            sim.input(c, wire::InputKind::Key, "s" + std::to_string(n) + "e" + std::to_string(k));
        }
        if (!sim.run_until([&] { return sim.client(c).update_log().size() >= options.events_per_session; }, settle_limit)) {
            report.complete = false;
            report.failure = Error(Errc::SessionSetupFailure).what() + std::string(": inputs of client ") + std::to_string(n)
                             + " unanswered";
            return report;
        }
        snapshot(n, rtt_since(sim.broker(), rtt_seen));
    }
    return report;
}

std::string to_csv(const LoadReport& report)
{
    std::ostringstream out;
    out << "# mode=" << to_string(report.mode)
        << "; upstream sessions counted at the host; bytes are retained protocol state"
           " (broker input queues plus host session and window surfaces) attributed per remote session";
    if (!report.complete)
        out << "; INCOMPLETE: " << report.failure;
    out << '\n' << kCsvHeader << '\n';
    for (const auto& r : report.rows) {
        out << r.n_remote_sessions << ',' << r.n_upstream_sessions << ',' << r.total_bytes_queued << ','
            << fmt(r.per_session_bytes_mean) << ',' << fmt(r.rtt_ms_p50) << ',' << fmt(r.rtt_ms_p95) << '\n';
    }
    return out.str();
}

std::vector<LoadRow> parse_csv(std::string_view text)
{
    std::vector<LoadRow> rows;
    bool header = false;
    std::size_t lineno = 0;
    for (auto line : wire::split(text, "\n")) {
        ++lineno;
        line = wire::trim(line);
        if (line.empty() || line.front() == '#')
            continue;
        if (!header) {
            if (line != kCsvHeader)
                throw Error(Errc::ParseError, "unexpected CSV header");
            header = true;
            continue;
        }
        const auto f = wire::split(line, ",");
        if (f.size() != 6)
            throw Error(Errc::ParseError, "line " + std::to_string(lineno) + ": expected 6 columns");
        try {
            LoadRow r;
            r.n_remote_sessions = std::stoull(std::string(f[0]));
            r.n_upstream_sessions = std::stoull(std::string(f[1]));
            r.total_bytes_queued = std::stoull(std::string(f[2]));
            r.per_session_bytes_mean = std::stod(std::string(f[3]));
            r.rtt_ms_p50 = std::stod(std::string(f[4]));
            r.rtt_ms_p95 = std::stod(std::string(f[5]));
            rows.push_back(r);
        } catch (const std::exception&) {
            throw Error(Errc::ParseError, "line " + std::to_string(lineno) + ": bad number");
        }
    }
    return rows;
}

LinearFit fit_linear(const std::vector<LoadRow>& rows, LoadColumn column, std::size_t from_n)
{
    std::vector<double> xs, ys;
    for (const auto& r : rows) {
        if (r.n_remote_sessions < from_n)
            continue;
        xs.push_back(static_cast<double>(r.n_remote_sessions));
        ys.push_back(column_value(r, column));
    }
    return fit_linear(xs, ys);
}

FairnessReport fairness_report(const FairnessOptions& options)
{
    SimConfig cfg;
    cfg.mode = Mode::Brokered;
    cfg.quantum = options.quantum;
    cfg.service = options.service;
    Simulation sim(cfg);

    const auto n = std::max<std::size_t>(options.clients, 1);
    for (std::size_t c = 0; c < n; ++c) {
        sim.add_client();
        sim.spawn(c, "app" + std::to_string(c));
    }
    sim.run_until(
        [&] {
            for (std::size_t c = 0; c < n; ++c)
                if (!sim.client(c).focused())
                    return false;
            return true;
        },
        10s);

    auto& b = sim.broker();
    std::vector<std::uint64_t> base;
    for (std::size_t c = 0; c < n; ++c)
        base.push_back(b.session(*sim.session_of(c))->allocations);
    const auto base_slice = b.slice_count();
    const auto target = static_cast<std::uint64_t>(n * options.rotations);

    // Inputs at uniform times over the expected run, leaving the last
    // rotation free so late arrivals can still be answered.
    struct Arrival
    {
        std::int64_t at_ms;
        std::size_t client;
    };
    std::vector<Arrival> agenda;
    const auto q_ms = std::chrono::duration_cast<std::chrono::milliseconds>(options.quantum).count();
    const std::int64_t span_ms = std::max<std::int64_t>(1, static_cast<std::int64_t>(target) * q_ms - static_cast<std::int64_t>(n) * q_ms);
    std::mt19937_64 rng(options.seed);
    std::uniform_int_distribution<std::int64_t> when(0, span_ms - 1);
    const auto per_client = static_cast<std::size_t>(std::llround(options.inputs_per_rotation * static_cast<double>(options.rotations)));
    for (std::size_t c = 0; c < n; ++c)
        for (std::size_t k = 0; k < per_client; ++k)
            agenda.push_back({when(rng), c});
    std::stable_sort(agenda.begin(), agenda.end(), [](const auto& a, const auto& b) { return a.at_ms < b.at_ms; });

    std::size_t rtt_seen = b.metrics().rtt_samples_ms.size();
    const auto start = sim.now();
    std::size_t next = 0;
    std::uint64_t counter = 0;
    const auto limit = options.quantum * static_cast<long>(target + n + 2) * 3 + 10s;
    sim.run_until(
        [&] {
            while (next < agenda.size() && start + std::chrono::milliseconds(agenda[next].at_ms) <= sim.now()) {
                sim.input(agenda[next].client, wire::InputKind::Key, "f" + std::to_string(counter++));
                ++next;
            }
            return b.slice_count() - base_slice >= target;
        },
        limit);

    FairnessReport report;
    report.slices = b.slice_count() - base_slice;
    for (std::size_t c = 0; c < n; ++c)
        report.allocations.push_back(b.session(*sim.session_of(c))->allocations - base[c]);
    report.rtt_ms = rtt_since(b, rtt_seen);
    report.rtt_ms_p50 = percentile(report.rtt_ms, 50);
    report.rtt_ms_p95 = percentile(report.rtt_ms, 95);
    return report;
}

std::vector<RttModelRow> rtt_model(const std::vector<std::size_t>& client_counts, FairnessOptions base)
{
    auto measure = [&](std::size_t n) {
        auto o = base;
        o.clients = n;
        o.seed = base.seed + n;
        return fairness_report(o).rtt_ms_p50;
    };

    const double service = measure(1);
    const double q = to_millis(base.quantum);
    std::vector<RttModelRow> rows;
    for (auto n : client_counts) {
        RttModelRow r;
        r.clients = n;
        r.measured_p50 = n == 1 ? service : measure(n);
        r.expected_p50 = static_cast<double>(n - 1) * q / 2 + service;
        r.within = std::abs(r.measured_p50 - r.expected_p50) <= q;
        rows.push_back(r);
    }
    return rows;
}

} // namespace appshare::harness

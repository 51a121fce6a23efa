#include "appshare/harness/loadtest.hpp"
#include "appshare/harness/schedule.hpp"
#include "common.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

using namespace appshare;

namespace {

void write_out(const std::string& path, const std::string& text)
{
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out)
        throw Error(Errc::ConfigError, "cannot write " + path);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Load, fairness and replay measurements over the broker and mock host"};
    app.require_subcommand(1);
    int status = 0;

    harness::LoadTestOptions lt;
    std::string lt_mode = "brokered", lt_out, fit_column = "total_bytes_queued";
    std::int64_t lt_quantum = 50, lt_service = 2;
    auto* load = app.add_subcommand("loadtest", "One CSV row per session count, n = 0..sessions");
    load->add_option("--mode", lt_mode)->capture_default_str();
    load->add_option("--sessions", lt.n_max)->capture_default_str();
    load->add_option("--events", lt.events_per_session, "inputs per session")->capture_default_str();
    load->add_option("--quantum-ms", lt_quantum)->capture_default_str()->check(CLI::PositiveNumber);
    load->add_option("--service-ms", lt_service, "host reply delay")->capture_default_str();
    load->add_option("--seed", lt.seed)->capture_default_str();
    load->add_option("--out", lt_out, "CSV path, stdout if omitted");
    load->add_option("--fit", fit_column, "column to regress on n (printed to stderr)")->capture_default_str();
    load->callback(tools::guarded(status, [&] {
        lt.mode = parse_mode(lt_mode);
        lt.quantum = lt_quantum * 1ms;
        lt.service = lt_service * 1ms;
        const auto column = harness::parse_load_column(fit_column);
        const auto report = harness::loadtest(lt);
        write_out(lt_out, harness::to_csv(report));
        if (!report.complete) {
            std::cerr << "incomplete: " << report.failure << std::endl;
            return 1;
        }
        if (report.rows.size() >= 3) {
            const auto fit = harness::fit_linear(report.rows, column);
            std::cerr << fit_column << ": slope " << fit.slope << " intercept " << fit.intercept << " r^2 " << fit.r_squared
                      << std::endl;
        }
        return 0;
    }));

    harness::FairnessOptions fo;
    std::int64_t fo_quantum = 50, fo_service = 2;
    auto* fair = app.add_subcommand("fairness", "Count slices per client over whole rotations");
    fair->add_option("--clients", fo.clients)->capture_default_str()->check(CLI::PositiveNumber);
    fair->add_option("--rotations", fo.rotations)->capture_default_str()->check(CLI::PositiveNumber);
    fair->add_option("--quantum-ms", fo_quantum)->capture_default_str()->check(CLI::PositiveNumber);
    fair->add_option("--service-ms", fo_service)->capture_default_str();
    fair->add_option("--inputs-per-rotation", fo.inputs_per_rotation)->capture_default_str();
    fair->add_option("--seed", fo.seed)->capture_default_str();
    fair->callback(tools::guarded(status, [&] {
        fo.quantum = fo_quantum * 1ms;
        fo.service = fo_service * 1ms;
        const auto r = harness::fairness_report(fo);
        std::cout << "client,allocations\n";
        for (std::size_t i = 0; i < r.allocations.size(); ++i)
            std::cout << i << "," << r.allocations[i] << "\n";
        std::cout << "# slices " << r.slices << ", rtt p50 " << r.rtt_ms_p50 << " ms, p95 " << r.rtt_ms_p95 << " ms\n";
        for (auto a : r.allocations)
            if (a != fo.rotations)
                return 1;
        return 0;
    }));

    std::vector<std::size_t> counts = {1, 2, 4, 8};
    harness::FairnessOptions rb;
    rb.rotations = 60;
    std::int64_t rb_quantum = 50, rb_service = 2;
    auto* rtt = app.add_subcommand("rtt", "Compare measured p50 latency with (n-1)*quantum/2 + service");
    rtt->add_option("--clients", counts, "client counts")->delimiter(',')->capture_default_str();
    rtt->add_option("--rotations", rb.rotations)->capture_default_str();
    rtt->add_option("--quantum-ms", rb_quantum)->capture_default_str()->check(CLI::PositiveNumber);
    rtt->add_option("--service-ms", rb_service)->capture_default_str();
    rtt->add_option("--seed", rb.seed)->capture_default_str();
    rtt->callback(tools::guarded(status, [&] {
        rb.quantum = rb_quantum * 1ms;
        rb.service = rb_service * 1ms;
        int rc = 0;
        std::cout << "clients,measured_p50_ms,expected_p50_ms,within_quantum\n";
        for (const auto& row : harness::rtt_model(counts, rb)) {
            std::cout << row.clients << "," << row.measured_p50 << "," << row.expected_p50 << "," << (row.within ? 1 : 0)
                      << "\n";
            rc |= row.within ? 0 : 1;
        }
        return rc;
    }));

    std::uint64_t sched_seed = 1;
    harness::ScheduleShape shape;
    std::string sched_mode = "brokered", sched_out;
    auto* sched = app.add_subcommand("schedule", "Write a random multi-client event schedule as JSON");
    sched->add_option("--seed", sched_seed)->capture_default_str();
    sched->add_option("--min-clients", shape.min_clients)->capture_default_str()->check(CLI::PositiveNumber);
    sched->add_option("--max-clients", shape.max_clients)->capture_default_str()->check(CLI::PositiveNumber);
    sched->add_option("--events", shape.events)->capture_default_str();
    sched->add_option("--horizon-ms", shape.horizon_ms)->capture_default_str();
    sched->add_option("--quantum-ms", shape.quantum_ms)->capture_default_str()->check(CLI::PositiveNumber);
    sched->add_option("--mode", sched_mode)->capture_default_str();
    sched->add_option("--out", sched_out);
    sched->callback(tools::guarded(status, [&] {
        if (shape.min_clients > shape.max_clients)
            throw Error(Errc::ConfigError, "--min-clients exceeds --max-clients");
        auto s = harness::random_schedule(sched_seed, shape);
        s.mode = parse_mode(sched_mode);
        write_out(sched_out, harness::schedule_to_json(s));
        return 0;
    }));

    std::string replay_in, transcript_out, logs_dir;
    auto* replay = app.add_subcommand("replay", "Play a schedule through broker and host and check slice ordering");
    replay->add_option("schedule", replay_in)->required()->check(CLI::ExistingFile);
    replay->add_option("--transcript", transcript_out, "write the upstream transcript here");
    replay->add_option("--logs", logs_dir, "write one session log per client into this directory");
    replay->callback(tools::guarded(status, [&] {
        const auto r = harness::replay(harness::load_schedule(replay_in));
        if (!transcript_out.empty())
            write_out(transcript_out, r.transcript);
        if (!logs_dir.empty()) {
            std::filesystem::create_directories(logs_dir);
            for (std::size_t i = 0; i < r.session_logs.size(); ++i)
                write_out((std::filesystem::path(logs_dir) / ("client" + std::to_string(i) + ".log")).string(),
                          r.session_logs[i]);
        }
        std::cout << "bursts " << r.validation.bursts << ", inputs " << r.validation.inputs << ", drained "
                  << (r.drained ? "yes" : "no") << "\n";
        if (!r.validation.ok)
            std::cout << "invalid: " << r.validation.error << "\n";
        return r.validation.ok && r.drained ? 0 : 1;
    }));

    if (int rc = tools::run(app, argc, argv))
        return rc;
    return status;
}

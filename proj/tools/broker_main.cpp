#include "appshare/broker/metrics_json.hpp"
#include "appshare/broker/server.hpp"
#include "common.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

using namespace appshare;

int main(int argc, char** argv)
{
    CLI::App app{"Session broker: many downstream clients over one upstream terminal session"};
    app.require_subcommand(1);
    int status = 0;

    std::string listen = ":5000", upstream, mode = "brokered";
    std::int64_t quantum_ms = 50, stats_period_ms = 1000;
    std::string stats_path;
    auto* serve = app.add_subcommand("serve", "Accept clients and relay them to the terminal host");
    serve->add_option("--listen", listen, "host:port or :port")->capture_default_str();
    serve->add_option("--upstream", upstream, "terminal host as host:port")->required();
    serve->add_option("--mode", mode, "brokered or direct")->capture_default_str();
    serve->add_option("--quantum-ms", quantum_ms, "scheduler time slice")->capture_default_str()->check(CLI::PositiveNumber);
    serve->add_option("--stats", stats_path, "rewrite metrics JSON to this file");
    serve->add_option("--stats-period-ms", stats_period_ms)->capture_default_str()->check(CLI::PositiveNumber);
    serve->callback(tools::guarded(status, [&] {
        tools::block_signals();
        broker::BrokerServerOptions o;
        o.listen = net::parse_endpoint(listen);
        o.upstream = net::parse_endpoint(upstream, "127.0.0.1");
        o.broker.mode = parse_mode(mode);
        o.broker.quantum = quantum_ms * 1ms;
        if (!stats_path.empty())
            o.stats_path = stats_path;
        o.stats_period = stats_period_ms * 1ms;
        broker::BrokerServer server(o);
        std::cout << "broker " << to_string(o.broker.mode) << " listening on port " << server.port() << std::endl;
        tools::wait_for_signal();
        server.stop();
        return 0;
    }));

    std::string stats_file;
    bool raw = false;
    auto* stats = app.add_subcommand("stats", "Print the stats file written by a running broker");
    stats->add_option("file", stats_file)->required()->check(CLI::ExistingFile);
    stats->add_flag("--json", raw, "print the file as is");
    stats->callback(tools::guarded(status, [&] {
        std::ifstream in(stats_file);
        std::stringstream ss;
        ss << in.rdbuf();
        if (raw) {
            std::cout << ss.str();
            return 0;
        }
        const auto s = broker::stats_from_json(ss.str());
        const auto& m = s.metrics;
        std::cout << "mode               " << s.mode << "\n"
                  << "port               " << s.listen_port << "\n"
                  << "sessions           " << m.n_sessions << "\n"
                  << "upstream sessions  " << m.n_upstream_sessions << "\n"
                  << "bytes queued       " << m.total_bytes_queued << "\n"
                  << "allocations        " << m.allocations << "\n"
                  << "dropped updates    " << m.dropped_updates << "\n"
                  << "dropped inputs     " << m.dropped_inputs << "\n"
                  << "rtt samples        " << m.rtt_samples_ms.size() << "\n";
        return 0;
    }));

    if (int rc = tools::run(app, argc, argv))
        return rc;
    return status;
}

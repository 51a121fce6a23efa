#include "appshare/client/launcher.hpp"
#include "appshare/cluster/peer_config.hpp"
#include "appshare/cluster/peer_node.hpp"
#include "common.hpp"

#include <filesystem>
#include <future>
#include <iostream>

using namespace appshare;

namespace {

struct PeerArgs
{
    std::string id;
    std::string config;
    std::string manifest;
    std::string interface_ip = "0.0.0.0";
    std::string source_ip;

    void add_to(CLI::App* cmd)
    {
        cmd->add_option("--id", id, "this peer's IPv4 address")->required();
        cmd->add_option("--config", config, "key=value peer config file")->check(CLI::ExistingFile);
        cmd->add_option("--manifest", manifest, "application manifest")->check(CLI::ExistingFile);
        cmd->add_option("--interface", interface_ip, "interface for the multicast group")->capture_default_str();
        cmd->add_option("--source-ip", source_ip, "send from this local address");
    }

    cluster::PeerConfig peer_config() const
    {
        cluster::PeerConfig cfg;
        if (!config.empty())
            cfg = cluster::load_peer_config(config);
        cfg.peer_id = id;
        cluster::validate(cfg);
        return cfg;
    }

    apppool::AppPool pool() const { return manifest.empty() ? apppool::AppPool{} : apppool::AppPool::load_manifest(manifest); }

    cluster::PeerNodeOptions node_options() const
    {
        cluster::PeerNodeOptions o;
        o.network.interface_ip = interface_ip;
        if (!source_ip.empty())
            o.network.source_ip = source_ip;
        o.active_sessions = [] { return std::size_t{0}; };
        return o;
    }
};

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Cluster member: answer and issue multicast application requests"};
    app.require_subcommand(1);
    int status = 0;

    PeerArgs serve_args;
    auto* serve = app.add_subcommand("serve", "Join the group and answer requests for shared apps");
    serve_args.add_to(serve);
    serve->callback(tools::guarded(status, [&] {
        tools::block_signals();
        cluster::PeerNode node(serve_args.peer_config(), serve_args.pool(), serve_args.node_options());
        std::cout << "peer " << serve_args.id << " joined" << std::endl;
        tools::wait_for_signal();
        node.stop();
        return 0;
    }));

    PeerArgs req_args;
    std::string app_name, master_socket = "127.0.0.1:5299", log_dir;
    std::uint16_t broker_port = 5000;
    bool exit_after = false;
    auto* request = app.add_subcommand("request", "Find a peer offering an app and open it through that peer's broker");
    req_args.add_to(request);
    request->add_option("app", app_name)->required();
    request->add_option("--broker-port", broker_port, "port of the responder's broker")->capture_default_str();
    request->add_option("--master-socket", master_socket, "port 0 picks a free one")->capture_default_str();
    request->add_option("--log-dir", log_dir, "session logs go here");
    request->add_flag("--exit-after-connect", exit_after, "close the session once the app window is up");
    request->callback(tools::guarded(status, [&] {
        tools::block_signals();
        const auto cfg = req_args.peer_config();
        std::promise<cluster::ConnectDirective> got;
        auto directive = got.get_future();
        auto opts = req_args.node_options();
        opts.on_connect = [&got](const cluster::ConnectDirective& d) { got.set_value(d); };
        cluster::PeerNode node(cfg, req_args.pool(), opts);
        node.request(app_name);
        if (directive.wait_for(cfg.request_timeout) != std::future_status::ready) {
            node.stop();
            throw Error(Errc::Timeout, "no peer offered " + app_name);
        }
        const auto d = directive.get();
        node.stop();

        client::LauncherOptions lo;
        lo.broker_port = broker_port;
        lo.master_socket = net::parse_endpoint(master_socket, "127.0.0.1");
        if (!log_dir.empty())
            lo.log_dir = std::filesystem::path(log_dir);
        client::Launcher launcher(lo);
        const auto win = launcher.connect_from_directive(d);
        std::cout << app_name << " on " << d.host_ip << " as " << d.username << ", window " << win << std::endl;
        if (!exit_after)
            tools::wait_for_signal();
        return 0;
    }));

    if (int rc = tools::run(app, argc, argv))
        return rc;
    return status;
}

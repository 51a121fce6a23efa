#include "appshare/client/master.hpp"
#include "appshare/client/slave.hpp"
#include "common.hpp"

#include <iostream>
#include <signal.h>
#include <thread>
#include <unistd.h>

using namespace appshare;

namespace {

int print_reply(const client::SlaveReply& r)
{
    if (r.ok) {
        std::cout << (r.win_id ? std::to_string(*r.win_id) : r.line) << std::endl;
        return 0;
    }
    std::cerr << r.line << std::endl;
    return 1;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Application sharing client (master and slave modes)"};
    app.require_subcommand(1);
    int status = 0;

    std::string master_socket = "127.0.0.1:5299";
    double timeout_s = 10;
    app.add_option("--master-socket", master_socket, "local master socket")->capture_default_str();

    std::string broker = "127.0.0.1:5000", log_path;
    auto* master = app.add_subcommand("master", "Hold the broker session and accept slave commands");
    master->add_option("--broker", broker)->capture_default_str();
    master->add_option("--log", log_path, "append window updates to this file");
    master->callback(tools::guarded(status, [&] {
        tools::block_signals();
        client::MasterOptions o;
        o.broker = net::parse_endpoint(broker, "127.0.0.1");
        o.master_socket = net::parse_endpoint(master_socket, "127.0.0.1");
        if (!log_path.empty())
            o.log_path = log_path;
        client::Master m(o);
        std::cout << "session " << m.session_id() << ", master socket " << m.master_endpoint().host << ":"
                  << m.master_port() << std::endl;
        // A dropped broker connection ends the process like a signal would.
        std::thread watch([&m] {
            m.wait();
            kill(getpid(), SIGTERM);
        });
        tools::wait_for_signal();
        const bool lost = !m.connected();
        m.stop();
        watch.join();
        if (lost)
            std::cerr << "broker connection lost" << std::endl;
        return lost ? 1 : 0;
    }));

    std::string command;
    auto* run = app.add_subcommand("run", "Slave mode: ask the running master to spawn a command");
    run->add_option("command", command)->required();
    run->add_option("--timeout", timeout_s, "seconds")->capture_default_str();
    run->callback(tools::guarded(status, [&] {
        const auto ep = net::parse_endpoint(master_socket, "127.0.0.1");
        const auto timeout = std::chrono::duration_cast<Duration>(std::chrono::duration<double>(timeout_s));
        return print_reply(client::run_slave(ep, command, timeout));
    }));

    WindowId win = 0;
    auto* focus = app.add_subcommand("focus", "Switch the master's focused window");
    focus->add_option("win_id", win)->required();
    focus->callback(tools::guarded(status, [&] {
        return print_reply(client::send_master_line(net::parse_endpoint(master_socket, "127.0.0.1"),
                                                    "!focus " + std::to_string(win)));
    }));

    std::string text;
    auto* input = app.add_subcommand("input", "Send a key input to the focused window");
    input->add_option("text", text)->required();
    input->callback(tools::guarded(status, [&] {
        return print_reply(client::send_master_line(net::parse_endpoint(master_socket, "127.0.0.1"), "!input " + text));
    }));

    if (int rc = tools::run(app, argc, argv))
        return rc;
    return status;
}

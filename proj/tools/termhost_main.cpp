#include "appshare/termhost/server.hpp"
#include "common.hpp"

#include <iostream>

using namespace appshare;

int main(int argc, char** argv)
{
    CLI::App app{"Mock terminal host: echoes inputs back as window updates"};
    app.require_subcommand(1);
    int status = 0;

    std::string listen = ":6000", mode = "brokered";
    auto* serve = app.add_subcommand("serve", "Accept sessions");
    serve->add_option("--listen", listen, "host:port or :port")->capture_default_str();
    serve->add_option("--mode", mode, "brokered (one session) or direct")->capture_default_str();
    serve->callback(tools::guarded(status, [&] {
        tools::block_signals();
        termhost::HostServerOptions o;
        o.listen = net::parse_endpoint(listen);
        o.mode = parse_mode(mode);
        termhost::HostServer server(o);
        std::cout << "termhost " << to_string(o.mode) << " listening on port " << server.port() << std::endl;
        tools::wait_for_signal();
        const auto m = server.metrics();
        server.stop();
        std::cout << "peak sessions " << m.peak_sessions << ", refused " << m.refused << std::endl;
        return 0;
    }));

    if (int rc = tools::run(app, argc, argv))
        return rc;
    return status;
}

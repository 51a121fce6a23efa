#include "appshare/client/launcher.hpp"

#include "appshare/client/slave.hpp"
#include "appshare/error.hpp"

namespace appshare::client {

Master* Launcher::master_for(const std::string& host_ip)
{
    auto it = masters_.find(host_ip);
    return it == masters_.end() ? nullptr : it->second.get();
}

WindowId Launcher::connect_from_directive(const cluster::ConnectDirective& d)
{
    if (auto* master = master_for(d.host_ip)) {
        auto reply = run_slave(master->master_endpoint(), d.full_path, options_.timeout);
        if (!reply.ok || !reply.win_id)
            throw Error(Errc::BrokerUnreachable, reply.line);
        return *reply.win_id;
    }

    MasterOptions mo;
    mo.broker = {d.host_ip, options_.broker_port};
    mo.master_socket = options_.master_socket;
    if (options_.master_socket.port != 0)
        mo.master_socket.port = static_cast<std::uint16_t>(options_.master_socket.port + masters_.size());
    if (options_.log_dir)
        mo.log_path = *options_.log_dir / ("session-" + d.host_ip + ".log");

    auto master = std::make_unique<Master>(std::move(mo));
    auto future = master->spawn(d.full_path);
    if (future.wait_for(options_.timeout) != std::future_status::ready)
        throw Error(Errc::Timeout, "initial spawn of " + d.full_path);
    const auto win = future.get();
    masters_.emplace(d.host_ip, std::move(master));
    return win;
}

} // namespace appshare::client

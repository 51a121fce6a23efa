#pragma once

#include "appshare/client/master.hpp"
#include "appshare/cluster/records.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>

namespace appshare::client {

struct LauncherOptions
{
    std::uint16_t broker_port = 5000;
    /// Port 0 picks an ephemeral master socket per host.
    net::Endpoint master_socket{"127.0.0.1", 5299};
    std::optional<std::filesystem::path> log_dir;
    Duration timeout = 10s;
};

/// Turns ConnectDirectives into broker sessions: the first directive for a
/// host starts a master there, later ones go through that master's socket
/// in slave mode.
class Launcher
{
public:
    explicit Launcher(LauncherOptions options = {}) : options_(std::move(options)) {}

    /// Returns the window id of the spawned application.
    /// Throws Error{BrokerUnreachable | MasterSocketInUse | ...}.
    WindowId connect_from_directive(const cluster::ConnectDirective& d);

    std::size_t master_count() const noexcept { return masters_.size(); }
    Master* master_for(const std::string& host_ip);

private:
    LauncherOptions options_;
    std::map<std::string, std::unique_ptr<Master>> masters_;
};

} // namespace appshare::client

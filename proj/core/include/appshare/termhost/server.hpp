#pragma once

#include "appshare/net/reactor.hpp"
#include "appshare/termhost/host.hpp"

#include <map>
#include <mutex>
#include <thread>

namespace appshare::termhost {

struct HostServerOptions
{
    net::Endpoint listen{"0.0.0.0", 6000};
    Mode mode = Mode::Brokered;
    HostConfig host;
};

/// TCP front end for Host: one connection is one session. In brokered mode a
/// connection arriving while another is live gets an Error{SessionLimit}
/// frame and is closed.
class HostServer
{
public:
    /// Throws Error{BindFailure}.
    explicit HostServer(HostServerOptions options);
    ~HostServer();
    HostServer(const HostServer&) = delete;
    HostServer& operator=(const HostServer&) = delete;

    std::uint16_t port() const noexcept { return port_; }
    HostMetrics metrics();
    /// Spawn commands seen so far, in order.
    std::vector<std::string> spawned_commands();
    void stop();

private:
    template <typename F>
    auto on_loop(F&& fn) -> decltype(fn());
    void on_accept(net::Fd fd);

    HostServerOptions options_;
    net::Reactor reactor_;
    Host host_;
    std::uint16_t port_ = 0;
    std::map<net::Reactor::ConnId, HostSessionId> session_of_;
    std::map<net::Reactor::ConnId, wire::FrameDecoder> decoders_;
    std::vector<std::string> spawned_;
    std::thread thread_;
    bool stopped_ = false;
};

} // namespace appshare::termhost

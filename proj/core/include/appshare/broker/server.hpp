#pragma once

#include "appshare/broker/broker.hpp"
#include "appshare/net/reactor.hpp"
#include "appshare/net/socket.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>

namespace appshare::broker {

struct BrokerServerOptions
{
    net::Endpoint listen{"0.0.0.0", 5000};
    net::Endpoint upstream{"127.0.0.1", 6000};
    BrokerConfig broker;
    std::optional<std::filesystem::path> stats_path;
    Duration stats_period = 1s;
    Duration connect_timeout = 3s;
};

/// Opens a TCP upstream session: connect, Hello, wait for Welcome.
/// Throws Error{UpstreamUnreachable}, including when the host refuses.
struct UpstreamHandshake
{
    net::Fd fd;
    std::uint8_t seamless_channel = wire::kFirstSeamlessChannel;
    std::string leftover;
};
UpstreamHandshake open_upstream(const net::Endpoint& ep, Duration timeout);

/// TCP front end for Broker. The broker state lives on one reactor thread;
/// metrics() is answered on that thread between steps.
class BrokerServer
{
public:
    /// Throws Error{UpstreamUnreachable | BindFailure}.
    explicit BrokerServer(BrokerServerOptions options);
    ~BrokerServer();
    BrokerServer(const BrokerServer&) = delete;
    BrokerServer& operator=(const BrokerServer&) = delete;

    std::uint16_t port() const noexcept { return port_; }
    MetricsSnapshot metrics();
    void stop();

private:
    std::unique_ptr<UpstreamLink> connect_upstream(UpstreamId uid);
    void on_accept(net::Fd fd, std::string peer);
    std::optional<TimePoint> on_tick(TimePoint now);
    void write_stats(const MetricsSnapshot& m) const;

    BrokerServerOptions options_;
    net::Reactor reactor_;
    Broker broker_;
    std::uint16_t port_ = 0;
    std::map<net::Reactor::ConnId, wire::FrameDecoder> decoders_;
    std::map<net::Reactor::ConnId, ConnectionId> client_of_;
    TimePoint next_stats_{};

    std::mutex snapshot_mutex_;
    MetricsSnapshot last_snapshot_;
    std::thread thread_;
    bool stopped_ = false;
};

} // namespace appshare::broker

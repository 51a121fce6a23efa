#pragma once

#include "appshare/cluster/peer_config.hpp"
#include "appshare/net/multicast.hpp"
#include "appshare/wire/datagram.hpp"

#include <atomic>
#include <functional>
#include <memory>
#include <string>
#include <thread>

namespace appshare::cluster {

using DatagramHandler = std::function<void(const std::string& src_ip, wire::ClusterDatagram d)>;

/// A joined multicast group. Owns the receive loop, which also emits a
/// heartbeat every heartbeat_period (the first one immediately on join).
/// Undecodable datagrams are counted and dropped.
class Membership
{
public:
    Membership(const PeerConfig& cfg, const net::MulticastOptions& options, DatagramHandler on_datagram);
    ~Membership();
    Membership(const Membership&) = delete;
    Membership& operator=(const Membership&) = delete;

    /// Thread-safe.
    bool send(const wire::ClusterDatagram& d);

    /// Sends one Leave and stops the receive loop. Idempotent.
    void leave();

    bool joined() const noexcept { return joined_; }
    std::uint64_t malformed() const noexcept { return malformed_; }

private:
    void loop();

    PeerConfig cfg_;
    net::MulticastSocket socket_;
    DatagramHandler on_datagram_;
    std::atomic<bool> joined_{true};
    std::atomic<std::uint64_t> malformed_{0};
    std::thread thread_;
};

/// Throws Error{NotClassD | BindFailure | BadAddress}.
std::unique_ptr<Membership> join_group(const PeerConfig& cfg, const net::MulticastOptions& options,
                                       DatagramHandler on_datagram);
void leave_group(Membership& m);

} // namespace appshare::cluster

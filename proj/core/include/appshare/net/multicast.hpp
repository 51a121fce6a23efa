#pragma once

#include "appshare/net/socket.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace appshare::net {

struct MulticastOptions
{
    /// Interface used for the group subscription and outgoing multicast.
    std::string interface_ip = "0.0.0.0";
    /// When set, datagrams are sent from this local address, so several peers
    /// on one machine (127.0.0.x) appear with distinct sources.
    std::optional<std::string> source_ip;
};

struct ReceivedDatagram
{
    std::string source_ip;
    std::string bytes;
};

class MulticastSocket
{
public:
    /// Throws Error{NotClassD | BindFailure | BadAddress}.
    MulticastSocket(const std::string& group, std::uint16_t port, const MulticastOptions& options);

    bool send(std::string_view bytes);
    std::optional<ReceivedDatagram> receive(Duration timeout);

private:
    Fd recv_;
    Fd send_;
    std::string group_;
    std::uint16_t port_;
};

} // namespace appshare::net

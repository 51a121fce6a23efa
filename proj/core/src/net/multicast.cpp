#include "appshare/net/multicast.hpp"

#include "appshare/cluster/peer_config.hpp"
#include "appshare/error.hpp"

#include <arpa/inet.h>
#include <cerrno>
#include <cstring>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>

namespace appshare::net {

namespace {

in_addr parse_addr(const std::string& text)
{
    in_addr a{};
    if (::inet_pton(AF_INET, text.c_str(), &a) != 1)
        throw Error(Errc::BadAddress, "'" + text + "'");
    return a;
}

} // namespace

MulticastSocket::MulticastSocket(const std::string& group, std::uint16_t port, const MulticastOptions& options)
    : group_(group)
    , port_(port)
{
    if (!cluster::is_class_d(group))
        throw Error(Errc::NotClassD, group);
    const auto group_addr = parse_addr(group);
    const auto iface = parse_addr(options.interface_ip);

    recv_ = Fd(::socket(AF_INET, SOCK_DGRAM | SOCK_CLOEXEC, 0));
    if (!recv_)
        throw Error(Errc::BindFailure, std::strerror(errno));
    int one = 1;
    ::setsockopt(recv_.get(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    ::setsockopt(recv_.get(), SOL_SOCKET, SO_REUSEPORT, &one, sizeof one);

    sockaddr_in sa{};
    sa.sin_family = AF_INET;
    sa.sin_port = htons(port);
    sa.sin_addr.s_addr = htonl(INADDR_ANY);
    if (::bind(recv_.get(), reinterpret_cast<const sockaddr*>(&sa), sizeof sa) != 0)
        throw Error(Errc::BindFailure, "udp port " + std::to_string(port) + ": " + std::strerror(errno));

    ip_mreq mreq{};
    mreq.imr_multiaddr = group_addr;
    mreq.imr_interface = iface;
    if (::setsockopt(recv_.get(), IPPROTO_IP, IP_ADD_MEMBERSHIP, &mreq, sizeof mreq) != 0)
        throw Error(Errc::BindFailure, "join " + group + ": " + std::strerror(errno));

    if (options.source_ip) {
        send_ = Fd(::socket(AF_INET, SOCK_DGRAM | SOCK_CLOEXEC, 0));
        sockaddr_in src{};
        src.sin_family = AF_INET;
        src.sin_addr = parse_addr(*options.source_ip);
        if (::bind(send_.get(), reinterpret_cast<const sockaddr*>(&src), sizeof src) != 0)
            throw Error(Errc::BindFailure, "source " + *options.source_ip + ": " + std::strerror(errno));
    }
    const int out_fd = send_ ? send_.get() : recv_.get();
    ::setsockopt(out_fd, IPPROTO_IP, IP_MULTICAST_IF, &iface, sizeof iface);
    unsigned char loop = 1;
    ::setsockopt(out_fd, IPPROTO_IP, IP_MULTICAST_LOOP, &loop, sizeof loop);
    unsigned char ttl = 1;
    ::setsockopt(out_fd, IPPROTO_IP, IP_MULTICAST_TTL, &ttl, sizeof ttl);
}

bool MulticastSocket::send(std::string_view bytes)
{
    sockaddr_in dst{};
    dst.sin_family = AF_INET;
    dst.sin_port = htons(port_);
    dst.sin_addr = parse_addr(group_);
    const int fd = send_ ? send_.get() : recv_.get();
    return ::sendto(fd, bytes.data(), bytes.size(), 0, reinterpret_cast<const sockaddr*>(&dst), sizeof dst)
           == static_cast<ssize_t>(bytes.size());
}

std::optional<ReceivedDatagram> MulticastSocket::receive(Duration timeout)
{
    pollfd p{recv_.get(), POLLIN, 0};
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(timeout).count();
    if (::poll(&p, 1, static_cast<int>(std::max<long long>(ms, 0))) != 1)
        return std::nullopt;

    char buf[65536];
    sockaddr_in src{};
    socklen_t len = sizeof src;
    const auto n = ::recvfrom(recv_.get(), buf, sizeof buf, 0, reinterpret_cast<sockaddr*>(&src), &len);
    if (n < 0)
        return std::nullopt;
    char host[INET_ADDRSTRLEN] = {};
    ::inet_ntop(AF_INET, &src.sin_addr, host, sizeof host);
    return ReceivedDatagram{host, std::string(buf, static_cast<std::size_t>(n))};
}

} // namespace appshare::net

#include "appshare/net/socket.hpp"

#include "appshare/error.hpp"
#include "appshare/wire/text.hpp"

#include <arpa/inet.h>
#include <cerrno>
#include <cstring>
#include <fcntl.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

namespace appshare::net {

namespace {

sockaddr_in to_sockaddr(const Endpoint& ep)
{
    sockaddr_in sa{};
    sa.sin_family = AF_INET;
    sa.sin_port = htons(ep.port);
    const std::string host = ep.host.empty() || ep.host == "*" ? "0.0.0.0" : (ep.host == "localhost" ? "127.0.0.1" : ep.host);
    if (::inet_pton(AF_INET, host.c_str(), &sa.sin_addr) != 1)
        throw Error(Errc::BadAddress, "'" + ep.host + "' is not an IPv4 address");
    return sa;
}

int remaining_ms(TimePoint deadline)
{
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
    return left < 0 ? 0 : static_cast<int>(left);
}

} // namespace

void Fd::reset() noexcept
{
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
}

Endpoint parse_endpoint(std::string_view text, std::string_view default_host)
{
    Endpoint ep;
    ep.host = std::string(default_host);
    std::string_view port_text = text;
    if (const auto colon = text.rfind(':'); colon != std::string_view::npos) {
        if (colon > 0)
            ep.host = std::string(text.substr(0, colon));
        port_text = text.substr(colon + 1);
    }
    const auto port = wire::parse_uint(port_text);
    if (!port || *port > 65535)
        throw Error(Errc::ConfigError, "bad endpoint '" + std::string(text) + "'");
    ep.port = static_cast<std::uint16_t>(*port);
    return ep;
}

Fd tcp_listen(const Endpoint& ep, int backlog)
{
    const auto sa = to_sockaddr(ep);
    Fd fd(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
    if (!fd)
        throw Error(Errc::BindFailure, std::strerror(errno));
    int one = 1;
    ::setsockopt(fd.get(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(fd.get(), reinterpret_cast<const sockaddr*>(&sa), sizeof sa) != 0)
        throw Error(Errc::BindFailure, ep.to_string() + ": " + std::strerror(errno));
    if (::listen(fd.get(), backlog) != 0)
        throw Error(Errc::BindFailure, ep.to_string() + ": " + std::strerror(errno));
    return fd;
}

std::uint16_t local_port(const Fd& fd)
{
    sockaddr_in sa{};
    socklen_t len = sizeof sa;
    ::getsockname(fd.get(), reinterpret_cast<sockaddr*>(&sa), &len);
    return ntohs(sa.sin_port);
}

Fd tcp_connect(const Endpoint& ep, Duration timeout)
{
    sockaddr_in sa{};
    try {
        sa = to_sockaddr(ep);
    } catch (const Error&) {
        return {};
    }
    Fd fd(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
    if (!fd)
        return {};
    set_nonblocking(fd, true);
    if (::connect(fd.get(), reinterpret_cast<const sockaddr*>(&sa), sizeof sa) != 0) {
        if (errno != EINPROGRESS)
            return {};
        pollfd p{fd.get(), POLLOUT, 0};
        const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(timeout).count();
        if (::poll(&p, 1, static_cast<int>(ms)) != 1)
            return {};
        int err = 0;
        socklen_t len = sizeof err;
        ::getsockopt(fd.get(), SOL_SOCKET, SO_ERROR, &err, &len);
        if (err != 0)
            return {};
    }
    set_nonblocking(fd, false);
    set_nodelay(fd);
    return fd;
}

void set_nonblocking(const Fd& fd, bool on)
{
    const int flags = ::fcntl(fd.get(), F_GETFL, 0);
    ::fcntl(fd.get(), F_SETFL, on ? (flags | O_NONBLOCK) : (flags & ~O_NONBLOCK));
}

void set_nodelay(const Fd& fd)
{
    int one = 1;
    ::setsockopt(fd.get(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

bool write_all(const Fd& fd, std::string_view bytes, Duration timeout)
{
    const auto deadline = Clock::now() + timeout;
    while (!bytes.empty()) {
        pollfd p{fd.get(), POLLOUT, 0};
        if (::poll(&p, 1, remaining_ms(deadline)) != 1)
            return false;
        const auto n = ::send(fd.get(), bytes.data(), bytes.size(), MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR || errno == EAGAIN)
                continue;
            return false;
        }
        bytes.remove_prefix(static_cast<std::size_t>(n));
    }
    return true;
}

ReadResult read_some(const Fd& fd, Duration timeout)
{
    ReadResult out;
    pollfd p{fd.get(), POLLIN, 0};
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(timeout).count();
    if (::poll(&p, 1, static_cast<int>(ms)) != 1)
        return out;
    char buf[4096];
    const auto n = ::recv(fd.get(), buf, sizeof buf, 0);
    if (n <= 0)
        out.closed = true;
    else
        out.bytes.assign(buf, static_cast<std::size_t>(n));
    return out;
}

} // namespace appshare::net

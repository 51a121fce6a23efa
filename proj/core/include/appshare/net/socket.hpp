#pragma once

#include "appshare/types.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>

namespace appshare::net {

/// Owning file descriptor.
class Fd
{
public:
    Fd() = default;
    explicit Fd(int fd) noexcept : fd_(fd) {}
    Fd(Fd&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
    Fd& operator=(Fd&& other) noexcept
    {
        if (this != &other) {
            reset();
            fd_ = std::exchange(other.fd_, -1);
        }
        return *this;
    }
    Fd(const Fd&) = delete;
    Fd& operator=(const Fd&) = delete;
    ~Fd() { reset(); }

    int get() const noexcept { return fd_; }
    int release() noexcept { return std::exchange(fd_, -1); }
    explicit operator bool() const noexcept { return fd_ >= 0; }
    void reset() noexcept;

private:
    int fd_ = -1;
};

struct Endpoint
{
    std::string host = "0.0.0.0";
    std::uint16_t port = 0;

    std::string to_string() const { return host + ":" + std::to_string(port); }
};

/// Accepts "host:port", ":port" (any address) and "port".
/// Throws Error{ConfigError}.
Endpoint parse_endpoint(std::string_view text, std::string_view default_host = "0.0.0.0");

/// Throws Error{BindFailure}.
Fd tcp_listen(const Endpoint& ep, int backlog = 64);
std::uint16_t local_port(const Fd& fd);

/// Blocking connect with timeout; returns an invalid Fd on failure.
Fd tcp_connect(const Endpoint& ep, Duration timeout);

void set_nonblocking(const Fd& fd, bool on);
void set_nodelay(const Fd& fd);

/// Blocking helpers used during handshakes, before a socket joins a reactor.
bool write_all(const Fd& fd, std::string_view bytes, Duration timeout);
/// Reads whatever is available within `timeout`; empty result on timeout,
/// nullopt-like empty + closed flag on EOF.
struct ReadResult
{
    std::string bytes;
    bool closed = false;
};
ReadResult read_some(const Fd& fd, Duration timeout);

} // namespace appshare::net

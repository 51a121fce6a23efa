#include "appshare/net/reactor.hpp"

#include "appshare/error.hpp"

#include <algorithm>
#include <arpa/inet.h>
#include <cerrno>
#include <cstring>
#include <fcntl.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

namespace appshare::net {

namespace {

constexpr std::chrono::milliseconds kMaxWait{200};

} // namespace

Reactor::Reactor()
{
    int fds[2];
    if (::pipe2(fds, O_NONBLOCK | O_CLOEXEC) != 0)
        throw Error(Errc::BindFailure, std::string("pipe: ") + std::strerror(errno));
    wake_read_ = Fd(fds[0]);
    wake_write_ = Fd(fds[1]);
}

Reactor::~Reactor() = default;

void Reactor::listen(Fd listener, AcceptHandler on_accept)
{
    set_nonblocking(listener, true);
    listeners_.push_back({std::move(listener), std::move(on_accept)});
}

Reactor::ConnId Reactor::add(Fd fd, DataHandler on_data, CloseHandler on_close)
{
    set_nonblocking(fd, true);
    const auto id = next_id_++;
    conns_.emplace(id, Conn{std::move(fd), {}, std::move(on_data), std::move(on_close)});
    return id;
}

void Reactor::send(ConnId id, std::string_view bytes)
{
    auto it = conns_.find(id);
    if (it == conns_.end() || it->second.dead || it->second.closing)
        return;
    it->second.out.append(bytes);
    flush(it->second);
}

void Reactor::close(ConnId id)
{
    auto it = conns_.find(id);
    if (it == conns_.end())
        return;
    it->second.closing = true;
    if (it->second.out.empty())
        it->second.dead = true;
}

bool Reactor::is_open(ConnId id) const
{
    auto it = conns_.find(id);
    return it != conns_.end() && !it->second.dead && !it->second.closing;
}

std::size_t Reactor::pending_output(ConnId id) const
{
    auto it = conns_.find(id);
    return it == conns_.end() ? 0 : it->second.out.size();
}

void Reactor::flush(Conn& c)
{
    while (!c.out.empty() && !c.dead) {
        const auto n = ::send(c.fd.get(), c.out.data(), c.out.size(), MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR)
                continue;
            if (errno != EAGAIN && errno != EWOULDBLOCK)
                c.dead = true;
            return;
        }
        c.out.erase(0, static_cast<std::size_t>(n));
    }
    if (c.closing && c.out.empty())
        c.dead = true;
}

void Reactor::read_from(ConnId id)
{
    char buf[16384];
    while (true) {
        auto it = conns_.find(id);
        if (it == conns_.end() || it->second.dead)
            return;
        const auto n = ::recv(it->second.fd.get(), buf, sizeof buf, 0);
        if (n > 0) {
            // Copy the handler: it may close or add connections.
            auto handler = it->second.on_data;
            if (handler)
                handler(id, std::string_view(buf, static_cast<std::size_t>(n)));
            continue;
        }
        if (n < 0 && errno == EINTR)
            continue;
        if (n < 0 && (errno == EAGAIN || errno == EWOULDBLOCK))
            return;
        it->second.dead = true;
        return;
    }
}

void Reactor::accept_from(Listener& l)
{
    while (true) {
        sockaddr_in sa{};
        socklen_t len = sizeof sa;
        const int fd = ::accept4(l.fd.get(), reinterpret_cast<sockaddr*>(&sa), &len, SOCK_CLOEXEC);
        if (fd < 0)
            return;
        char host[INET_ADDRSTRLEN] = {};
        ::inet_ntop(AF_INET, &sa.sin_addr, host, sizeof host);
        Fd owned(fd);
        set_nodelay(owned);
        l.on_accept(std::move(owned), std::string(host) + ":" + std::to_string(ntohs(sa.sin_port)));
    }
}

void Reactor::post(std::function<void()> task)
{
    {
        std::lock_guard lock(posted_mutex_);
        posted_.push_back(std::move(task));
    }
    wake();
}

void Reactor::stop()
{
    stop_ = true;
    wake();
}

void Reactor::wake()
{
    const char b = 1;
    [[maybe_unused]] const auto n = ::write(wake_write_.get(), &b, 1);
}

void Reactor::run_posted()
{
    std::vector<std::function<void()>> tasks;
    {
        std::lock_guard lock(posted_mutex_);
        tasks.swap(posted_);
    }
    for (auto& t : tasks)
        t();
}

void Reactor::reap()
{
    for (auto it = conns_.begin(); it != conns_.end();) {
        if (it->second.dead) {
            auto on_close = std::move(it->second.on_close);
            const auto id = it->first;
            it = conns_.erase(it);
            if (on_close)
                on_close(id);
        } else {
            ++it;
        }
    }
}

void Reactor::run()
{
    std::vector<pollfd> fds;
    std::vector<ConnId> ids;
    std::optional<TimePoint> next_tick;

    while (!stop_) {
        const auto now = Clock::now();
        if (tick_)
            next_tick = tick_(now);
        reap();

        fds.clear();
        ids.clear();
        fds.push_back({wake_read_.get(), POLLIN, 0});
        for (auto& l : listeners_)
            fds.push_back({l.fd.get(), POLLIN, 0});
        for (auto& [id, c] : conns_) {
            short events = POLLIN;
            if (!c.out.empty())
                events |= POLLOUT;
            fds.push_back({c.fd.get(), events, 0});
            ids.push_back(id);
        }

        auto wait = std::chrono::duration_cast<std::chrono::milliseconds>(kMaxWait);
        if (next_tick) {
            const auto until = std::chrono::ceil<std::chrono::milliseconds>(*next_tick - Clock::now());
            wait = std::clamp(until, std::chrono::milliseconds{0}, wait);
        }
        const int ready = ::poll(fds.data(), fds.size(), static_cast<int>(wait.count()));
        if (ready < 0 && errno != EINTR)
            break;

        if (fds[0].revents & POLLIN) {
            char drain[64];
            while (::read(wake_read_.get(), drain, sizeof drain) > 0) {
            }
        }
        run_posted();

        std::size_t k = 1;
        for (auto& l : listeners_) {
            if (fds[k++].revents & POLLIN)
                accept_from(l);
        }
        for (std::size_t i = 0; i < ids.size(); ++i) {
            const auto revents = fds[k + i].revents;
            if (revents == 0)
                continue;
            if (revents & POLLOUT) {
                if (auto it = conns_.find(ids[i]); it != conns_.end())
                    flush(it->second);
            }
            if (revents & (POLLIN | POLLHUP | POLLERR))
                read_from(ids[i]);
        }
        reap();
    }

    for (auto& [id, c] : conns_)
        flush(c);
}

} // namespace appshare::net

#pragma once

#include "appshare/net/socket.hpp"

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace appshare::net {

/// Single-threaded poll() loop over listeners and byte-stream connections.
///
/// Everything except post() and stop() must be called on the loop thread.
/// Close handlers always fire from the loop itself, never from inside
/// send() or close(), so callers may close connections from data handlers.
class Reactor
{
public:
    using ConnId = std::uint64_t;
    using AcceptHandler = std::function<void(Fd, std::string peer)>;
    using DataHandler = std::function<void(ConnId, std::string_view)>;
    using CloseHandler = std::function<void(ConnId)>;
    /// Called every iteration; returns when it next wants to run.
    using TickHandler = std::function<std::optional<TimePoint>(TimePoint now)>;

    Reactor();
    ~Reactor();
    Reactor(const Reactor&) = delete;
    Reactor& operator=(const Reactor&) = delete;

    void listen(Fd listener, AcceptHandler on_accept);
    ConnId add(Fd fd, DataHandler on_data, CloseHandler on_close);
    void send(ConnId id, std::string_view bytes);
    /// Flushes queued output, then closes.
    void close(ConnId id);
    bool is_open(ConnId id) const;
    std::size_t pending_output(ConnId id) const;

    void set_tick(TickHandler tick) { tick_ = std::move(tick); }

    void post(std::function<void()> task);
    void run();
    void stop();

private:
    struct Conn
    {
        Fd fd;
        std::string out;
        DataHandler on_data;
        CloseHandler on_close;
        bool closing = false;
        bool dead = false;
    };

    struct Listener
    {
        Fd fd;
        AcceptHandler on_accept;
    };

    void flush(Conn& c);
    void read_from(ConnId id);
    void accept_from(Listener& l);
    void run_posted();
    void reap();
    void wake();

    Fd wake_read_;
    Fd wake_write_;
    std::vector<Listener> listeners_;
    std::map<ConnId, Conn> conns_;
    ConnId next_id_ = 1;
    TickHandler tick_;

    std::mutex posted_mutex_;
    std::vector<std::function<void()>> posted_;
    std::atomic<bool> stop_{false};
};

} // namespace appshare::net

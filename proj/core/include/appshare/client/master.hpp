#pragma once

#include "appshare/client/protocol.hpp"
#include "appshare/net/reactor.hpp"
#include "appshare/net/socket.hpp"

#include <condition_variable>
#include <deque>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <variant>

namespace appshare::client {

struct MasterOptions
{
    net::Endpoint broker{"127.0.0.1", 5000};
    net::Endpoint master_socket{"127.0.0.1", 5299};
    std::optional<std::filesystem::path> log_path;
    Duration connect_timeout = 5s;
};

/// Master-mode client: owns the broker session and the local master socket.
///
/// Master-socket protocol, one line in and one line out per connection turn:
///   <command>          spawn; answered "ok,<win_id>" or "err,<reason>"
///   !focus <win_id>    answered "ok,<win_id>" or "err,UnknownWindow"
///   !input <text>      key input to the focused window; answered "ok"
class Master
{
public:
    /// Throws Error{MasterSocketInUse | BrokerUnreachable}.
    explicit Master(MasterOptions options);
    ~Master();
    Master(const Master&) = delete;
    Master& operator=(const Master&) = delete;

    SessionId session_id() const noexcept { return session_id_; }
    std::uint8_t seamless_channel() const noexcept { return seamless_; }
    std::uint16_t master_port() const noexcept { return master_port_; }
    net::Endpoint master_endpoint() const { return {options_.master_socket.host, master_port_}; }

    /// Resolves to the new window id; the future holds Error on refusal.
    std::future<WindowId> spawn(std::string command);
    /// Returns false when the window is unknown to this session.
    bool focus(WindowId win_id, std::string flags = "0");
    void send_input(wire::InputKind kind, std::string payload);

    std::map<WindowId, std::string> windows();
    std::optional<WindowId> focused();
    std::vector<std::string> update_log();
    bool log_gapless();
    bool connected();

    /// Blocks until the broker connection ends.
    void wait();
    /// Sends Bye and shuts down.
    void stop();

private:
    using Promise = std::shared_ptr<std::promise<WindowId>>;
    using Waiter = std::variant<net::Reactor::ConnId, Promise>;

    template <typename F>
    auto on_loop(F&& fn) -> decltype(fn());

    void send_frame(const wire::StreamFrame& frame);
    void on_broker_bytes(std::string_view bytes);
    void on_broker_closed();
    void on_slave_line(net::Reactor::ConnId cid, const std::string& line);
    void start_spawn(std::string command, Waiter waiter);
    void resolve_spawn(std::optional<WindowId> win_id, const std::string& reason);
    void answer(net::Reactor::ConnId cid, const std::string& line);

    MasterOptions options_;
    net::Reactor reactor_;
    ClientProtocol protocol_;
    SessionId session_id_ = 0;
    std::uint8_t seamless_ = wire::kFirstSeamlessChannel;
    std::uint16_t master_port_ = 0;
    net::Reactor::ConnId broker_conn_ = 0;
    wire::FrameDecoder decoder_;
    std::deque<Waiter> spawn_waiters_;
    std::map<net::Reactor::ConnId, std::string> slave_buffers_;
    std::ofstream log_;

    std::mutex done_mutex_;
    std::condition_variable done_cv_;
    bool broker_gone_ = false;
    std::thread thread_;
    bool stopped_ = false;
};

} // namespace appshare::client

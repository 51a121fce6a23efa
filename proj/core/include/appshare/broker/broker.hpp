#pragma once

#include "appshare/broker/scheduler.hpp"
#include "appshare/types.hpp"
#include "appshare/wire/frame.hpp"
#include "appshare/wire/messages.hpp"

#include <chrono>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace appshare::broker {

using namespace std::chrono_literals;

using ConnectionId = std::uint64_t;
using UpstreamId = std::uint32_t;

struct InputEvent
{
    wire::InputKind kind = wire::InputKind::Key;
    std::string payload;
    TimePoint enqueued_at{};
};

struct ClientSession
{
    SessionId session_id = 0;
    ConnectionId connection = 0;
    std::string address;
    std::uint8_t seamless_channel = wire::kFirstSeamlessChannel;
    std::optional<WindowId> focused_window;
    std::string focus_flags = "0";
    std::deque<InputEvent> input_queue;
    std::set<WindowId> owned_windows;
    std::uint64_t bytes_queued = 0;
    std::uint64_t allocations = 0;
};

struct MetricsSnapshot
{
    std::size_t n_sessions = 0;
    std::size_t n_upstream_sessions = 0;
    std::uint64_t total_bytes_queued = 0;
    std::vector<std::uint64_t> per_session_bytes; ///< ordered by session id
    std::vector<double> rtt_samples_ms;
    std::optional<SessionId> allocated;
    std::uint64_t allocations = 0;
    std::uint64_t dropped_updates = 0;
    std::uint64_t dropped_inputs = 0;
};

struct BrokerConfig
{
    Mode mode = Mode::Brokered;
    Duration quantum = 50ms;
    std::size_t queue_cap = 10'000;
    std::optional<std::size_t> max_sessions;
    Duration handshake_timeout = 5s;
    /// How long an expired slice may be held open for inputs the upstream
    /// has not yet answered.
    Duration inflight_grace = 50ms;
    std::size_t rtt_sample_cap = 1 << 16;
};

/// Downstream connection as seen by the broker.
class ClientLink
{
public:
    virtual ~ClientLink() = default;
    virtual void send(const wire::StreamFrame& frame) = 0;
    virtual void close() = 0;
};

/// An established upstream terminal session.
class UpstreamLink
{
public:
    virtual ~UpstreamLink() = default;
    virtual void send(const wire::StreamFrame& frame) = 0;
    virtual std::uint8_t seamless_channel() const = 0;
    virtual void close() {}
};

/// Opens an upstream session; throws Error{UpstreamUnreachable}.
using UpstreamConnector = std::function<std::unique_ptr<UpstreamLink>(UpstreamId)>;

/// Hooks for recording what the broker does; used for transcripts.
class BrokerObserver
{
public:
    virtual ~BrokerObserver() = default;
    virtual void on_allocation(SessionId /*session*/, std::uint64_t /*slice*/) {}
    virtual void on_upstream_send(UpstreamId /*upstream*/, const wire::StreamFrame& /*frame*/) {}
};

/// Session manager plus data stream controller.
///
/// In brokered mode all clients share one upstream session. A round-robin
/// scheduler hands out time slices; only the allocated session's inputs go
/// upstream and only it receives display updates. Each slice starts with a
/// Focus frame for that session's focused window, followed by its queued
/// inputs in arrival order. Spawns bypass the scheduler.
///
/// In direct mode every session gets its own upstream and frames pass
/// straight through.
///
/// Not thread-safe; a single coordinator drives every entry point.
class Broker
{
public:
    Broker(BrokerConfig cfg, UpstreamConnector connector);

    const BrokerConfig& config() const noexcept { return cfg_; }

    /// Brokered mode opens the single upstream session here.
    /// Throws Error{UpstreamUnreachable}.
    void start();

    ConnectionId accept(std::unique_ptr<ClientLink> link, std::string address, TimePoint now);
    void on_client_frame(ConnectionId conn, const wire::StreamFrame& frame, TimePoint now);
    void on_client_closed(ConnectionId conn);

    void on_upstream_frame(UpstreamId upstream, const wire::StreamFrame& frame, TimePoint now);
    void on_upstream_closed(UpstreamId upstream);

    /// Forwards a display update to the allocated session (brokered) or the
    /// session owning the upstream (direct). Misses are counted and dropped.
    void route_update(UpstreamId upstream, const wire::StreamFrame& update, TimePoint now);

    /// Rotates the allocation when the slice has expired and forwards the
    /// allocated session's queued inputs. Returns the frames sent upstream.
    std::vector<wire::StreamFrame> scheduler_tick(TimePoint now);

    /// Handshake expiry followed by scheduler_tick().
    std::vector<wire::StreamFrame> tick(TimePoint now);

    /// Earliest time tick() has work to do, if any.
    std::optional<TimePoint> next_wakeup() const;

    MetricsSnapshot metrics() const;

    std::optional<SessionId> allocated() const noexcept { return scheduler_.allocated(); }
    std::uint64_t slice_count() const noexcept { return slice_no_; }
    const ClientSession* session(SessionId id) const;
    std::optional<SessionId> session_for(ConnectionId conn) const;
    std::vector<SessionId> session_ids() const;
    std::size_t upstream_count() const noexcept { return upstreams_.size(); }
    bool upstream_lost() const noexcept { return upstream_lost_; }

    void set_observer(BrokerObserver* observer) noexcept { observer_ = observer; }

private:
    struct Pending
    {
        std::string address;
        TimePoint accepted_at;
    };

    struct Inflight
    {
        SessionId session;
        TimePoint enqueued_at;
    };

    struct Upstream
    {
        std::unique_ptr<UpstreamLink> link;
        std::deque<SessionId> pending_spawns;
        std::deque<Inflight> inflight;
        std::optional<WindowId> host_focus;
    };

    void negotiate(ConnectionId conn, const wire::StreamFrame& first, TimePoint now);
    void handle_client_frame(ClientSession& s, const wire::StreamFrame& frame, TimePoint now);
    void handle_input(ClientSession& s, const wire::StreamFrame& frame, TimePoint now);
    void drain(ClientSession& s, std::vector<wire::StreamFrame>& out);
    void send_focus(Upstream& up, UpstreamId uid, const ClientSession& s, std::vector<wire::StreamFrame>* out);
    void send_upstream(UpstreamId uid, wire::StreamFrame frame, std::vector<wire::StreamFrame>* out);
    void send_client(const ClientSession& s, const wire::StreamFrame& frame);
    void send_error(const ClientSession& s, std::uint8_t channel, Errc code, std::string_view detail);
    void drop_session(SessionId id, std::optional<std::string> bye_reason);
    void record_rtt(Upstream& up, TimePoint now);
    UpstreamId upstream_of(const ClientSession& s) const;
    ClientSession* find_session(SessionId id);
    std::optional<std::uint8_t> free_seamless_channel() const;

    BrokerConfig cfg_;
    UpstreamConnector connector_;
    BrokerObserver* observer_ = nullptr;

    std::map<ConnectionId, std::unique_ptr<ClientLink>> links_;
    std::map<ConnectionId, Pending> pending_;
    std::map<ConnectionId, SessionId> conn_to_session_;
    std::map<SessionId, ClientSession> sessions_;
    std::map<UpstreamId, Upstream> upstreams_;

    RoundRobin scheduler_;
    TimePoint slice_deadline_{};
    std::uint64_t slice_no_ = 0;

    ConnectionId next_conn_ = 1;
    SessionId next_session_ = 1;
    bool upstream_lost_ = false;

    std::deque<double> rtt_ms_;
    std::uint64_t dropped_updates_ = 0;
    std::uint64_t dropped_inputs_ = 0;
};

} // namespace appshare::broker

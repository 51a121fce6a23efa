#pragma once

#include "appshare/broker/broker.hpp"
#include "appshare/client/protocol.hpp"
#include "appshare/harness/transcript.hpp"
#include "appshare/termhost/host.hpp"

#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace appshare::harness {

struct SimConfig
{
    Mode mode = Mode::Brokered;
    Duration quantum = 50ms;
    Duration tick = 1ms;
    /// Host turnaround for every request.
    Duration service = 0ms;
    Duration inflight_grace = 50ms;
    std::size_t queue_cap = 10'000;
    termhost::HostConfig host;
};

/// Broker, terminal host and clients wired together in one process on a
/// virtual clock. Client-to-broker delivery is immediate; host replies
/// arrive `service` later. Fully deterministic.
class Simulation : private broker::BrokerObserver
{
public:
    explicit Simulation(SimConfig cfg);
    ~Simulation() override;
    Simulation(const Simulation&) = delete;
    Simulation& operator=(const Simulation&) = delete;

    /// Connects and negotiates a client; returns its index.
    /// Throws Error{SessionSetupFailure}.
    std::size_t add_client();
    void spawn(std::size_t client, std::string_view command);
    /// Returns false when the client does not know the window.
    bool focus(std::size_t client, WindowId win);
    void input(std::size_t client, wire::InputKind kind, std::string_view payload);
    void close(std::size_t client);

    /// Steps the clock tick by tick up to `t`.
    void advance_to(TimePoint t);
    void advance(Duration d) { advance_to(now_ + d); }
    /// Steps until `done` holds; false if `limit` of virtual time ran out.
    bool run_until(const std::function<bool()>& done, Duration limit);

    TimePoint now() const noexcept { return now_; }
    TimePoint epoch() const noexcept { return epoch_; }

    broker::Broker& broker() noexcept { return *broker_; }
    termhost::Host& host() noexcept { return host_; }
    const SimConfig& config() const noexcept { return cfg_; }

    std::size_t client_count() const noexcept { return clients_.size(); }
    const client::ClientProtocol& client(std::size_t i) const { return clients_.at(i).protocol; }
    bool client_open(std::size_t i) const { return !clients_.at(i).closed; }
    const std::vector<wire::ErrorNotice>& client_errors(std::size_t i) const { return clients_.at(i).errors; }
    std::optional<SessionId> session_of(std::size_t i) const { return clients_.at(i).protocol.session_id(); }

    const Transcript& transcript() const noexcept { return transcript_; }

    /// Retained state attributable to one client: its broker input queue,
    /// the host surfaces of the windows it owns and, in direct mode, its own
    /// host session.
    std::uint64_t retained_bytes_for(std::size_t client) const;
    std::uint64_t retained_bytes_total() const;
    /// Live sessions at the host.
    std::size_t upstream_sessions() const noexcept { return host_.session_count(); }

private:
    class ClientLinkImpl;
    class UpstreamImpl;

    struct SimClient
    {
        client::ClientProtocol protocol;
        broker::ConnectionId conn = 0;
        bool closed = false;
        std::vector<wire::ErrorNotice> errors;
    };

    struct Delivery
    {
        TimePoint due;
        broker::UpstreamId upstream;
        wire::StreamFrame frame;
    };

    void on_allocation(SessionId session, std::uint64_t slice) override;
    void on_upstream_send(broker::UpstreamId upstream, const wire::StreamFrame& frame) override;

    void to_client(std::size_t client, const wire::StreamFrame& frame);
    void to_host(broker::UpstreamId upstream, termhost::HostSessionId hs, const wire::StreamFrame& frame);
    void send_from_client(std::size_t client, const wire::StreamFrame& frame);
    void pump();

    SimConfig cfg_;
    TimePoint epoch_;
    TimePoint now_;
    termhost::Host host_;
    std::unique_ptr<broker::Broker> broker_;
    std::vector<SimClient> clients_;
    std::map<broker::UpstreamId, termhost::HostSessionId> host_session_of_;
    std::deque<Delivery> in_flight_;
    Transcript transcript_;
};

} // namespace appshare::harness

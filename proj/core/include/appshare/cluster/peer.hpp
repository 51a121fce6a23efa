#pragma once

#include "appshare/apppool/app_pool.hpp"
#include "appshare/cluster/peer_config.hpp"
#include "appshare/cluster/records.hpp"
#include "appshare/wire/datagram.hpp"

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace appshare::cluster {

struct Connect
{
    ConnectDirective directive;
};

struct PeerJoined
{
    std::string peer_id;
};

struct PeerLeft
{
    std::string peer_id;
};

using Action = std::variant<Connect, PeerJoined, PeerLeft>;

struct PeerEvent
{
    enum class Kind { QueryTimedOut, PeerExpired };
    Kind kind;
    std::string subject;
};

/// Discovery state of one cluster member: the three dedup sets, the roster
/// and the first-response-wins rule. No I/O; time is always passed in.
/// Not thread-safe: all calls must come from one coordinator.
class Peer
{
public:
    /// Throws like validate(PeerConfig).
    explicit Peer(PeerConfig cfg);

    const PeerConfig& config() const noexcept { return cfg_; }
    const std::string& id() const noexcept { return cfg_.peer_id; }

    /// False if a live request for app_name already exists.
    bool submit_query(std::string_view app_name, TimePoint now);

    /// Expires stale records, then returns one Query per live record whose
    /// rebroadcast period has elapsed (a new record is sent on the first tick).
    std::vector<wire::ClusterDatagram> tick_sender(TimePoint now);

    std::vector<Action> handle_datagram(std::string_view src_ip, const wire::ClusterDatagram& d, TimePoint now);

    /// Answers pending requests for shared apps while the session cap allows,
    /// counting replies emitted in this pass against the cap.
    std::vector<wire::ClusterDatagram> process_pending(const apppool::AppPool& pool, std::size_t active_sessions);

    /// Drops roster entries silent for three heartbeat periods.
    std::vector<Action> expire_roster(TimePoint now);

    wire::ClusterDatagram heartbeat() const { return wire::Heartbeat{cfg_.peer_id}; }
    wire::ClusterDatagram leave() const { return wire::Leave{cfg_.peer_id}; }

    const QuerySet& queries() const noexcept { return queries_; }
    const ReplySet& replies() const noexcept { return replies_; }
    const PendingSet& pending() const noexcept { return pending_; }
    const std::map<std::string, TimePoint>& roster() const noexcept { return roster_; }

    std::vector<PeerEvent> take_events();

private:
    bool is_self(std::string_view src) const noexcept { return src == cfg_.peer_id; }
    bool is_departed(std::string_view src) const;
    void expire(TimePoint now);

    PeerConfig cfg_;
    QuerySet queries_;
    ReplySet replies_;
    PendingSet pending_;
    std::map<std::string, TimePoint> roster_;
    std::set<std::string, std::less<>> departed_;
    std::vector<PeerEvent> events_;
};

} // namespace appshare::cluster

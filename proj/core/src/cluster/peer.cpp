#include "appshare/cluster/peer.hpp"

namespace appshare::cluster {

Peer::Peer(PeerConfig cfg)
    : cfg_(std::move(cfg))
{
    validate(cfg_);
}

bool Peer::submit_query(std::string_view app_name, TimePoint now)
{
    if (app_name.empty())
        return false;
    return queries_.try_emplace(std::string(app_name), QueryRecord{std::string(app_name), now, std::nullopt}).second;
}

void Peer::expire(TimePoint now)
{
    const auto timeout = cfg_.request_timeout;
    for (auto it = queries_.begin(); it != queries_.end();) {
        if (now - it->second.issued_at >= timeout) {
            events_.push_back({PeerEvent::Kind::QueryTimedOut, it->first});
            it = queries_.erase(it);
        } else {
            ++it;
        }
    }
    std::erase_if(pending_, [&](const auto& kv) { return now - kv.second.received_at >= timeout; });
    std::erase_if(replies_, [&](const auto& kv) { return now - kv.second.received_at >= timeout; });
}

std::vector<wire::ClusterDatagram> Peer::tick_sender(TimePoint now)
{
    expire(now);
    std::vector<wire::ClusterDatagram> out;
    for (auto& [name, q] : queries_) {
        if (!q.last_broadcast || now - *q.last_broadcast >= cfg_.query_rebroadcast_period) {
            q.last_broadcast = now;
            out.emplace_back(wire::Query{name});
        }
    }
    return out;
}

bool Peer::is_departed(std::string_view src) const
{
    return departed_.find(src) != departed_.end();
}

std::vector<Action> Peer::handle_datagram(std::string_view src_ip, const wire::ClusterDatagram& d, TimePoint now)
{
    std::vector<Action> actions;

    if (const auto* hb = std::get_if<wire::Heartbeat>(&d)) {
        if (hb->peer_id == cfg_.peer_id)
            return actions;
        if (auto it = departed_.find(hb->peer_id); it != departed_.end())
            departed_.erase(it);
        const auto [it, inserted] = roster_.insert_or_assign(hb->peer_id, now);
        if (inserted)
            actions.emplace_back(PeerJoined{hb->peer_id});
        return actions;
    }

    if (const auto* leave = std::get_if<wire::Leave>(&d)) {
        if (leave->peer_id == cfg_.peer_id)
            return actions;
        departed_.insert(leave->peer_id);
        std::erase_if(pending_, [&](const auto& kv) { return kv.first.first == leave->peer_id; });
        if (roster_.erase(leave->peer_id) > 0)
            actions.emplace_back(PeerLeft{leave->peer_id});
        return actions;
    }

    if (is_self(src_ip) || is_departed(src_ip))
        return actions;

    if (const auto* q = std::get_if<wire::Query>(&d)) {
        pending_.try_emplace(PairKey{std::string(src_ip), q->app_name},
                             PendingRequest{std::string(src_ip), q->app_name, now});
        return actions;
    }

    const auto& r = std::get<wire::Reply>(d);
    if (r.requester_ip != cfg_.peer_id) {
        // Someone else answered this request; nothing left for us to do.
        pending_.erase(PairKey{r.requester_ip, r.app_name});
        return actions;
    }

    const bool stored = replies_
                            .try_emplace(PairKey{std::string(src_ip), r.app_name},
                                         ReplyRecord{std::string(src_ip), r.requester_ip, r.app_name, r.full_path,
                                                     r.username, now})
                            .second;
    if (!stored)
        return actions;

    if (auto it = queries_.find(r.app_name); it != queries_.end()) {
        queries_.erase(it);
        actions.emplace_back(Connect{ConnectDirective{std::string(src_ip), r.app_name, r.full_path, r.username}});
    }
    return actions;
}

std::vector<wire::ClusterDatagram> Peer::process_pending(const apppool::AppPool& pool, std::size_t active_sessions)
{
    std::vector<wire::ClusterDatagram> out;
    for (auto it = pending_.begin(); it != pending_.end();) {
        if (active_sessions + out.size() >= cfg_.max_sessions)
            break;
        const auto* app = pool.find(it->second.app_name);
        if (app == nullptr || !app->shared) {
            ++it;
            continue;
        }
        out.emplace_back(wire::Reply{it->second.requester_ip, app->app_name, app->full_path, app->username});
        it = pending_.erase(it);
    }
    return out;
}

std::vector<Action> Peer::expire_roster(TimePoint now)
{
    std::vector<Action> actions;
    const auto limit = 3 * cfg_.heartbeat_period;
    for (auto it = roster_.begin(); it != roster_.end();) {
        if (now - it->second > limit) {
            events_.push_back({PeerEvent::Kind::PeerExpired, it->first});
            actions.emplace_back(PeerLeft{it->first});
            it = roster_.erase(it);
        } else {
            ++it;
        }
    }
    return actions;
}

std::vector<PeerEvent> Peer::take_events()
{
    return std::exchange(events_, {});
}

} // namespace appshare::cluster

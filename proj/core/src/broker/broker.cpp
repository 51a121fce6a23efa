#include "appshare/broker/broker.hpp"

#include "appshare/error.hpp"

#include <algorithm>

namespace appshare::broker {

using wire::Opcode;
using wire::StreamFrame;

namespace {

constexpr UpstreamId kSharedUpstream = 0;

std::string detail_of(const Error& e)
{
    std::string what = e.what();
    const auto colon = what.find(": ");
    return colon == std::string::npos ? std::string{} : what.substr(colon + 2);
}

} // namespace

Broker::Broker(BrokerConfig cfg, UpstreamConnector connector)
    : cfg_(std::move(cfg))
    , connector_(std::move(connector))
{}

void Broker::start()
{
    if (cfg_.mode != Mode::Brokered || upstreams_.count(kSharedUpstream) != 0)
        return;
    auto link = connector_(kSharedUpstream);
    if (!link)
        throw Error(Errc::UpstreamUnreachable, "connector returned no link");
    upstreams_[kSharedUpstream].link = std::move(link);
}

ConnectionId Broker::accept(std::unique_ptr<ClientLink> link, std::string address, TimePoint now)
{
    const auto id = next_conn_++;
    links_.emplace(id, std::move(link));
    pending_.emplace(id, Pending{std::move(address), now});
    return id;
}

ClientSession* Broker::find_session(SessionId id)
{
    auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : &it->second;
}

const ClientSession* Broker::session(SessionId id) const
{
    auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : &it->second;
}

std::optional<SessionId> Broker::session_for(ConnectionId conn) const
{
    auto it = conn_to_session_.find(conn);
    if (it == conn_to_session_.end())
        return std::nullopt;
    return it->second;
}

std::vector<SessionId> Broker::session_ids() const
{
    std::vector<SessionId> ids;
    for (const auto& [id, s] : sessions_)
        ids.push_back(id);
    return ids;
}

std::optional<std::uint8_t> Broker::free_seamless_channel() const
{
    std::set<std::uint8_t> used;
    for (const auto& [id, s] : sessions_)
        used.insert(s.seamless_channel);
    for (unsigned ch = wire::kFirstSeamlessChannel; ch <= 255; ++ch) {
        if (used.count(static_cast<std::uint8_t>(ch)) == 0)
            return static_cast<std::uint8_t>(ch);
    }
    return std::nullopt;
}

UpstreamId Broker::upstream_of(const ClientSession& s) const
{
    return cfg_.mode == Mode::Brokered ? kSharedUpstream : s.session_id;
}

void Broker::on_client_frame(ConnectionId conn, const StreamFrame& frame, TimePoint now)
{
    if (pending_.count(conn) != 0) {
        negotiate(conn, frame, now);
        return;
    }
    auto it = conn_to_session_.find(conn);
    if (it == conn_to_session_.end())
        return;
    if (auto* s = find_session(it->second))
        handle_client_frame(*s, frame, now);
}

void Broker::negotiate(ConnectionId conn, const StreamFrame& first, TimePoint /*now*/)
{
    auto pending = pending_.extract(conn);
    auto& link = links_.at(conn);

    auto refuse = [&](Errc code, std::string_view detail) {
        link->send(wire::error_frame(wire::kControlChannel, code, detail));
        link->close();
        links_.erase(conn);
    };

    if (first.opcode != Opcode::Hello) {
        refuse(Errc::ProtocolViolation, "expected Hello");
        return;
    }
    if (upstream_lost_) {
        refuse(Errc::UpstreamUnreachable, "upstream session lost");
        return;
    }
    if (cfg_.max_sessions && sessions_.size() >= *cfg_.max_sessions) {
        refuse(Errc::SessionLimit, "broker session cap reached");
        return;
    }
    const auto channel = free_seamless_channel();
    if (!channel) {
        refuse(Errc::SessionLimit, "no seamless channel left");
        return;
    }

    const auto sid = next_session_;
    if (cfg_.mode == Mode::Direct) {
        try {
            auto up = connector_(sid);
            if (!up)
                throw Error(Errc::UpstreamUnreachable, "connector returned no link");
            upstreams_[sid].link = std::move(up);
        } catch (const Error& e) {
            refuse(Errc::UpstreamUnreachable, detail_of(e));
            return;
        }
    }
    ++next_session_;

    ClientSession s;
    s.session_id = sid;
    s.connection = conn;
    s.address = std::move(pending.mapped().address);
    s.seamless_channel = *channel;
    sessions_.emplace(sid, std::move(s));
    conn_to_session_[conn] = sid;
    if (cfg_.mode == Mode::Brokered)
        scheduler_.add(sid);

    link->send({wire::kControlChannel, Opcode::Welcome, wire::welcome_body({sid, *channel})});
}

void Broker::send_client(const ClientSession& s, const StreamFrame& frame)
{
    if (auto it = links_.find(s.connection); it != links_.end())
        it->second->send(frame);
}

void Broker::send_error(const ClientSession& s, std::uint8_t channel, Errc code, std::string_view detail)
{
    send_client(s, wire::error_frame(channel, code, detail));
}

void Broker::send_upstream(UpstreamId uid, StreamFrame frame, std::vector<StreamFrame>* out)
{
    auto it = upstreams_.find(uid);
    if (it == upstreams_.end())
        return;
    if (observer_)
        observer_->on_upstream_send(uid, frame);
    it->second.link->send(frame);
    if (out)
        out->push_back(std::move(frame));
}

void Broker::send_focus(Upstream& up, UpstreamId uid, const ClientSession& s, std::vector<StreamFrame>* out)
{
    up.host_focus = s.focused_window;
    send_upstream(uid,
                  {up.link->seamless_channel(), Opcode::Focus, wire::focus_body(*s.focused_window, s.focus_flags)},
                  out);
}

void Broker::handle_client_frame(ClientSession& s, const StreamFrame& frame, TimePoint now)
{
    switch (frame.opcode) {
    case Opcode::Spawn: {
        if (frame.channel != s.seamless_channel) {
            send_error(s, s.seamless_channel, Errc::ProtocolViolation, "spawn outside the seamless channel");
            return;
        }
        const auto command = wire::parse_spawn(frame.body);
        if (!command) {
            send_error(s, s.seamless_channel, Errc::ProtocolViolation, "malformed spawn");
            return;
        }
        const auto uid = upstream_of(s);
        auto it = upstreams_.find(uid);
        if (it == upstreams_.end()) {
            send_error(s, s.seamless_channel, Errc::UpstreamUnreachable, "no upstream session");
            return;
        }
        it->second.pending_spawns.push_back(s.session_id);
        send_upstream(uid, {it->second.link->seamless_channel(), Opcode::Spawn, wire::spawn_body(*command)}, nullptr);
        return;
    }

    case Opcode::Focus: {
        if (frame.channel != s.seamless_channel) {
            send_error(s, s.seamless_channel, Errc::ProtocolViolation, "focus outside the seamless channel");
            return;
        }
        const auto focus = wire::parse_focus(frame.body);
        if (!focus) {
            send_error(s, s.seamless_channel, Errc::ProtocolViolation, "malformed focus");
            return;
        }
        if (s.owned_windows.count(focus->win_id) == 0) {
            send_error(s, s.seamless_channel, Errc::NotYourWindow, std::to_string(focus->win_id));
            return;
        }
        s.focused_window = focus->win_id;
        s.focus_flags = focus->flags;
        if (cfg_.mode == Mode::Direct) {
            auto& up = upstreams_.at(s.session_id);
            send_focus(up, s.session_id, s, nullptr);
        }
        return;
    }

    case Opcode::Input:
        handle_input(s, frame, now);
        return;

    case Opcode::Bye:
        drop_session(s.session_id, std::nullopt);
        return;

    default:
        send_error(s, wire::kControlChannel, Errc::ProtocolViolation,
                   "unexpected " + std::string(wire::to_string(frame.opcode)));
        return;
    }
}

void Broker::handle_input(ClientSession& s, const StreamFrame& frame, TimePoint now)
{
    if (frame.channel != wire::kGlobalChannel) {
        send_error(s, wire::kGlobalChannel, Errc::ProtocolViolation, "input outside the global channel");
        return;
    }
    auto input = wire::parse_input(frame.body);
    if (!input) {
        send_error(s, wire::kGlobalChannel, Errc::ProtocolViolation, "malformed input");
        return;
    }

    if (cfg_.mode == Mode::Direct) {
        auto& up = upstreams_.at(s.session_id);
        if (s.focused_window && up.host_focus != s.focused_window)
            send_focus(up, s.session_id, s, nullptr);
        up.inflight.push_back({s.session_id, now});
        send_upstream(s.session_id, {wire::kGlobalChannel, Opcode::Input, frame.body}, nullptr);
        return;
    }

    if (s.input_queue.size() >= cfg_.queue_cap) {
        drop_session(s.session_id, std::string(to_string(Errc::QueueOverflow)));
        return;
    }
    s.bytes_queued += input->payload.size();
    s.input_queue.push_back({input->kind, std::move(input->payload), now});
}

void Broker::drain(ClientSession& s, std::vector<StreamFrame>& out)
{
    if (s.input_queue.empty())
        return;

    if (!s.focused_window) {
        // Nothing of ours to type into; forwarding would hit another client's window.
        for (std::size_t i = 0; i < s.input_queue.size(); ++i)
            send_error(s, wire::kGlobalChannel, Errc::NoFocusedWindow, "input dropped");
        dropped_inputs_ += s.input_queue.size();
        s.input_queue.clear();
        s.bytes_queued = 0;
        return;
    }

    auto& up = upstreams_.at(kSharedUpstream);
    if (up.host_focus != s.focused_window)
        send_focus(up, kSharedUpstream, s, &out);

    while (!s.input_queue.empty()) {
        auto e = std::move(s.input_queue.front());
        s.input_queue.pop_front();
        up.inflight.push_back({s.session_id, e.enqueued_at});
        send_upstream(kSharedUpstream, {wire::kGlobalChannel, Opcode::Input, wire::input_body(e.kind, e.payload)}, &out);
    }
    s.bytes_queued = 0;
}

std::vector<StreamFrame> Broker::scheduler_tick(TimePoint now)
{
    std::vector<StreamFrame> out;
    if (cfg_.mode != Mode::Brokered || scheduler_.empty() || upstreams_.count(kSharedUpstream) == 0)
        return out;

    auto& up = upstreams_.at(kSharedUpstream);
    const bool expired = !scheduler_.allocated() || now >= slice_deadline_;
    const bool awaiting = scheduler_.allocated() && !up.inflight.empty() && now < slice_deadline_ + cfg_.inflight_grace;

    if (expired && !awaiting) {
        const auto sid = scheduler_.advance();
        slice_deadline_ = now + cfg_.quantum;
        ++slice_no_;
        auto& s = sessions_.at(sid);
        ++s.allocations;
        if (observer_)
            observer_->on_allocation(sid, slice_no_);
        if (s.focused_window)
            send_focus(up, kSharedUpstream, s, &out);
    }

    if (const auto sid = scheduler_.allocated()) {
        if (auto* s = find_session(*sid))
            drain(*s, out);
    }
    return out;
}

std::vector<StreamFrame> Broker::tick(TimePoint now)
{
    std::vector<ConnectionId> expired;
    for (const auto& [conn, p] : pending_) {
        if (now - p.accepted_at >= cfg_.handshake_timeout)
            expired.push_back(conn);
    }
    for (auto conn : expired) {
        pending_.erase(conn);
        if (auto it = links_.find(conn); it != links_.end()) {
            it->second->send(wire::error_frame(wire::kControlChannel, Errc::HandshakeTimeout, "no Hello"));
            it->second->close();
            links_.erase(it);
        }
    }
    return scheduler_tick(now);
}

std::optional<TimePoint> Broker::next_wakeup() const
{
    std::optional<TimePoint> t;
    auto consider = [&](TimePoint c) {
        if (!t || c < *t)
            t = c;
    };
    for (const auto& [conn, p] : pending_)
        consider(p.accepted_at + cfg_.handshake_timeout);
    if (cfg_.mode == Mode::Brokered && !scheduler_.empty()) {
        auto up = upstreams_.find(kSharedUpstream);
        if (!scheduler_.allocated())
            consider(TimePoint{});
        else if (up != upstreams_.end() && !up->second.inflight.empty())
            consider(slice_deadline_ + cfg_.inflight_grace);
        else
            consider(slice_deadline_);
    }
    return t;
}

void Broker::record_rtt(Upstream& up, TimePoint now)
{
    if (up.inflight.empty())
        return;
    const auto sent = up.inflight.front().enqueued_at;
    up.inflight.pop_front();
    rtt_ms_.push_back(to_millis(now - sent));
    if (rtt_ms_.size() > cfg_.rtt_sample_cap)
        rtt_ms_.pop_front();
}

void Broker::route_update(UpstreamId uid, const StreamFrame& update, TimePoint now)
{
    auto uit = upstreams_.find(uid);
    if (uit != upstreams_.end())
        record_rtt(uit->second, now);

    ClientSession* target = nullptr;
    if (cfg_.mode == Mode::Brokered) {
        if (const auto sid = scheduler_.allocated())
            target = find_session(*sid);
        const auto notice = wire::parse_update(update.body);
        if (target && notice && target->owned_windows.count(notice->win_id) == 0)
            target = nullptr;
    } else {
        target = find_session(uid);
    }

    if (target == nullptr) {
        ++dropped_updates_;
        return;
    }
    send_client(*target, {wire::kGlobalChannel, Opcode::Update, update.body});
}

void Broker::on_upstream_frame(UpstreamId uid, const StreamFrame& frame, TimePoint now)
{
    auto uit = upstreams_.find(uid);
    if (uit == upstreams_.end())
        return;
    auto& up = uit->second;

    switch (frame.opcode) {
    case Opcode::SpawnAck: {
        const auto ack = wire::parse_spawn_ack(frame.body);
        if (up.pending_spawns.empty() || !ack)
            return;
        const auto sid = up.pending_spawns.front();
        up.pending_spawns.pop_front();
        // The host focuses a freshly spawned window.
        up.host_focus = ack->win_id;
        if (auto* s = find_session(sid)) {
            s->owned_windows.insert(ack->win_id);
            if (!s->focused_window)
                s->focused_window = ack->win_id;
            send_client(*s, {s->seamless_channel, Opcode::SpawnAck, frame.body});
        }
        return;
    }

    case Opcode::Update:
        route_update(uid, frame, now);
        return;

    case Opcode::Error: {
        const auto notice = wire::parse_error(frame.body);
        const auto code = notice ? notice->code() : std::nullopt;
        std::optional<SessionId> target;
        if (code == Errc::EmptyCommand) {
            if (!up.pending_spawns.empty()) {
                target = up.pending_spawns.front();
                up.pending_spawns.pop_front();
            }
        } else if (code == Errc::NoFocusedWindow) {
            if (!up.inflight.empty()) {
                target = up.inflight.front().session;
                up.inflight.pop_front();
            }
        } else {
            target = cfg_.mode == Mode::Brokered ? scheduler_.allocated() : std::optional<SessionId>(uid);
        }
        if (code == Errc::UnknownWindow)
            up.host_focus.reset();
        if (target) {
            if (auto* s = find_session(*target)) {
                const auto ch = frame.channel == wire::kGlobalChannel ? wire::kGlobalChannel : s->seamless_channel;
                send_client(*s, {ch, Opcode::Error, frame.body});
            }
        }
        return;
    }

    case Opcode::Bye:
        on_upstream_closed(uid);
        return;

    default:
        return;
    }
}

void Broker::on_upstream_closed(UpstreamId uid)
{
    auto it = upstreams_.find(uid);
    if (it == upstreams_.end())
        return;
    it->second.link->close();
    upstreams_.erase(it);

    if (cfg_.mode == Mode::Brokered) {
        upstream_lost_ = true;
        for (auto sid : session_ids())
            drop_session(sid, std::string("UpstreamLost"));
    } else if (sessions_.count(uid) != 0) {
        drop_session(uid, std::string("UpstreamLost"));
    }
}

void Broker::on_client_closed(ConnectionId conn)
{
    if (pending_.erase(conn) != 0) {
        links_.erase(conn);
        return;
    }
    if (auto it = conn_to_session_.find(conn); it != conn_to_session_.end())
        drop_session(it->second, std::nullopt);
}

void Broker::drop_session(SessionId id, std::optional<std::string> bye_reason)
{
    auto it = sessions_.find(id);
    if (it == sessions_.end())
        return;
    const auto conn = it->second.connection;
    if (auto lit = links_.find(conn); lit != links_.end()) {
        if (bye_reason)
            lit->second->send({wire::kControlChannel, Opcode::Bye, *bye_reason});
        lit->second->close();
        links_.erase(lit);
    }
    conn_to_session_.erase(conn);
    sessions_.erase(it);
    scheduler_.remove(id);

    if (cfg_.mode == Mode::Direct) {
        if (auto uit = upstreams_.find(id); uit != upstreams_.end()) {
            uit->second.link->close();
            upstreams_.erase(uit);
        }
    }
}

MetricsSnapshot Broker::metrics() const
{
    MetricsSnapshot m;
    m.n_sessions = sessions_.size();
    m.n_upstream_sessions = upstreams_.size();
    for (const auto& [id, s] : sessions_) {
        m.per_session_bytes.push_back(s.bytes_queued);
        m.total_bytes_queued += s.bytes_queued;
    }
    m.rtt_samples_ms.assign(rtt_ms_.begin(), rtt_ms_.end());
    m.allocated = scheduler_.allocated();
    m.allocations = slice_no_;
    m.dropped_updates = dropped_updates_;
    m.dropped_inputs = dropped_inputs_;
    return m;
}

} // namespace appshare::broker

#include "appshare/harness/simulation.hpp"

#include "appshare/error.hpp"

namespace appshare::harness {

using wire::Opcode;
using wire::StreamFrame;

class Simulation::ClientLinkImpl final : public broker::ClientLink
{
public:
    ClientLinkImpl(Simulation& sim, std::size_t client)
        : sim_(sim)
        , client_(client)
    {}

    void send(const StreamFrame& frame) override { sim_.to_client(client_, frame); }
    void close() override { sim_.clients_.at(client_).closed = true; }

private:
    Simulation& sim_;
    std::size_t client_;
};

class Simulation::UpstreamImpl final : public broker::UpstreamLink
{
public:
    UpstreamImpl(Simulation& sim, broker::UpstreamId uid, termhost::HostSessionId hs)
        : sim_(sim)
        , uid_(uid)
        , hs_(hs)
    {}

    void send(const StreamFrame& frame) override { sim_.to_host(uid_, hs_, frame); }
    std::uint8_t seamless_channel() const override { return sim_.host_.config().seamless_channel; }
    void close() override
    {
        sim_.host_.close_session(hs_);
        sim_.host_session_of_.erase(uid_);
    }

private:
    Simulation& sim_;
    broker::UpstreamId uid_;
    termhost::HostSessionId hs_;
};

Simulation::Simulation(SimConfig cfg)
    : cfg_(std::move(cfg))
    , epoch_(TimePoint{} + std::chrono::hours(1))
    , now_(epoch_)
    , host_(cfg_.mode, cfg_.host)
{
    broker::BrokerConfig bc;
    bc.mode = cfg_.mode;
    bc.quantum = cfg_.quantum;
    bc.queue_cap = cfg_.queue_cap;
    bc.inflight_grace = cfg_.inflight_grace;
    broker_ = std::make_unique<broker::Broker>(bc, [this](broker::UpstreamId uid) -> std::unique_ptr<broker::UpstreamLink> {
        const auto hs = host_.open_session();
        if (!hs)
            throw Error(Errc::UpstreamUnreachable, "host refused the session");
        host_session_of_[uid] = *hs;
        return std::make_unique<UpstreamImpl>(*this, uid, *hs);
    });
    broker_->set_observer(this);
    broker_->start();
}

Simulation::~Simulation()
{
    broker_->set_observer(nullptr);
}

void Simulation::on_allocation(SessionId session, std::uint64_t slice)
{
    const auto* s = broker_->session(session);
    transcript_.allocation(slice, session, s ? s->focused_window : std::nullopt);
}

void Simulation::on_upstream_send(broker::UpstreamId upstream, const StreamFrame& frame)
{
    transcript_.upstream(upstream, frame);
}

void Simulation::to_client(std::size_t client, const StreamFrame& frame)
{
    auto& c = clients_.at(client);
    const auto before = c.protocol.focused();
    auto event = c.protocol.on_frame(frame);
    if (auto* f = std::get_if<client::Failed>(&event))
        c.errors.push_back(f->error);
    if (auto* closed = std::get_if<client::Closed>(&event); closed)
        c.closed = true;
    const auto after = c.protocol.focused();
    if (after && after != before && c.protocol.session_id())
        transcript_.focus(*c.protocol.session_id(), *after);
}

void Simulation::to_host(broker::UpstreamId upstream, termhost::HostSessionId hs, const StreamFrame& frame)
{
    for (auto& reply : host_.handle(hs, frame))
        in_flight_.push_back({now_ + cfg_.service, upstream, std::move(reply)});
}

std::size_t Simulation::add_client()
{
    const auto idx = clients_.size();
    clients_.emplace_back();
    try {
        clients_[idx].conn = broker_->accept(std::make_unique<ClientLinkImpl>(*this, idx), "10.0.0." + std::to_string(idx + 1), now_);
        broker_->on_client_frame(clients_[idx].conn, client::ClientProtocol::hello(), now_);
    } catch (const Error& e) {
        clients_[idx].closed = true;
        throw Error(Errc::SessionSetupFailure, e.what());
    }
    if (!clients_[idx].protocol.negotiated()) {
        clients_[idx].closed = true;
        const auto& errs = clients_[idx].errors;
        throw Error(Errc::SessionSetupFailure, errs.empty() ? "no Welcome" : errs.back().name);
    }
    pump();
    return idx;
}

void Simulation::send_from_client(std::size_t client, const StreamFrame& frame)
{
    auto& c = clients_.at(client);
    if (c.closed)
        return;
    broker_->on_client_frame(c.conn, frame, now_);
    pump();
}

void Simulation::spawn(std::size_t client, std::string_view command)
{
    send_from_client(client, clients_.at(client).protocol.spawn(command));
}

bool Simulation::focus(std::size_t client, WindowId win)
{
    auto& c = clients_.at(client);
    if (c.closed || c.protocol.windows().count(win) == 0)
        return false;
    const auto before = c.protocol.focused();
    auto frame = c.protocol.focus(win);
    if (c.protocol.focused() != before)
        transcript_.focus(*c.protocol.session_id(), win);
    send_from_client(client, frame);
    return true;
}

void Simulation::input(std::size_t client, wire::InputKind kind, std::string_view payload)
{
    auto& c = clients_.at(client);
    if (c.closed)
        return;
    transcript_.queued(*c.protocol.session_id(), payload);
    send_from_client(client, c.protocol.input(kind, payload));
}

void Simulation::close(std::size_t client)
{
    auto& c = clients_.at(client);
    if (c.closed)
        return;
    broker_->on_client_frame(c.conn, client::ClientProtocol::bye(), now_);
    c.closed = true;
    pump();
}

void Simulation::pump()
{
    for (int guard = 0; guard < 1'000'000; ++guard) {
        bool progressed = false;
        while (!in_flight_.empty() && in_flight_.front().due <= now_) {
            auto d = std::move(in_flight_.front());
            in_flight_.pop_front();
            broker_->on_upstream_frame(d.upstream, d.frame, now_);
            progressed = true;
        }
        if (!broker_->tick(now_).empty())
            progressed = true;
        const bool due_now = !in_flight_.empty() && in_flight_.front().due <= now_;
        if (!progressed && !due_now)
            return;
    }
    throw Error(Errc::ProtocolViolation, "simulation failed to settle");
}

void Simulation::advance_to(TimePoint t)
{
    while (now_ + cfg_.tick <= t) {
        now_ += cfg_.tick;
        pump();
    }
}

bool Simulation::run_until(const std::function<bool()>& done, Duration limit)
{
    const auto end = now_ + limit;
    while (!done()) {
        if (now_ >= end)
            return false;
        now_ += cfg_.tick;
        pump();
    }
    return true;
}

std::uint64_t Simulation::retained_bytes_for(std::size_t client) const
{
    const auto& c = clients_.at(client);
    if (c.closed || !c.protocol.session_id())
        return 0;
    const auto sid = *c.protocol.session_id();
    const auto* s = broker_->session(sid);
    if (!s)
        return 0;
    std::uint64_t total = s->bytes_queued;
    for (auto w : s->owned_windows)
        total += host_.window_retained_bytes(w);
    if (cfg_.mode == Mode::Direct) {
        if (auto it = host_session_of_.find(sid); it != host_session_of_.end())
            total += host_.session_retained_bytes(it->second);
    }
    return total;
}

std::uint64_t Simulation::retained_bytes_total() const
{
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < clients_.size(); ++i)
        total += retained_bytes_for(i);
    return total;
}

} // namespace appshare::harness

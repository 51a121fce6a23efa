#include "appshare/broker/server.hpp"

#include "appshare/broker/metrics_json.hpp"
#include "appshare/error.hpp"

#include <fstream>
#include <future>

namespace appshare::broker {

namespace {

class ReactorLink final : public ClientLink
{
public:
    ReactorLink(net::Reactor& reactor, net::Reactor::ConnId id)
        : reactor_(reactor)
        , id_(id)
    {}

    void send(const wire::StreamFrame& frame) override { reactor_.send(id_, wire::encode_frame(frame)); }
    void close() override { reactor_.close(id_); }

private:
    net::Reactor& reactor_;
    net::Reactor::ConnId id_;
};

class ReactorUpstream final : public UpstreamLink
{
public:
    ReactorUpstream(net::Reactor& reactor, net::Reactor::ConnId id, std::uint8_t channel)
        : reactor_(reactor)
        , id_(id)
        , channel_(channel)
    {}

    void send(const wire::StreamFrame& frame) override { reactor_.send(id_, wire::encode_frame(frame)); }
    std::uint8_t seamless_channel() const override { return channel_; }
    void close() override { reactor_.close(id_); }

private:
    net::Reactor& reactor_;
    net::Reactor::ConnId id_;
    std::uint8_t channel_;
};

} // namespace

UpstreamHandshake open_upstream(const net::Endpoint& ep, Duration timeout)
{
    UpstreamHandshake hs;
    hs.fd = net::tcp_connect(ep, timeout);
    if (!hs.fd)
        throw Error(Errc::UpstreamUnreachable, ep.to_string());
    if (!net::write_all(hs.fd, wire::encode_frame({wire::kControlChannel, wire::Opcode::Hello, {}}), timeout))
        throw Error(Errc::UpstreamUnreachable, ep.to_string() + ": write failed");

    wire::FrameDecoder decoder;
    const auto deadline = Clock::now() + timeout;
    while (Clock::now() < deadline) {
        auto chunk = net::read_some(hs.fd, deadline - Clock::now());
        if (chunk.closed)
            break;
        decoder.feed(chunk.bytes);
        std::optional<wire::StreamFrame> frame;
        try {
            frame = decoder.next();
        } catch (const Error& e) {
            throw Error(Errc::UpstreamUnreachable, e.what());
        }
        if (!frame)
            continue;
        if (frame->opcode == wire::Opcode::Welcome) {
            const auto welcome = wire::parse_welcome(frame->body);
            if (!welcome)
                throw Error(Errc::UpstreamUnreachable, "malformed Welcome");
            hs.seamless_channel = welcome->seamless_channel;
            // Anything the host sent right after the Welcome.
            while (auto more = decoder.next())
                hs.leftover += wire::encode_frame(*more);
            return hs;
        }
        throw Error(Errc::UpstreamUnreachable, ep.to_string() + " refused: " + frame->body);
    }
    throw Error(Errc::UpstreamUnreachable, ep.to_string() + ": no Welcome");
}

BrokerServer::BrokerServer(BrokerServerOptions options)
    : options_(std::move(options))
    , broker_(options_.broker, [this](UpstreamId uid) { return connect_upstream(uid); })
{
    broker_.start();
    auto listener = net::tcp_listen(options_.listen);
    port_ = net::local_port(listener);
    reactor_.listen(std::move(listener), [this](net::Fd fd, std::string peer) { on_accept(std::move(fd), std::move(peer)); });
    reactor_.set_tick([this](TimePoint now) { return on_tick(now); });
    thread_ = std::thread([this] { reactor_.run(); });
}

BrokerServer::~BrokerServer()
{
    stop();
}

void BrokerServer::stop()
{
    if (stopped_)
        return;
    stopped_ = true;
    reactor_.stop();
    if (thread_.joinable())
        thread_.join();
}

std::unique_ptr<UpstreamLink> BrokerServer::connect_upstream(UpstreamId uid)
{
    auto hs = open_upstream(options_.upstream, options_.connect_timeout);
    const auto channel = hs.seamless_channel;
    auto decoder = std::make_shared<wire::FrameDecoder>();
    decoder->feed(hs.leftover);

    const auto id = reactor_.add(
        std::move(hs.fd),
        [this, uid, decoder](net::Reactor::ConnId cid, std::string_view bytes) {
            decoder->feed(bytes);
            try {
                while (auto frame = decoder->next())
                    broker_.on_upstream_frame(uid, *frame, Clock::now());
            } catch (const Error&) {
                reactor_.close(cid);
            }
        },
        [this, uid](net::Reactor::ConnId) { broker_.on_upstream_closed(uid); });
    return std::make_unique<ReactorUpstream>(reactor_, id, channel);
}

void BrokerServer::on_accept(net::Fd fd, std::string peer)
{
    const auto rid = reactor_.add(
        std::move(fd),
        [this](net::Reactor::ConnId cid, std::string_view bytes) {
            auto& decoder = decoders_[cid];
            decoder.feed(bytes);
            const auto conn = client_of_.at(cid);
            try {
                while (auto frame = decoder.next())
                    broker_.on_client_frame(conn, *frame, Clock::now());
            } catch (const Error&) {
                // Oversize or garbage framing: the stream cannot be resynchronized.
                reactor_.close(cid);
            }
        },
        [this](net::Reactor::ConnId cid) {
            decoders_.erase(cid);
            if (auto it = client_of_.find(cid); it != client_of_.end()) {
                broker_.on_client_closed(it->second);
                client_of_.erase(it);
            }
        });
    client_of_[rid] = broker_.accept(std::make_unique<ReactorLink>(reactor_, rid), std::move(peer), Clock::now());
}

std::optional<TimePoint> BrokerServer::on_tick(TimePoint now)
{
    broker_.tick(now);

    if (options_.stats_path && now >= next_stats_) {
        next_stats_ = now + options_.stats_period;
        write_stats(broker_.metrics());
    }

    auto wake = broker_.next_wakeup();
    if (options_.stats_path && (!wake || next_stats_ < *wake))
        wake = next_stats_;
    return wake;
}

void BrokerServer::write_stats(const MetricsSnapshot& m) const
{
    const auto tmp = options_.stats_path->string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        out << stats_to_json({m, std::string(to_string(options_.broker.mode)), port_});
    }
    std::filesystem::rename(tmp, *options_.stats_path);
}

MetricsSnapshot BrokerServer::metrics()
{
    if (stopped_) {
        std::lock_guard lock(snapshot_mutex_);
        return last_snapshot_;
    }
    auto promise = std::make_shared<std::promise<MetricsSnapshot>>();
    auto future = promise->get_future();
    reactor_.post([this, promise] { promise->set_value(broker_.metrics()); });
    if (future.wait_for(std::chrono::seconds(5)) != std::future_status::ready) {
        std::lock_guard lock(snapshot_mutex_);
        return last_snapshot_;
    }
    auto m = future.get();
    std::lock_guard lock(snapshot_mutex_);
    last_snapshot_ = m;
    return m;
}

} // namespace appshare::broker

#include "appshare/cluster/membership.hpp"

#include "appshare/error.hpp"

namespace appshare::cluster {

namespace {

const PeerConfig& checked(const PeerConfig& cfg)
{
    validate(cfg);
    return cfg;
}

} // namespace

Membership::Membership(const PeerConfig& cfg, const net::MulticastOptions& options, DatagramHandler on_datagram)
    : cfg_(checked(cfg))
    , socket_(cfg.multicast_group, cfg.multicast_port, options)
    , on_datagram_(std::move(on_datagram))
{
    send(wire::Heartbeat{cfg_.peer_id});
    thread_ = std::thread([this] { loop(); });
}

Membership::~Membership()
{
    leave();
}

bool Membership::send(const wire::ClusterDatagram& d)
{
    return socket_.send(wire::encode_datagram(d));
}

void Membership::leave()
{
    if (!joined_.exchange(false))
        return;
    send(wire::Leave{cfg_.peer_id});
    if (thread_.joinable())
        thread_.join();
}

void Membership::loop()
{
    constexpr Duration kPoll = std::chrono::milliseconds(50);
    auto next_heartbeat = Clock::now() + cfg_.heartbeat_period;
    while (joined_) {
        const auto now = Clock::now();
        if (now >= next_heartbeat) {
            send(wire::Heartbeat{cfg_.peer_id});
            next_heartbeat = now + cfg_.heartbeat_period;
        }
        auto received = socket_.receive(std::min<Duration>(kPoll, next_heartbeat - now));
        if (!received || !joined_)
            continue;
        try {
            auto d = wire::decode_datagram(received->bytes);
            if (on_datagram_)
                on_datagram_(received->source_ip, std::move(d));
        } catch (const Error&) {
            ++malformed_;
        }
    }
}

std::unique_ptr<Membership> join_group(const PeerConfig& cfg, const net::MulticastOptions& options,
                                       DatagramHandler on_datagram)
{
    return std::make_unique<Membership>(cfg, options, std::move(on_datagram));
}

void leave_group(Membership& m)
{
    m.leave();
}

} // namespace appshare::cluster

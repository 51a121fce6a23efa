#include "appshare/broker/broker.hpp"
#include "appshare/broker/metrics_json.hpp"
#include "appshare/broker/scheduler.hpp"
#include "appshare/error.hpp"
#include "gen.hpp"

#include <gtest/gtest.h>

#include <map>

using namespace appshare;
using namespace appshare::broker;
using wire::Opcode;
using wire::StreamFrame;

namespace {

const TimePoint t0 = TimePoint{} + std::chrono::hours(1);

struct Wire
{
    std::vector<StreamFrame> frames;
    bool closed = false;

    std::vector<StreamFrame> take() { return std::exchange(frames, {}); }
};

class FakeClient final : public ClientLink
{
public:
    explicit FakeClient(Wire& w) : w_(w) {}
    void send(const StreamFrame& f) override { w_.frames.push_back(f); }
    void close() override { w_.closed = true; }

private:
    Wire& w_;
};

class FakeUpstream final : public UpstreamLink
{
public:
    explicit FakeUpstream(Wire& w) : w_(w) {}
    void send(const StreamFrame& f) override { w_.frames.push_back(f); }
    std::uint8_t seamless_channel() const override { return 2; }
    void close() override { w_.closed = true; }

private:
    Wire& w_;
};

struct Fixture
{
    explicit Fixture(BrokerConfig cfg = {})
        : broker(cfg, [this](UpstreamId uid) {
            if (refuse_upstream)
                throw Error(Errc::UpstreamUnreachable, "test");
            return std::make_unique<FakeUpstream>(upstream[uid]);
        })
    {
        broker.start();
    }

    ConnectionId connect(std::size_t i, bool hello = true)
    {
        const auto conn = broker.accept(std::make_unique<FakeClient>(clients[i]), "10.0.0." + std::to_string(i), now);
        if (hello)
            broker.on_client_frame(conn, {wire::kControlChannel, Opcode::Hello, {}}, now);
        conns[i] = conn;
        return conn;
    }

    SessionId sid(std::size_t i) { return *broker.session_for(conns.at(i)); }

    void send(std::size_t i, StreamFrame f) { broker.on_client_frame(conns.at(i), f, now); }
    void input(std::size_t i, std::string payload)
    {
        send(i, {wire::kGlobalChannel, Opcode::Input, wire::input_body(wire::InputKind::Key, payload)});
    }
    void ack(UpstreamId uid, WindowId win, std::string cmd = "app")
    {
        broker.on_upstream_frame(uid, {2, Opcode::SpawnAck, wire::spawn_ack_body({win, cmd})}, now);
    }
    void spawn_and_ack(std::size_t i, WindowId win, UpstreamId uid = 0)
    {
        send(i, {broker.session(sid(i))->seamless_channel, Opcode::Spawn, wire::spawn_body("app")});
        ack(uid, win);
    }

    bool refuse_upstream = false;
    std::map<UpstreamId, Wire> upstream;
    std::map<std::size_t, Wire> clients;
    std::map<std::size_t, ConnectionId> conns;
    TimePoint now = t0;
    Broker broker;
};

std::vector<std::string> input_payloads(const std::vector<StreamFrame>& frames)
{
    std::vector<std::string> out;
    for (const auto& f : frames)
        if (f.opcode == Opcode::Input)
            out.push_back(wire::parse_input(f.body)->payload);
    return out;
}

} // namespace

TEST(RoundRobin, CyclesInJoinOrder)
{
    RoundRobin rr;
    rr.add(1);
    rr.add(2);
    rr.add(3);
    EXPECT_EQ(rr.advance(), 1u);
    EXPECT_EQ(rr.advance(), 2u);
    EXPECT_EQ(rr.advance(), 3u);
    EXPECT_EQ(rr.advance(), 1u);
}

TEST(RoundRobin, RemoveKeepsRotation)
{
    RoundRobin rr;
    for (SessionId i = 1; i <= 4; ++i)
        rr.add(i);
    rr.advance();
    rr.advance();
    rr.remove(2);
    EXPECT_EQ(rr.advance(), 3u);
    rr.remove(4);
    EXPECT_EQ(rr.advance(), 1u);
    EXPECT_EQ(rr.advance(), 3u);
}

TEST(RoundRobin, ExactCountsUnderChurnFreeRotations)
{
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        appshare::testing::Gen g(seed);
        const auto n = 1 + g.below(10);
        const auto rotations = 1 + g.below(50);
        RoundRobin rr;
        for (SessionId i = 1; i <= n; ++i)
            rr.add(i);
        for (std::size_t k = 0; k < g.below(7); ++k)
            rr.advance();
        std::map<SessionId, std::size_t> count;
        for (std::size_t k = 0; k < n * rotations; ++k)
            ++count[rr.advance()];
        for (SessionId i = 1; i <= n; ++i)
            ASSERT_EQ(count[i], rotations);
    }
}

TEST(Broker, NegotiationAssignsSessionAndChannel)
{
    Fixture fx;
    fx.connect(0);
    fx.connect(1);
    const auto w0 = wire::parse_welcome(fx.clients[0].frames.at(0).body);
    const auto w1 = wire::parse_welcome(fx.clients[1].frames.at(0).body);
    ASSERT_TRUE(w0 && w1);
    EXPECT_NE(w0->session_id, w1->session_id);
    EXPECT_GE(w0->seamless_channel, wire::kFirstSeamlessChannel);
    EXPECT_NE(w0->seamless_channel, w1->seamless_channel);
    EXPECT_EQ(fx.broker.metrics().n_upstream_sessions, 1u);
}

TEST(Broker, NonHelloFirstFrameIsViolation)
{
    Fixture fx;
    const auto conn = fx.connect(0, false);
    fx.broker.on_client_frame(conn, {0, Opcode::Input, "Kx"}, fx.now);
    ASSERT_FALSE(fx.clients[0].frames.empty());
    EXPECT_EQ(wire::parse_error(fx.clients[0].frames.back().body)->code(), Errc::ProtocolViolation);
    EXPECT_TRUE(fx.clients[0].closed);
}

TEST(Broker, HandshakeTimeout)
{
    Fixture fx;
    fx.connect(0, false);
    fx.broker.tick(fx.now + 5s);
    EXPECT_TRUE(fx.clients[0].closed);
    EXPECT_EQ(wire::parse_error(fx.clients[0].frames.back().body)->code(), Errc::HandshakeTimeout);
}

TEST(Broker, SessionLimit)
{
    BrokerConfig cfg;
    cfg.max_sessions = 1;
    Fixture fx(cfg);
    fx.connect(0);
    fx.connect(1);
    EXPECT_EQ(wire::parse_error(fx.clients[1].frames.back().body)->code(), Errc::SessionLimit);
    EXPECT_EQ(fx.broker.metrics().n_sessions, 1u);
}

TEST(Broker, SpawnBypassesSchedulerAndRoutesAck)
{
    Fixture fx;
    fx.connect(0);
    fx.connect(1);
    fx.broker.tick(fx.now);
    fx.upstream[0].take();
    // Session 1 is not allocated, its spawn still goes straight up.
    fx.send(1, {fx.broker.session(fx.sid(1))->seamless_channel, Opcode::Spawn, wire::spawn_body("mspaint")});
    auto up = fx.upstream[0].take();
    ASSERT_EQ(up.size(), 1u);
    EXPECT_EQ(up[0].body, "spawn,mspaint");
    EXPECT_EQ(up[0].channel, 2);

    fx.ack(0, 42, "mspaint");
    const auto* s1 = fx.broker.session(fx.sid(1));
    EXPECT_EQ(s1->focused_window, 42u);
    EXPECT_TRUE(s1->owned_windows.count(42));
    EXPECT_EQ(fx.clients[1].frames.back().opcode, Opcode::SpawnAck);
}

TEST(Broker, FocusOwnership)
{
    Fixture fx;
    fx.connect(0);
    fx.connect(1);
    fx.spawn_and_ack(0, 7);
    fx.send(1, {fx.broker.session(fx.sid(1))->seamless_channel, Opcode::Focus, wire::focus_body(7)});
    EXPECT_EQ(wire::parse_error(fx.clients[1].frames.back().body)->code(), Errc::NotYourWindow);
    EXPECT_FALSE(fx.broker.session(fx.sid(1))->focused_window);
}

TEST(Broker, SliceStartsWithFocusThenFifoInputs)
{
    Fixture fx;
    fx.connect(0);
    fx.connect(1);
    fx.spawn_and_ack(0, 1);
    fx.spawn_and_ack(1, 2);
    fx.broker.tick(fx.now); // allocates session 0's slice
    fx.upstream[0].take();

    fx.input(1, "b1");
    fx.input(1, "b2");
    EXPECT_TRUE(fx.broker.tick(fx.now + 10ms).empty());

    // Slice of session 0 expires; nothing in flight so it rotates.
    const auto sent = fx.broker.tick(fx.now + 50ms);
    ASSERT_EQ(sent.size(), 3u);
    EXPECT_EQ(sent[0].opcode, Opcode::Focus);
    EXPECT_EQ(wire::parse_focus(sent[0].body)->win_id, 2u);
    EXPECT_EQ(input_payloads(sent), (std::vector<std::string>{"b1", "b2"}));
}

TEST(Broker, UpdatesOnlyReachAllocatedOwner)
{
    Fixture fx;
    fx.connect(0);
    fx.connect(1);
    fx.spawn_and_ack(0, 1);
    fx.spawn_and_ack(1, 2);
    fx.broker.tick(fx.now);
    fx.clients[0].take();
    fx.clients[1].take();

    const StreamFrame u1{0, Opcode::Update, wire::update_body({1, 1, "61"})};
    const StreamFrame u2{0, Opcode::Update, wire::update_body({2, 1, "61"})};
    fx.broker.on_upstream_frame(0, u1, fx.now);
    fx.broker.on_upstream_frame(0, u2, fx.now);
    EXPECT_EQ(fx.clients[0].take().size(), 1u);
    EXPECT_TRUE(fx.clients[1].take().empty());
    EXPECT_EQ(fx.broker.metrics().dropped_updates, 1u);
}

TEST(Broker, InputWithoutFocusIsDropped)
{
    Fixture fx;
    fx.connect(0);
    fx.broker.tick(fx.now);
    fx.upstream[0].take();
    fx.input(0, "x");
    fx.broker.tick(fx.now);
    EXPECT_TRUE(input_payloads(fx.upstream[0].take()).empty());
    EXPECT_EQ(wire::parse_error(fx.clients[0].frames.back().body)->code(), Errc::NoFocusedWindow);
    EXPECT_EQ(fx.broker.metrics().dropped_inputs, 1u);
}

TEST(Broker, QueueOverflowDropsSession)
{
    BrokerConfig cfg;
    cfg.queue_cap = 3;
    Fixture fx(cfg);
    fx.connect(0);
    fx.connect(1);
    fx.spawn_and_ack(1, 5);
    fx.broker.tick(fx.now); // session 0 allocated, session 1 waits
    for (int i = 0; i < 4; ++i)
        fx.input(1, "k" + std::to_string(i));
    EXPECT_TRUE(fx.clients[1].closed);
    EXPECT_EQ(fx.clients[1].frames.back().opcode, Opcode::Bye);
    EXPECT_EQ(fx.broker.metrics().n_sessions, 1u);
}

TEST(Broker, RotationWaitsForInflightWithinGrace)
{
    Fixture fx;
    fx.connect(0);
    fx.connect(1);
    fx.spawn_and_ack(0, 1);
    fx.spawn_and_ack(1, 2);
    fx.broker.tick(fx.now);
    fx.input(0, "a");
    fx.broker.tick(fx.now);
    EXPECT_EQ(fx.broker.allocated(), fx.sid(0));

    fx.broker.tick(fx.now + 60ms);
    EXPECT_EQ(fx.broker.allocated(), fx.sid(0));
    fx.broker.on_upstream_frame(0, {0, Opcode::Update, wire::update_body({1, 1, "61"})}, fx.now + 61ms);
    fx.broker.tick(fx.now + 61ms);
    EXPECT_EQ(fx.broker.allocated(), fx.sid(1));
    EXPECT_EQ(fx.broker.metrics().rtt_samples_ms, (std::vector<double>{61.0}));
}

TEST(Broker, DirectModeOneUpstreamPerSession)
{
    BrokerConfig cfg;
    cfg.mode = Mode::Direct;
    Fixture fx(cfg);
    for (std::size_t i = 0; i < 3; ++i)
        fx.connect(i);
    EXPECT_EQ(fx.broker.upstream_count(), 3u);
    EXPECT_EQ(fx.broker.metrics().n_upstream_sessions, 3u);

    const auto uid = fx.sid(2);
    fx.spawn_and_ack(2, 9, uid);
    fx.upstream[uid].take();
    fx.input(2, "z");
    EXPECT_EQ(input_payloads(fx.upstream[uid].take()), (std::vector<std::string>{"z"}));

    fx.broker.on_client_closed(fx.conns[2]);
    EXPECT_TRUE(fx.upstream[uid].closed);
    EXPECT_EQ(fx.broker.upstream_count(), 2u);
}

TEST(Broker, UpstreamLossDropsEveryone)
{
    Fixture fx;
    fx.connect(0);
    fx.connect(1);
    fx.broker.on_upstream_closed(0);
    EXPECT_TRUE(fx.broker.upstream_lost());
    EXPECT_TRUE(fx.clients[0].closed);
    EXPECT_EQ(fx.clients[1].frames.back().body, "UpstreamLost");
}

TEST(Broker, StartFailsWhenUpstreamRefuses)
{
    BrokerConfig cfg;
    Broker b(cfg, [](UpstreamId) -> std::unique_ptr<UpstreamLink> { throw Error(Errc::UpstreamUnreachable, "x"); });
    EXPECT_THROW(b.start(), Error);
}

TEST(MetricsJson, RoundTrip)
{
    StatsFile s;
    s.mode = "brokered";
    s.listen_port = 5000;
    s.metrics.n_sessions = 3;
    s.metrics.n_upstream_sessions = 1;
    s.metrics.total_bytes_queued = 12;
    s.metrics.per_session_bytes = {4, 4, 4};
    s.metrics.rtt_samples_ms = {1.5, 2.0};
    s.metrics.allocated = 2;
    const auto back = stats_from_json(stats_to_json(s));
    EXPECT_EQ(back.mode, "brokered");
    EXPECT_EQ(back.listen_port, 5000);
    EXPECT_EQ(back.metrics.per_session_bytes, s.metrics.per_session_bytes);
    EXPECT_EQ(back.metrics.rtt_samples_ms, s.metrics.rtt_samples_ms);
    EXPECT_EQ(back.metrics.allocated, 2u);
    EXPECT_THROW(stats_from_json("{"), Error);
}

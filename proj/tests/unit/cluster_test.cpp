#include "appshare/apppool/app_pool.hpp"
#include "appshare/cluster/peer.hpp"
#include "appshare/cluster/peer_config.hpp"
#include "appshare/error.hpp"
#include "gen.hpp"
#include "naive_sets.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <list>
#include <set>

using namespace appshare;
using namespace appshare::cluster;
using appshare::testing::Gen;
using appshare::testing::keys_of;

namespace {

const TimePoint t0 = TimePoint{} + std::chrono::hours(1);

Errc code_of(const std::function<void()>& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return Errc::ParseError;
}

PeerConfig config_for(const std::string& ip)
{
    PeerConfig cfg;
    cfg.peer_id = ip;
    return cfg;
}

std::size_t connects(const std::vector<Action>& actions)
{
    return static_cast<std::size_t>(
        std::count_if(actions.begin(), actions.end(), [](const Action& a) { return std::holds_alternative<Connect>(a); }));
}

apppool::AppPool office_pool(bool shared)
{
    apppool::AppPool pool;
    pool.add({"winword.exe", "C:\\Program Files\\Microsoft Office\\winword.exe", "guest2", shared});
    return pool;
}

} // namespace

TEST(PeerConfig, Defaults)
{
    PeerConfig cfg;
    EXPECT_EQ(cfg.multicast_group, "234.5.6.7");
    EXPECT_EQ(cfg.multicast_port, 45678);
    EXPECT_EQ(cfg.heartbeat_period, 2s);
    EXPECT_EQ(cfg.query_rebroadcast_period, 3s);
    EXPECT_EQ(cfg.request_timeout, 30s);
}

TEST(PeerConfig, ParseAndValidate)
{
    const auto cfg = parse_peer_config(
        "# peer\n[cluster]\ngroup = 239.1.1.1\nport=5000\nheartbeat_period_ms=100\nrebroadcast_period_ms = 200\n"
        "request_timeout_ms=900\nmax_sessions=2\npeer_id=10.0.0.9\n");
    EXPECT_EQ(cfg.multicast_group, "239.1.1.1");
    EXPECT_EQ(cfg.multicast_port, 5000);
    EXPECT_EQ(cfg.heartbeat_period, 100ms);
    EXPECT_EQ(cfg.query_rebroadcast_period, 200ms);
    EXPECT_EQ(cfg.request_timeout, 900ms);
    EXPECT_EQ(cfg.max_sessions, 2u);
    EXPECT_EQ(cfg.peer_id, "10.0.0.9");

    EXPECT_THROW(parse_peer_config("colour=blue\n"), Error);
    try {
        parse_peer_config("group=192.168.1.1\n");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::NotClassD);
    }
    EXPECT_TRUE(is_class_d("224.0.0.1"));
    EXPECT_TRUE(is_class_d("239.255.255.255"));
    EXPECT_FALSE(is_class_d("240.0.0.1"));
}

TEST(PeerConfig, PeerIdMayComeLater)
{
    auto cfg = parse_peer_config("port=7000\n");
    EXPECT_TRUE(cfg.peer_id.empty());
    EXPECT_EQ(code_of([&] { validate(cfg); }), Errc::BadAddress);
    cfg.peer_id = "10.0.0.4";
    validate(cfg);
    EXPECT_EQ(code_of([] { parse_peer_config("peer_id=alice\n"); }), Errc::BadAddress);
}

TEST(Peer, SubmitQueryDedup)
{
    Peer alice(config_for("10.0.0.1"));
    EXPECT_TRUE(alice.submit_query("winword.exe", t0));
    EXPECT_FALSE(alice.submit_query("winword.exe", t0 + 1s));
    EXPECT_EQ(alice.queries().size(), 1u);

    alice.tick_sender(t0 + 30s);
    EXPECT_TRUE(alice.queries().empty());
    const auto events = alice.take_events();
    ASSERT_EQ(events.size(), 1u);
    EXPECT_EQ(events[0].kind, PeerEvent::Kind::QueryTimedOut);
    EXPECT_TRUE(alice.submit_query("winword.exe", t0 + 31s));
}

TEST(Peer, TickSenderRebroadcasts)
{
    Peer alice(config_for("10.0.0.1"));
    EXPECT_TRUE(alice.tick_sender(t0).empty());
    alice.submit_query("winword.exe", t0);
    EXPECT_EQ(alice.tick_sender(t0).size(), 1u);
    EXPECT_TRUE(alice.tick_sender(t0 + 2s).empty());
    const auto again = alice.tick_sender(t0 + 3s);
    ASSERT_EQ(again.size(), 1u);
    EXPECT_EQ(std::get<wire::Query>(again[0]).app_name, "winword.exe");
}

TEST(Peer, PendingDedupAndCharlieDiscards)
{
    Peer charlie(config_for("10.0.0.3"));
    charlie.handle_datagram("10.0.0.1", wire::Query{"winword.exe"}, t0);
    charlie.handle_datagram("10.0.0.1", wire::Query{"winword.exe"}, t0 + 1s);
    EXPECT_EQ(charlie.pending().size(), 1u);

    charlie.handle_datagram("10.0.0.2", wire::Reply{"10.0.0.1", "winword.exe", "C:\\w.exe", "guest2"}, t0 + 2s);
    EXPECT_TRUE(charlie.pending().empty());
}

TEST(Peer, FirstResponseWins)
{
    Peer alice(config_for("10.0.0.1"));
    alice.submit_query("winword.exe", t0);
    const auto a1 = alice.handle_datagram("10.0.0.2", wire::Reply{"10.0.0.1", "winword.exe", "C:\\b.exe", "bob"}, t0 + 1ms);
    const auto a2 = alice.handle_datagram("10.0.0.3", wire::Reply{"10.0.0.1", "winword.exe", "C:\\c.exe", "carl"}, t0 + 2ms);
    ASSERT_EQ(connects(a1), 1u);
    EXPECT_EQ(connects(a2), 0u);
    const auto& d = std::get<Connect>(a1[0]).directive;
    EXPECT_EQ(d.host_ip, "10.0.0.2");
    EXPECT_EQ(d.full_path, "C:\\b.exe");
    EXPECT_EQ(alice.replies().size(), 2u);
    EXPECT_TRUE(alice.queries().empty());
}

TEST(Peer, SelfTrafficIgnored)
{
    Peer alice(config_for("10.0.0.1"));
    alice.handle_datagram("10.0.0.1", wire::Query{"winword.exe"}, t0);
    EXPECT_TRUE(alice.pending().empty());
    EXPECT_TRUE(alice.handle_datagram("10.0.0.1", wire::Heartbeat{"10.0.0.1"}, t0).empty());
}

TEST(Peer, ProcessPendingGates)
{
    auto cfg = config_for("10.0.0.2");
    cfg.max_sessions = 2;
    Peer bob(cfg);
    bob.handle_datagram("10.0.0.1", wire::Query{"winword.exe"}, t0);

    EXPECT_TRUE(bob.process_pending(office_pool(false), 0).empty());
    EXPECT_EQ(bob.pending().size(), 1u);

    EXPECT_TRUE(bob.process_pending(office_pool(true), 2).empty());
    EXPECT_EQ(bob.pending().size(), 1u);

    const auto out = bob.process_pending(office_pool(true), 0);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(wire::encode_datagram(out[0]),
              "1//10.0.0.1//winword.exe//C:\\Program Files\\Microsoft Office\\winword.exe//guest2");
    EXPECT_TRUE(bob.pending().empty());
}

TEST(Peer, ProcessPendingCountsThisPassAgainstCap)
{
    auto cfg = config_for("10.0.0.2");
    cfg.max_sessions = 2;
    Peer bob(cfg);
    for (int i = 10; i < 15; ++i)
        bob.handle_datagram("10.0.0." + std::to_string(i), wire::Query{"winword.exe"}, t0);
    EXPECT_EQ(bob.process_pending(office_pool(true), 1).size(), 1u);
    EXPECT_EQ(bob.pending().size(), 4u);
}

TEST(Peer, RosterJoinLeaveExpire)
{
    Peer alice(config_for("10.0.0.1"));
    auto a = alice.handle_datagram("10.0.0.2", wire::Heartbeat{"10.0.0.2"}, t0);
    ASSERT_EQ(a.size(), 1u);
    EXPECT_TRUE(std::holds_alternative<PeerJoined>(a[0]));
    EXPECT_TRUE(alice.handle_datagram("10.0.0.2", wire::Heartbeat{"10.0.0.2"}, t0 + 1s).empty());

    a = alice.handle_datagram("10.0.0.2", wire::Leave{"10.0.0.2"}, t0 + 2s);
    ASSERT_EQ(a.size(), 1u);
    EXPECT_TRUE(std::holds_alternative<PeerLeft>(a[0]));
    EXPECT_TRUE(alice.roster().empty());

    alice.handle_datagram("10.0.0.3", wire::Heartbeat{"10.0.0.3"}, t0);
    EXPECT_TRUE(alice.expire_roster(t0 + 6s).empty());
    EXPECT_EQ(alice.expire_roster(t0 + 6s + 1ms).size(), 1u);
}

TEST(Peer, NothingFromDepartedPeerUntilHeartbeat)
{
    Peer alice(config_for("10.0.0.1"));
    alice.submit_query("winword.exe", t0);
    alice.handle_datagram("10.0.0.2", wire::Query{"calc"}, t0);
    alice.handle_datagram("10.0.0.2", wire::Leave{"10.0.0.2"}, t0);
    EXPECT_TRUE(alice.pending().empty());

    auto a = alice.handle_datagram("10.0.0.2", wire::Reply{"10.0.0.1", "winword.exe", "p", "u"}, t0 + 1s);
    EXPECT_EQ(connects(a), 0u);
    alice.handle_datagram("10.0.0.2", wire::Query{"calc"}, t0 + 1s);
    EXPECT_TRUE(alice.pending().empty());

    alice.handle_datagram("10.0.0.2", wire::Heartbeat{"10.0.0.2"}, t0 + 2s);
    a = alice.handle_datagram("10.0.0.2", wire::Reply{"10.0.0.1", "winword.exe", "p", "u"}, t0 + 3s);
    EXPECT_EQ(connects(a), 1u);
}

// Field-wise `a.x < b.x && a.y < b.y` treats (1,2) and (2,1) as equivalent
// without either being equivalent to (1,1): not a strict weak ordering.
TEST(SetKeys, ConjunctionComparatorIsNotStrictWeak)
{
    using K = std::pair<int, int>;
    auto conj = [](const K& a, const K& b) { return a.first < b.first && a.second < b.second; };
    auto equiv = [&](const K& a, const K& b) { return !conj(a, b) && !conj(b, a); };
    const K a{1, 1}, b{1, 2}, c{2, 2};
    EXPECT_TRUE(equiv(a, b));
    EXPECT_TRUE(equiv(b, c));
    EXPECT_FALSE(equiv(a, c));

    std::set<K, decltype(conj)> broken(conj);
    broken.insert({1, 2});
    broken.insert({2, 1});
    EXPECT_EQ(broken.size(), 1u);
}

TEST(Peer, DedupMatchesListScanReference)
{
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        const auto mismatch = appshare::testing::dedup_mismatch(seed);
        ASSERT_FALSE(mismatch) << "seed " << seed << ": " << *mismatch;
    }
}

TEST(Peer, SetContentsArePermutationInvariant)
{
    const std::vector<std::string> ips = {"10.0.0.2", "10.0.0.3", "10.0.0.4"};
    const std::vector<std::string> apps = {"a", "b", "c"};
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Gen g(seed);
        std::vector<std::pair<std::string, wire::ClusterDatagram>> arrivals;
        for (int i = 0; i < 40; ++i) {
            const auto& src = ips[g.below(ips.size())];
            const auto& app = apps[g.below(apps.size())];
            if (g.coin())
                arrivals.emplace_back(src, wire::Query{app});
            else
                arrivals.emplace_back(src, wire::Reply{"10.0.0.1", app, "p", "u"});
        }
        auto run = [&](const auto& seq) {
            Peer p(config_for("10.0.0.1"));
            for (const auto& [src, d] : seq)
                p.handle_datagram(src, d, t0);
            return std::make_pair(keys_of(p.pending()), keys_of(p.replies()));
        };
        const auto expected = run(arrivals);
        for (int k = 0; k < 5; ++k) {
            std::shuffle(arrivals.begin(), arrivals.end(), g.rng());
            ASSERT_EQ(run(arrivals), expected) << "seed " << seed;
        }
    }
}

TEST(Peer, AtMostOneConnectPerQueryLifetime)
{
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        Gen g(seed);
        Peer alice(config_for("10.0.0.1"));
        alice.submit_query("winword.exe", t0);
        std::size_t total = 0;
        for (int i = 0; i < 30; ++i) {
            const auto responder = "10.0.1." + std::to_string(1 + g.below(20));
            total += connects(alice.handle_datagram(responder, wire::Reply{"10.0.0.1", "winword.exe", "p", "u"}, t0));
        }
        ASSERT_EQ(total, 1u);
    }
}

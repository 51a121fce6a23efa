#include "appshare/error.hpp"
#include "appshare/harness/loadtest.hpp"
#include "appshare/harness/schedule.hpp"
#include "appshare/harness/simulation.hpp"
#include "appshare/harness/stats.hpp"
#include "appshare/harness/transcript.hpp"
#include "gen.hpp"

#include <gtest/gtest.h>

using namespace appshare;
using namespace appshare::harness;
using wire::Opcode;

namespace {

std::vector<double> iota(std::size_t n)
{
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = static_cast<double>(i);
    return v;
}

// Total commit charge (KB) over n = 0..9 remote sessions, multi-login build.
const std::vector<double> kCommitMultiLogin = {248176, 268272, 285812, 300284, 314888,
                                               318972, 343584, 358156, 372684, 388188};
// Same measurement with the broker in front.
const std::vector<double> kCommitBrokered = {248176, 249012, 251132, 251932, 254080,
                                             255744, 257356, 258932, 260468, 261856};

} // namespace

TEST(Percentile, InterpolatesBetweenRanks)
{
    EXPECT_EQ(percentile({}, 50), 0);
    EXPECT_DOUBLE_EQ(percentile({5}, 95), 5);
    EXPECT_DOUBLE_EQ(percentile({1, 2, 3, 4}, 50), 2.5);
    EXPECT_DOUBLE_EQ(percentile({4, 1, 3, 2}, 0), 1);
    EXPECT_DOUBLE_EQ(percentile({4, 1, 3, 2}, 100), 4);
    EXPECT_DOUBLE_EQ(percentile({10, 20, 30, 40, 50}, 95), 48);
}

TEST(FitLinear, ConstantColumn)
{
    const auto xs = iota(5);
    const std::vector<double> ys(5, 7.0);
    const auto f = fit_linear(xs, ys);
    EXPECT_DOUBLE_EQ(f.slope, 0);
    EXPECT_DOUBLE_EQ(f.intercept, 7);
    EXPECT_DOUBLE_EQ(f.r_squared, 1);
}

TEST(FitLinear, TooFewRows)
{
    const std::vector<double> xs = {0, 1}, ys = {0, 1};
    try {
        fit_linear(xs, ys);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::TooFewRows);
    }
}

// Expected values computed offline with numpy.polyfit on the same columns.
TEST(FitLinear, MultiLoginCommitCharge)
{
    const auto f = fit_linear(iota(10), kCommitMultiLogin);
    EXPECT_NEAR(f.slope, 15070.884848484859, 1e-6);
    EXPECT_NEAR(f.intercept, 252082.61818181808, 1e-6);
    EXPECT_NEAR(f.r_squared, 0.9937398691168107, 1e-9);
}

TEST(FitLinear, BrokeredCommitCharge)
{
    const auto f = fit_linear(iota(10), kCommitBrokered);
    EXPECT_NEAR(f.slope, 1577.2606060606122, 1e-6);
    EXPECT_NEAR(f.intercept, 247771.1272727271, 1e-6);
    EXPECT_NEAR(f.r_squared, 0.9965978916570808, 1e-9);
    const auto multi = fit_linear(iota(10), kCommitMultiLogin);
    EXPECT_GT(multi.slope / f.slope, 9.0);
}

TEST(FitLinear, RecoversExactLine)
{
    appshare::testing::Gen g(3);
    for (int k = 0; k < 50; ++k) {
        const double a = static_cast<double>(g.below(1000)) - 500, b = static_cast<double>(g.below(100)) - 50;
        const auto xs = iota(3 + g.below(20));
        std::vector<double> ys;
        for (auto x : xs)
            ys.push_back(a + b * x);
        const auto f = fit_linear(xs, ys);
        ASSERT_NEAR(f.slope, b, 1e-9);
        ASSERT_NEAR(f.intercept, a, 1e-7);
        ASSERT_DOUBLE_EQ(f.r_squared, 1);
    }
}

TEST(Transcript, TextRoundTrip)
{
    Transcript t;
    t.allocation(1, 1, std::nullopt);
    t.focus(1, 3);
    t.queued(1, "k,1");
    t.upstream(0, {2, Opcode::Focus, "focus,3,0"});
    t.upstream(0, {0, Opcode::Input, "Kk,1"});
    t.upstream(0, {2, Opcode::Spawn, ""});
    const auto text = t.to_text();
    EXPECT_EQ(Transcript::parse(text).to_text(), text);
}

TEST(Transcript, ValidatorAcceptsDiscipline)
{
    Transcript t;
    t.focus(1, 3);
    t.queued(1, "a");
    t.queued(1, "b");
    t.allocation(1, 1, 3);
    t.upstream(0, {2, Opcode::Focus, "focus,3,0"});
    t.upstream(0, {0, Opcode::Input, "Ka"});
    t.upstream(0, {2, Opcode::Spawn, "spawn,x"});
    t.upstream(0, {0, Opcode::Input, "Kb"});
    const auto r = validate_transcript(t);
    EXPECT_TRUE(r.ok) << r.error;
    EXPECT_EQ(r.inputs, 2u);
}

TEST(Transcript, ValidatorCatchesViolations)
{
    {
        Transcript t;
        t.focus(1, 3);
        t.queued(1, "a");
        t.allocation(1, 1, 3);
        t.upstream(0, {0, Opcode::Input, "Ka"});
        EXPECT_FALSE(validate_transcript(t).ok);
    }
    {
        Transcript t;
        t.focus(1, 3);
        t.queued(1, "a");
        t.queued(1, "b");
        t.allocation(1, 1, 3);
        t.upstream(0, {2, Opcode::Focus, "focus,3,0"});
        t.upstream(0, {0, Opcode::Input, "Kb"});
        EXPECT_FALSE(validate_transcript(t).ok);
    }
    {
        Transcript t;
        t.focus(1, 3);
        t.focus(2, 4);
        t.queued(2, "a");
        t.allocation(1, 1, 3);
        t.upstream(0, {2, Opcode::Focus, "focus,3,0"});
        t.upstream(0, {0, Opcode::Input, "Ka"});
        EXPECT_FALSE(validate_transcript(t).ok);
    }
    {
        Transcript t;
        t.focus(1, 3);
        t.allocation(1, 1, 3);
        t.upstream(0, {2, Opcode::Focus, "focus,4,0"});
        EXPECT_FALSE(validate_transcript(t).ok);
    }
}

TEST(Simulation, SingleClientEcho)
{
    Simulation sim({});
    const auto c = sim.add_client();
    sim.spawn(c, "mspaint");
    ASSERT_TRUE(sim.client(c).focused());
    sim.input(c, wire::InputKind::Key, "hello");
    ASSERT_TRUE(sim.run_until([&] { return !sim.client(c).update_log().empty(); }, 1s));
    EXPECT_EQ(sim.client(c).update_log()[0], "upd,1,1,68656c6c6f");
    EXPECT_EQ(sim.upstream_sessions(), 1u);
}

TEST(Simulation, RetainedBytesAttribution)
{
    SimConfig cfg;
    cfg.mode = Mode::Direct;
    Simulation sim(cfg);
    const auto a = sim.add_client();
    sim.spawn(a, "x");
    sim.spawn(a, "y");
    EXPECT_EQ(sim.retained_bytes_for(a), cfg.host.session_surface_bytes + 2 * cfg.host.window_surface_bytes);
}

TEST(Schedule, JsonRoundTrip)
{
    const auto s = random_schedule(11);
    const auto back = schedule_from_json(schedule_to_json(s));
    EXPECT_EQ(schedule_to_json(back), schedule_to_json(s));
    EXPECT_THROW(schedule_from_json("{\"mode\":\"sideways\",\"clients\":1,\"events\":[]}"), Error);
}

TEST(Schedule, RandomSchedulesKeepSliceDiscipline)
{
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto r = replay(random_schedule(seed));
        ASSERT_TRUE(r.drained) << "seed " << seed;
        ASSERT_TRUE(r.validation.ok) << "seed " << seed << ": " << r.validation.error;
    }
}

TEST(LoadTest, ControlRowOnly)
{
    LoadTestOptions o;
    o.n_max = 0;
    const auto r = loadtest(o);
    ASSERT_EQ(r.rows.size(), 1u);
    EXPECT_EQ(r.rows[0].n_remote_sessions, 0u);
    EXPECT_EQ(r.rows[0].total_bytes_queued, 0u);
}

TEST(LoadTest, CsvRoundTrip)
{
    LoadTestOptions o;
    o.n_max = 3;
    o.events_per_session = 10;
    const auto r = loadtest(o);
    const auto csv = to_csv(r);
    EXPECT_EQ(csv.front(), '#');
    const auto rows = parse_csv(csv);
    ASSERT_EQ(rows.size(), 4u);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        EXPECT_EQ(rows[i].n_remote_sessions, i);
        EXPECT_EQ(rows[i].total_bytes_queued, r.rows[i].total_bytes_queued);
    }
}

TEST(Fairness, SingleClientLatencyBelowQuantum)
{
    FairnessOptions o;
    o.clients = 1;
    o.rotations = 50;
    const auto r = fairness_report(o);
    EXPECT_EQ(r.allocations, (std::vector<std::uint64_t>{50}));
    EXPECT_LT(r.rtt_ms_p95, to_millis(o.quantum));
}

TEST(Fairness, FourClientsTwentyFiveRotations)
{
    FairnessOptions o;
    o.clients = 4;
    o.rotations = 25;
    const auto r = fairness_report(o);
    EXPECT_EQ(r.allocations, (std::vector<std::uint64_t>{25, 25, 25, 25}));
}

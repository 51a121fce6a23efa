#include "appshare/client/protocol.hpp"
#include "appshare/client/slave.hpp"
#include "appshare/error.hpp"

#include <gtest/gtest.h>

using namespace appshare;
using namespace appshare::client;
using wire::Opcode;

TEST(ClientProtocol, WelcomeSetsChannel)
{
    ClientProtocol p;
    EXPECT_FALSE(p.negotiated());
    const auto ev = p.on_frame({wire::kControlChannel, Opcode::Welcome, "4,3"});
    ASSERT_TRUE(std::holds_alternative<Welcomed>(ev));
    EXPECT_EQ(p.session_id(), 4u);
    EXPECT_EQ(p.spawn("mspaint").channel, 3);
    EXPECT_EQ(p.spawn("mspaint").body, "spawn,mspaint");
}

TEST(ClientProtocol, WindowsAndFocus)
{
    ClientProtocol p;
    p.on_frame({wire::kControlChannel, Opcode::Welcome, "1,2"});
    p.on_frame({2, Opcode::SpawnAck, "ack,5,a"});
    p.on_frame({2, Opcode::SpawnAck, "ack,6,b"});
    EXPECT_EQ(p.windows().size(), 2u);
    EXPECT_EQ(p.focused(), 5u);
    const auto f = p.focus(6);
    EXPECT_EQ(f.body, "focus,6,0");
    EXPECT_EQ(p.focused(), 6u);
    p.focus(99);
    EXPECT_EQ(p.focused(), 6u);
}

TEST(ClientProtocol, UpdateLogGaplessCheck)
{
    ClientProtocol p;
    p.on_frame({0, Opcode::Update, "upd,5,1,61"});
    p.on_frame({0, Opcode::Update, "upd,6,1,61"});
    p.on_frame({0, Opcode::Update, "upd,5,2,62"});
    EXPECT_TRUE(p.log_gapless());
    EXPECT_EQ(p.update_log().size(), 3u);
    p.on_frame({0, Opcode::Update, "upd,5,4,62"});
    EXPECT_FALSE(p.log_gapless());
}

TEST(ClientProtocol, ErrorsAndBye)
{
    ClientProtocol p;
    const auto e = p.on_frame({2, Opcode::Error, "err,NotYourWindow,7"});
    ASSERT_TRUE(std::holds_alternative<Failed>(e));
    EXPECT_EQ(std::get<Failed>(e).error.code(), Errc::NotYourWindow);
    EXPECT_TRUE(std::holds_alternative<Closed>(p.on_frame({1, Opcode::Bye, "UpstreamLost"})));
}

TEST(Slave, EmptyCommandIsUsageError)
{
    try {
        run_slave({"127.0.0.1", 1}, "  ");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::EmptyCommand);
    }
}

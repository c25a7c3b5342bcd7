#include <gtest/gtest.h>

#include "support/scenarios.hpp"

using namespace autoserve;

TEST(Protocol, FullExchangeReturnsBothMachinesToStart)
{
    testbus::Network net(std::vector<LpSite>{{1, {0.0, 0.0}}});
    net.add_ap(7);
    double battery = 48.0;
    Vec2 pos{1.2, 0.0};
    bool serviced = false;
    for (int t = 1; t <= 300 && !serviced; ++t) {
        net.drain(t);
        const auto& ap = net.ap(7);
        if (ap.motion().kind == MotionCommand::Kind::Approach) {
            pos.x = std::max(0.0, pos.x - 0.3);
        }
        if (ap.state() == ApState::Departing) {
            battery = 100.0;
        }
        net.post(7, net.ap(7).tick(t, {battery, pos}));
        net.post(1, net.lp(1).tick(t));
        serviced = ap.services_received() == 1 && ap.state() == ApState::Operating;
    }
    net.drain(301);
    EXPECT_TRUE(serviced);
    EXPECT_EQ(net.ap(7).state(), ApState::Operating);
    EXPECT_EQ(net.lp(1).state(), LpState::Idle);
    EXPECT_EQ(net.lp(1).services_completed(), 1U);
    EXPECT_EQ(net.illegal, 0U);

    std::vector<ApState> ap_path;
    for (const auto& c : net.ap_log) {
        ap_path.push_back(c.to);
    }
    EXPECT_EQ(ap_path, (std::vector<ApState>{ApState::RequestPending, ApState::ReservedWaiting, ApState::Boarding,
                                             ApState::Landed, ApState::BeingServiced, ApState::Departing,
                                             ApState::Operating}));
    std::vector<LpState> lp_path;
    for (const auto& c : net.lp_log) {
        lp_path.push_back(c.to);
    }
    EXPECT_EQ(lp_path, (std::vector<LpState>{LpState::AwaitingBoarding, LpState::Aligning, LpState::Servicing,
                                             LpState::Releasing, LpState::Idle}));
}

TEST(Protocol, LowerBatteryIsConfirmedAheadAndServedFirst)
{
    const auto r = scenarios::priority_scenario();
    ASSERT_TRUE(r.a_confirmed && r.b_confirmed && r.a_after_b);
    EXPECT_EQ(*r.a_confirmed, 1);
    EXPECT_EQ(*r.b_confirmed, 1);
    EXPECT_EQ(*r.a_after_b, 2U);
    EXPECT_EQ(r.service_order, (std::vector<std::uint8_t>{5, 7, 6}));
}

TEST(Protocol, RandomInterleavingsKeepMachinesLegal)
{
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto r = scenarios::fsm_fuzz(seed, 4000);
        EXPECT_EQ(r.illegal_transitions, 0U) << "seed " << seed;
        EXPECT_EQ(r.double_holds, 0U) << "seed " << seed;
        EXPECT_EQ(r.requests_not_confirmed_once, 0U) << "seed " << seed;
        EXPECT_GT(r.requests, 0U);
        EXPECT_GT(r.transitions, 20U);
    }
}

TEST(Protocol, AtMostOneActiveApPerLp)
{
    // The LP holds a single current AP by construction; check it against the AP side.
    testbus::Network net(std::vector<LpSite>{{1, {0.0, 0.0}}});
    for (std::uint8_t id = 5; id <= 8; ++id) {
        net.add_ap(id);
    }
    for (int t = 1; t <= 1500; ++t) {
        net.drain(t);
        int active = 0;
        for (const auto& [id, ap] : net.aps()) {
            const auto s = ap->state();
            active += (s == ApState::Boarding || s == ApState::Landed || s == ApState::BeingServiced) ? 1 : 0;
            const double b = std::max(20.0, 60.0 - 0.1 * t - id);
            net.post(id, ap->tick(t, {s == ApState::Departing ? 100.0 : b, {0.0, 0.0}}));
        }
        ASSERT_LE(active, 1) << "t=" << t;
        net.post(1, net.lp(1).tick(t));
    }
    EXPECT_GE(net.lp(1).services_completed(), 3U);
}

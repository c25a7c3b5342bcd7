#include <gtest/gtest.h>

#include "autoserve/ap_node.hpp"
#include "support/gen.hpp"

using namespace autoserve;
using namespace autoserve::wire;

namespace {

ApConfig ap_config(std::vector<LpSite> roster = {{1, {0.0, 0.0}}})
{
    ApConfig c;
    c.sys_id = 7;
    c.roster = std::move(roster);
    return c;
}

template <class T>
std::vector<std::pair<std::uint8_t, T>> sent(const std::vector<Outbound>& out)
{
    std::vector<std::pair<std::uint8_t, T>> v;
    for (const auto& o : out) {
        if (const auto* m = std::get_if<T>(&o.msg)) {
            v.emplace_back(o.to, *m);
        }
    }
    return v;
}

/// AP 7 that has just requested LP 1 at the given battery level.
ApNode pending_ap(double battery, Vec2 at = {0.0, 0.0}, std::vector<LpSite> roster = {{1, {0.0, 0.0}}})
{
    ApNode ap(ap_config(std::move(roster)));
    ap.tick(1.0, {battery, at});
    return ap;
}

}  // namespace

TEST(ApNode, RequestsBelowThresholdAtNearestLp)
{
    ApNode ap(ap_config({{1, {50.0, 0.0}}, {2, {5.0, 0.0}}}));
    const auto out = ap.tick(1.0, {49.9, {0.0, 0.0}});
    const auto req = sent<ServiceReservationRequest>(out);
    ASSERT_EQ(req.size(), 1U);
    EXPECT_EQ(req[0].first, 2);
    EXPECT_EQ(req[0].second, (ServiceReservationRequest{50, 2}));
    EXPECT_EQ(ap.state(), ApState::RequestPending);
    EXPECT_EQ(ap.pending_lp(), 2);
}

TEST(ApNode, AboveThresholdOnlyHeartbeat)
{
    ApNode ap(ap_config());
    const auto out = ap.tick(1.0, {80.0, {3.0, 4.0}});
    ASSERT_EQ(out.size(), 1U);
    EXPECT_EQ(out[0].to, BroadcastId);
    const auto& hb = std::get<ExtendedHeartbeat>(out[0].msg);
    EXPECT_EQ(hb.battery_cpct, 8000);
    EXPECT_EQ(hb.system_state, NodeState::Operating);
    EXPECT_EQ(ap.state(), ApState::Operating);
}

TEST(ApNode, PriorityFollowsBattery)
{
    ApNode ap(ap_config());
    const auto req = sent<ServiceReservationRequest>(ap.tick(1.0, {30.0, {}}));
    ASSERT_EQ(req.size(), 1U);
    EXPECT_EQ(req[0].second.priority, 70);
}

TEST(ApNode, PositionZeroMeansKeepAndBoard)
{
    auto ap = pending_ap(45.0, {0.2, 0.0});
    const auto out = ap.handle_message(1, LpReservationConfirmation{0, 7}, 2.0);
    const auto dec = sent<ApReservationDecision>(out);
    ASSERT_EQ(dec.size(), 1U);
    EXPECT_EQ(dec[0].second, (ApReservationDecision{1, Decision::Keep}));
    EXPECT_EQ(ap.state(), ApState::Boarding);
    ASSERT_TRUE(ap.reservation());
    EXPECT_EQ(ap.reservation()->lp_sys_id, 1);
    EXPECT_EQ(ap.motion().kind, MotionCommand::Kind::Approach);
}

TEST(ApNode, LongQueueIsCancelledInFavourOfNextLp)
{
    // 50 %, position 4, no travel: 480 s needed, (50 - 15) / 0.2 = 175 s available.
    auto ap = pending_ap(50.0 - 1e-9, {0.0, 0.0}, {{1, {0.0, 0.0}}, {2, {30.0, 0.0}}});
    EXPECT_DOUBLE_EQ(ap.estimated_time_to_service(1, 4), 480.0);
    EXPECT_NEAR(ap.flight_margin_s(), 175.0, 1e-6);
    const auto out = ap.handle_message(1, LpReservationConfirmation{4, 7}, 2.0);
    ASSERT_EQ(out.size(), 2U);
    // Cancel first, then the new request.
    EXPECT_EQ(out[0].to, 1);
    EXPECT_EQ(std::get<ApReservationDecision>(out[0].msg), (ApReservationDecision{1, Decision::Cancel}));
    EXPECT_EQ(out[1].to, 2);
    EXPECT_EQ(std::get<ServiceReservationRequest>(out[1].msg).target_lp_sys_id, 2);
    EXPECT_EQ(ap.state(), ApState::RequestPending);
    EXPECT_EQ(ap.pending_lp(), 2);
    EXPECT_FALSE(ap.reservation());
    EXPECT_EQ(ap.retries(), 1U);
}

TEST(ApNode, AmpleMarginKeeps)
{
    auto ap = pending_ap(49.0);
    ApNode full(ap_config());
    full.tick(1.0, {100.0, {}});
    EXPECT_EQ(full.evaluate_confirmation(1, {1, 7}, 1.0).kind, ConfirmationVerdict::Kind::Keep);

    const auto out = ap.handle_message(1, LpReservationConfirmation{1, 7}, 2.0);
    EXPECT_EQ(sent<ApReservationDecision>(out)[0].second.decision, Decision::Keep);
    EXPECT_EQ(ap.state(), ApState::ReservedWaiting);
    EXPECT_EQ(ap.reservation()->last_known_position, 1U);
    EXPECT_EQ(ap.motion().kind, MotionCommand::Kind::Hold);
}

TEST(ApNode, ExhaustedAlternativesKeepBestOffer)
{
    auto ap = pending_ap(30.0, {0.0, 0.0}, {{1, {0.0, 0.0}}, {2, {30.0, 0.0}}});
    // LP1 offers position 3 (360 s); LP2 offers position 5 (600 s + 100 s travel).
    auto out = ap.handle_message(1, LpReservationConfirmation{3, 7}, 2.0);
    ASSERT_EQ(ap.pending_lp(), 2);
    out = ap.handle_message(2, LpReservationConfirmation{5, 7}, 3.0);
    ASSERT_EQ(out.size(), 2U);
    EXPECT_EQ(out[1].to, 1);
    EXPECT_EQ(ap.pending_lp(), 1);
    // LP1 answers again; it is the final choice whatever the position.
    out = ap.handle_message(1, LpReservationConfirmation{4, 7}, 4.0);
    EXPECT_EQ(ap.state(), ApState::ReservedWaiting);
    EXPECT_EQ(ap.reservation()->lp_sys_id, 1);
}

TEST(ApNode, SingleLpBadOfferIsStillKept)
{
    auto ap = pending_ap(20.0);
    ap.handle_message(1, LpReservationConfirmation{6, 7}, 2.0);
    EXPECT_EQ(ap.state(), ApState::ReservedWaiting);
}

TEST(ApNode, KeepPredicateIsMonotoneInPosition)
{
    gen::Rng rng(17);
    for (int i = 0; i < 5000; ++i) {
        const double battery = gen::real_in(rng, 0.0, 50.0);
        const Vec2 at{gen::real_in(rng, -50.0, 50.0), gen::real_in(rng, -50.0, 50.0)};
        const std::vector<LpSite> roster{{1, {0.0, 0.0}}, {2, {80.0, 80.0}}};
        auto verdict = [&](std::uint16_t pos) {
            auto ap = pending_ap(battery, at, roster);
            return ap.evaluate_confirmation(1, {pos, 7}, 1.0).kind;
        };
        const auto p = static_cast<std::uint16_t>(gen::int_in(rng, 1, 8));
        if (verdict(p) == ConfirmationVerdict::Kind::Keep) {
            for (std::uint16_t q = 0; q < p; ++q) {
                ASSERT_EQ(verdict(q), ConfirmationVerdict::Kind::Keep) << "battery " << battery << " pos " << q;
            }
        }
    }
}

TEST(ApNode, ConfirmationForAnotherApThrowsWhenEvaluated)
{
    auto ap = pending_ap(40.0);
    EXPECT_THROW(ap.evaluate_confirmation(1, {0, 99}, 1.0), ConfirmationForWrongAp);
    EXPECT_TRUE(ap.handle_message(1, LpReservationConfirmation{0, 99}, 1.0).empty());
    EXPECT_EQ(ap.state(), ApState::RequestPending);
}

TEST(ApNode, UnsolicitedConfirmationIsReleased)
{
    ApNode ap(ap_config({{1, {0.0, 0.0}}, {2, {9.0, 0.0}}}));
    ap.tick(1.0, {90.0, {}});
    const auto out = ap.handle_message(2, LpReservationConfirmation{0, 7}, 2.0);
    const auto dec = sent<ApReservationDecision>(out);
    ASSERT_EQ(dec.size(), 1U);
    EXPECT_EQ(dec[0].first, 2);
    EXPECT_EQ(dec[0].second.decision, Decision::Cancel);
    EXPECT_EQ(ap.state(), ApState::Operating);
}

TEST(ApNode, FullServiceCycle)
{
    auto ap = pending_ap(45.0, {3.0, 4.0});
    ap.handle_message(1, LpReservationConfirmation{2, 7}, 2.0);
    ASSERT_EQ(ap.state(), ApState::ReservedWaiting);
    ap.handle_message(1, LpReservationConfirmation{0, 7}, 10.0);
    ASSERT_EQ(ap.state(), ApState::Boarding);

    EXPECT_TRUE(sent<SystemStateUpdate>(ap.tick(11.0, {44.0, {3.0, 4.0}})).empty());
    const auto landed = sent<SystemStateUpdate>(ap.tick(12.0, {43.0, {0.0, 0.4}}));
    ASSERT_EQ(landed.size(), 1U);
    EXPECT_EQ(landed[0].second.state, NodeState::Landed);
    EXPECT_EQ(ap.state(), ApState::Landed);
    EXPECT_EQ(ap.motion().kind, MotionCommand::Kind::Docked);

    ap.handle_message(1, SystemStateUpdate{NodeState::Servicing}, 22.0);
    EXPECT_EQ(ap.state(), ApState::BeingServiced);
    ap.handle_message(1, SystemStateUpdate{NodeState::ServiceComplete}, 142.0);
    EXPECT_EQ(ap.state(), ApState::Departing);
    EXPECT_EQ(ap.services_received(), 1U);
    EXPECT_FALSE(ap.reservation());

    const auto dep = sent<SystemStateUpdate>(ap.tick(143.0, {100.0, {0.0, 0.0}}));
    ASSERT_EQ(dep.size(), 1U);
    EXPECT_EQ(dep[0].first, 1);
    EXPECT_EQ(dep[0].second.state, NodeState::Departed);
    EXPECT_EQ(ap.state(), ApState::Operating);
}

TEST(ApNode, StrayStateUpdatesIgnored)
{
    ApNode ap(ap_config());
    ap.tick(1.0, {90.0, {}});
    ap.handle_message(1, SystemStateUpdate{NodeState::ServiceComplete}, 2.0);
    EXPECT_EQ(ap.state(), ApState::Operating);

    auto waiting = pending_ap(45.0);
    waiting.handle_message(1, LpReservationConfirmation{1, 7}, 2.0);
    waiting.handle_message(1, SystemStateUpdate{NodeState::ServiceComplete}, 3.0);
    waiting.handle_message(2, SystemStateUpdate{NodeState::Servicing}, 3.0);
    EXPECT_EQ(waiting.state(), ApState::ReservedWaiting);
}

TEST(ApNode, LandedWithoutServiceReRequests)
{
    auto ap = pending_ap(45.0);
    ap.handle_message(1, LpReservationConfirmation{0, 7}, 2.0);
    ap.tick(3.0, {44.0, {0.0, 0.0}});
    ASSERT_EQ(ap.state(), ApState::Landed);
    EXPECT_TRUE(sent<ServiceReservationRequest>(ap.tick(62.0, {44.0, {}})).empty());
    EXPECT_EQ(sent<ServiceReservationRequest>(ap.tick(63.0, {44.0, {}})).size(), 1U);
    // The LP's renewed boarding call makes the AP report LANDED again.
    const auto again = sent<SystemStateUpdate>(ap.handle_message(1, LpReservationConfirmation{0, 7}, 64.0));
    ASSERT_EQ(again.size(), 1U);
    EXPECT_EQ(again[0].second.state, NodeState::Landed);
}

TEST(ApNode, WaitAtLpApproachesWhileQueued)
{
    ApConfig c = ap_config({{1, {10.0, 0.0}}});
    c.wait_at_lp = true;
    ApNode ap(c);
    ap.tick(1.0, {45.0, {}});
    ap.handle_message(1, LpReservationConfirmation{2, 7}, 2.0);
    const auto m = ap.motion();
    EXPECT_EQ(m.kind, MotionCommand::Kind::Approach);
    EXPECT_EQ(m.target, (Vec2{10.0, 0.0}));
}

TEST(ApNode, ReservationPresentIffHoldingState)
{
    for (auto s : {ApState::Operating, ApState::RequestPending, ApState::Departing}) {
        EXPECT_FALSE(holds_reservation(s));
    }
    for (auto s : {ApState::ReservedWaiting, ApState::Boarding, ApState::Landed, ApState::BeingServiced}) {
        EXPECT_TRUE(holds_reservation(s));
    }
}

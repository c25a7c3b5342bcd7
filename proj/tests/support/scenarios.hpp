#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "support/bus.hpp"

namespace scenarios {

using namespace autoserve;

struct PriorityOutcome
{
    std::optional<std::uint16_t> a_confirmed;  // A's position when it was confirmed
    std::optional<std::uint16_t> b_confirmed;
    std::optional<std::size_t> a_after_b;      // A's position at the LP once B is queued
    std::vector<std::uint8_t> service_order;   // APs in the order they entered BEING_SERVICED
};

/**
 * LP 1 is busy servicing AP 5. AP 6 ("A", 40 %) then AP 7 ("B", 25 %) request it,
 * A first. All three hover at the LP so travel time is zero.
 */
inline PriorityOutcome priority_scenario()
{
    testbus::Network net(std::vector<LpSite>{{1, {0.0, 0.0}}});
    net.add_ap(5);
    net.add_ap(6);
    net.add_ap(7);

    std::map<std::uint8_t, double> battery{{5, 45.0}, {6, 90.0}, {7, 90.0}};
    PriorityOutcome out;

    for (int t = 1; t <= 600; ++t) {
        const double now = t;
        for (auto l = net.busy_links(); !l.empty(); l = net.busy_links()) {
            for (const auto& link : l) {
                const auto d = net.deliver_one(link, now);
                for (const auto& r : d.replies) {
                    if (const auto* c = std::get_if<wire::LpReservationConfirmation>(&r.msg)) {
                        if (r.to == 6 && !out.a_confirmed) {
                            out.a_confirmed = c->queue_position;
                        }
                        if (r.to == 7 && !out.b_confirmed) {
                            out.b_confirmed = c->queue_position;
                            out.a_after_b = net.lp(1).reported_position(6);
                        }
                    }
                }
            }
        }
        if (t == 20) {
            battery[6] = 40.0;
        }
        if (t == 21) {
            battery[7] = 25.0;
        }
        for (const auto& [id, ap] : net.aps()) {
            if (ap->state() == ApState::Departing) {
                battery[id] = 100.0;
            }
            net.post(id, ap->tick(now, Telemetry{battery[id], {0.0, 0.0}}));
        }
        net.post(1, net.lp(1).tick(now));
    }
    for (const auto& c : net.ap_log) {
        if (c.to == ApState::BeingServiced) {
            out.service_order.push_back(c.id);
        }
    }
    return out;
}

struct FuzzOutcome
{
    std::size_t steps = 0;
    std::size_t illegal_transitions = 0;  // observer-detected or refused by the FSM
    std::size_t double_holds = 0;         // APs held by more than one LP after a drain
    std::size_t requests = 0;
    std::size_t requests_not_confirmed_once = 0;
    std::size_t checks = 0;
    std::size_t services = 0;
    std::size_t transitions = 0;
};

/**
 * Random interleaving of message deliveries (FIFO per link, random across links),
 * AP ticks with random telemetry, LP ticks and clock jumps. Every `drain_every`
 * steps the network is drained and reservation ownership is checked.
 */
inline FuzzOutcome fsm_fuzz(std::uint64_t seed, std::size_t steps, std::size_t drain_every = 250)
{
    const std::vector<LpSite> roster{{1, {0.0, 0.0}}, {2, {40.0, 0.0}}};
    testbus::Network net(roster);
    const std::vector<std::uint8_t> ap_ids{10, 11, 12};
    std::map<std::uint8_t, double> battery;
    for (auto id : ap_ids) {
        ApConfig c;
        c.landed_timeout_s = 30.0;
        net.add_ap(id, c);
        battery[id] = 100.0;
    }

    std::mt19937_64 rng(seed);
    auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
    auto real = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };

    FuzzOutcome out;
    double now = 0.0;

    auto check_requests = [&](const testbus::Network::Delivery& d) {
        if (std::holds_alternative<wire::ServiceReservationRequest>(d.msg) && net.lps().contains(d.to)) {
            ++out.requests;
            const auto n = std::count_if(d.replies.begin(), d.replies.end(), [&](const Outbound& o) {
                return o.to == d.from && std::holds_alternative<wire::LpReservationConfirmation>(o.msg);
            });
            if (n != 1) {
                ++out.requests_not_confirmed_once;
            }
        }
    };

    auto guarded = [&](auto&& fn) {
        try {
            fn();
        } catch (const std::logic_error&) {
            ++out.illegal_transitions;
        }
    };

    for (std::size_t step = 0; step < steps; ++step) {
        const int action = pick(100);
        if (action < 45) {
            const auto links = net.busy_links();
            if (!links.empty()) {
                guarded([&] { check_requests(net.deliver_one(links[static_cast<std::size_t>(pick(static_cast<int>(links.size())))], now)); });
            }
        } else if (action < 80) {
            const auto id = ap_ids[static_cast<std::size_t>(pick(3))];
            auto& b = battery[id];
            b = std::clamp(b - real(0.0, 6.0), 0.0, 100.0);
            if (pick(40) == 0) {
                b = 100.0;
            }
            Vec2 at;
            switch (pick(3)) {
            case 0: at = roster[0].position; break;
            case 1: at = roster[1].position; break;
            default: at = {real(-20.0, 60.0), real(-20.0, 20.0)}; break;
            }
            guarded([&] { net.post(id, net.ap(id).tick(now, Telemetry{b, at})); });
        } else if (action < 95) {
            const auto id = static_cast<std::uint8_t>(1 + pick(2));
            guarded([&] { net.post(id, net.lp(id).tick(now)); });
        } else {
            now += real(0.0, 40.0);
        }

        if ((step + 1) % drain_every == 0) {
            guarded([&] {
                for (auto l = net.busy_links(); !l.empty(); l = net.busy_links()) {
                    for (const auto& link : l) {
                        check_requests(net.deliver_one(link, now));
                    }
                }
            });
            ++out.checks;
            for (auto id : ap_ids) {
                if (net.holders(id) > 1) {
                    ++out.double_holds;
                }
            }
        }
        ++out.steps;
    }
    out.illegal_transitions += net.illegal;
    out.transitions = net.ap_log.size() + net.lp_log.size();
    for (const auto& [_, lp] : net.lps()) {
        out.services += lp->services_completed();
    }
    return out;
}

}  // namespace scenarios

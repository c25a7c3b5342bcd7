#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "autoserve/ap_node.hpp"
#include "autoserve/common.hpp"
#include "autoserve/lp_node.hpp"
#include "autoserve/sim/config.hpp"
#include "autoserve/sim/rng.hpp"
#include "autoserve/sim/trace.hpp"
#include "autoserve/wire/frame.hpp"

namespace autoserve::sim {

struct FailureEvent
{
    std::uint8_t uav = 0;
    std::int64_t t = 0;
    double battery_pct = 0.0;
};

struct SimReport
{
    enum class Outcome
    {
        Pass,
        Fail,
    };

    SimConfig config;
    std::vector<std::uint8_t> uav_ids;
    std::vector<double> min_battery_pct;  // per UAV, same order as uav_ids
    std::vector<FailureEvent> failures;
    std::vector<std::uint8_t> lp_ids;
    std::vector<std::size_t> services_per_lp;  // same order as lp_ids
    double mean_queue_wait_s = 0.0;            // request issued -> boarding call received
    double max_queue_wait_s = 0.0;
    std::size_t waits_observed = 0;
    std::size_t messages_sent = 0;
    std::size_t decode_errors = 0;
    std::size_t retries = 0;
    std::size_t boarding_timeouts = 0;
    Outcome outcome = Outcome::Pass;

    [[nodiscard]] double overall_min_battery() const
    {
        return min_battery_pct.empty() ? 100.0 : *std::min_element(min_battery_pct.begin(), min_battery_pct.end());
    }
};

[[nodiscard]] inline std::string_view to_string(SimReport::Outcome o)
{
    return o == SimReport::Outcome::Pass ? "PASS" : "FAIL";
}

[[nodiscard]] inline nlohmann::json to_json(const SimReport& r)
{
    nlohmann::json j;
    j["config"] = to_json(r.config);
    j["rng"] = std::string(RngIdentity);
    j["outcome"] = std::string(to_string(r.outcome));
    j["overall_min_battery_pct"] = r.overall_min_battery();
    auto& uavs = j["uavs"] = nlohmann::json::array();
    for (std::size_t i = 0; i < r.uav_ids.size(); ++i) {
        uavs.push_back({{"sys_id", r.uav_ids[i]}, {"min_battery_pct", r.min_battery_pct[i]}});
    }
    auto& fails = j["failures"] = nlohmann::json::array();
    for (const auto& f : r.failures) {
        fails.push_back({{"uav", f.uav}, {"t", f.t}, {"battery_pct", f.battery_pct}});
    }
    auto& lps = j["lps"] = nlohmann::json::array();
    for (std::size_t i = 0; i < r.lp_ids.size(); ++i) {
        lps.push_back({{"sys_id", r.lp_ids[i]}, {"services_completed", r.services_per_lp[i]}});
    }
    j["queue_wait_s"] = {{"mean", r.mean_queue_wait_s}, {"max", r.max_queue_wait_s}, {"count", r.waits_observed}};
    j["messages_sent"] = r.messages_sent;
    j["decode_errors"] = r.decode_errors;
    j["retries"] = r.retries;
    j["boarding_timeouts"] = r.boarding_timeouts;
    return j;
}

/// Configuration of LP `index` in a run.
[[nodiscard]] inline LpConfig lp_config(const SimConfig& cfg, const std::vector<LpSite>& roster, int index)
{
    LpConfig lc;
    lc.sys_id = lp_sys_id(index);
    lc.position = roster.at(static_cast<std::size_t>(index)).position;
    lc.service_duration_s = cfg.service_duration_s;
    lc.alignment_duration_s = cfg.alignment_duration_s;
    lc.boarding_timeout_s = cfg.boarding_timeout_s;
    lc.critical_threshold_pct = cfg.critical_threshold_pct;
    lc.roster = roster;
    return lc;
}

/// Configuration of UAV `index` in a run.
[[nodiscard]] inline ApConfig ap_config(const SimConfig& cfg, const std::vector<LpSite>& roster, int index)
{
    ApConfig ac;
    ac.sys_id = uav_sys_id(cfg, index);
    ac.request_threshold_pct = cfg.request_threshold_pct;
    ac.reserve_floor_pct = cfg.fail_threshold_pct;
    ac.service_duration_estimate_s = cfg.service_duration_s;
    ac.cruise_speed_mps = cfg.max_step_m_per_s > 0.0 ? cfg.max_step_m_per_s : 0.3;
    ac.max_consumption_pct_per_s = cfg.consumption_pct_per_s.max;
    ac.wait_at_lp = cfg.wait_at_lp;
    ac.roster = roster;
    return ac;
}

/// First trace line: run parameters and generator identity.
[[nodiscard]] inline nlohmann::json trace_header(const SimConfig& cfg)
{
    return {{"kind", "HEADER"}, {"format", 1}, {"rng", std::string(RngIdentity)}, {"config", to_json(cfg)}};
}

/**
 * Discrete-time (1 s) simulation of UAVs and landing platforms talking over an
 * in-memory bus. Every message is framed and parsed through the wire codec, and
 * is delivered exactly one tick after it is sent.
 *
 * Per tick t = 1..duration_s:
 *   1. deliver everything sent at t-1, in send order;
 *   2. for each UAV in id order: drain battery (unless docked), move, tick the AP;
 *   3. tick each LP in id order.
 *
 * Each UAV draws from its own stream, seeded from (seed, UAV index); its initial
 * battery and spawn point are the first three draws.
 */
class Simulation
{
public:
    explicit Simulation(SimConfig cfg, TraceSink sink = {}) : cfg_(std::move(cfg)), sink_(std::move(sink))
    {
        validate(cfg_);
        roster_ = lp_roster(cfg_);
        build_lps();
        build_uavs();
    }

    Simulation(const Simulation&) = delete;
    Simulation& operator=(const Simulation&) = delete;

    /// Advances one tick. Returns false once duration_s ticks have run.
    bool step()
    {
        if (now_ >= cfg_.duration_s) {
            return false;
        }
        ++now_;
        emit(TraceKind::Tick, "SIM", nullptr);

        auto inbox = std::move(in_flight_);
        in_flight_.clear();
        for (const auto& env : inbox) {
            deliver(env);
        }

        for (auto& u : uavs_) {
            advance_uav(u);
        }
        for (auto& lp : lps_) {
            send(lp->sys_id(), lp->config().comp_id, lp->tick(static_cast<double>(now_)));
        }
        return true;
    }

    SimReport run()
    {
        while (step()) {
        }
        return report();
    }

    [[nodiscard]] SimReport report() const
    {
        SimReport r;
        r.config = cfg_;
        for (const auto& u : uavs_) {
            r.uav_ids.push_back(u.node->sys_id());
            r.min_battery_pct.push_back(u.min_battery);
            r.retries += u.node->retries();
        }
        r.failures = failures_;
        for (const auto& lp : lps_) {
            r.lp_ids.push_back(lp->sys_id());
            r.services_per_lp.push_back(lp->services_completed());
            r.boarding_timeouts += lp->boarding_timeouts();
        }
        r.waits_observed = waits_.size();
        if (!waits_.empty()) {
            double sum = 0.0;
            for (double w : waits_) {
                sum += w;
            }
            r.mean_queue_wait_s = sum / static_cast<double>(waits_.size());
            r.max_queue_wait_s = *std::max_element(waits_.begin(), waits_.end());
        }
        r.messages_sent = messages_sent_;
        r.decode_errors = decode_errors_;
        r.outcome = failures_.empty() ? SimReport::Outcome::Pass : SimReport::Outcome::Fail;
        return r;
    }

    [[nodiscard]] std::int64_t now() const { return now_; }
    [[nodiscard]] const SimConfig& config() const { return cfg_; }
    [[nodiscard]] std::size_t uav_count() const { return uavs_.size(); }
    [[nodiscard]] const ApNode& ap(std::size_t i) const { return *uavs_.at(i).node; }
    [[nodiscard]] const LpNode& lp(std::size_t i) const { return *lps_.at(i); }
    [[nodiscard]] double battery(std::size_t i) const { return uavs_.at(i).battery; }
    [[nodiscard]] Vec2 position(std::size_t i) const { return uavs_.at(i).position; }

private:
    struct Uav
    {
        std::unique_ptr<ApNode> node;
        RngStream rng;
        double battery = 100.0;
        Vec2 position{};
        double min_battery = 100.0;
        bool below_floor = false;
        std::optional<double> request_started{};
        std::uint8_t seq = 0;
        std::unique_ptr<wire::SigningContext> signer{};
        wire::Keystore keystore{};
    };

    struct Envelope
    {
        std::uint64_t mid = 0;
        std::uint8_t from = 0;
        std::uint8_t to = 0;
        std::shared_ptr<const std::vector<std::uint8_t>> frame;
    };

    void build_lps()
    {
        for (int i = 0; i < cfg_.n_lps; ++i) {
            const auto lc = lp_config(cfg_, roster_, i);
            auto node = std::make_unique<LpNode>(lc);
            const auto id = lc.sys_id;
            node->set_observer([this, id](LpState from, LpState to, double) {
                state_change("LP" + std::to_string(id), to_string(from), to_string(to));
            });
            lps_.push_back(std::move(node));
            lp_seq_.push_back(0);
            lp_keys_.emplace_back();
            lp_signers_.push_back(make_signer(lc.sys_id));
            add_keys(lp_keys_.back());
        }
    }

    void build_uavs()
    {
        for (int k = 0; k < cfg_.n_uavs; ++k) {
            Uav u{.node = nullptr, .rng = RngStream(stream_seed(cfg_.seed, static_cast<std::uint64_t>(k) + 1))};
            u.battery = u.rng.uniform(cfg_.initial_battery_pct.min, cfg_.initial_battery_pct.max);
            const auto home = roster_[static_cast<std::size_t>(k) % roster_.size()].position;
            const double r = cfg_.spawn_radius_m * std::sqrt(u.rng.next_unit());
            const double theta = 2.0 * std::numbers::pi * u.rng.next_unit();
            u.position = clamp_to_area(Vec2{home.x + r * std::cos(theta), home.y + r * std::sin(theta)});
            u.min_battery = u.battery;

            const auto ac = ap_config(cfg_, roster_, k);
            u.node = std::make_unique<ApNode>(ac);
            const auto id = ac.sys_id;
            const auto idx = uavs_.size();
            u.node->set_observer([this, id, idx](ApState from, ApState to, double) {
                on_ap_transition(idx, id, from, to);
            });
            u.signer = make_signer(id);
            add_keys(u.keystore);
            uavs_.push_back(std::move(u));
        }
    }

    std::unique_ptr<wire::SigningContext> make_signer(std::uint8_t link_id)
    {
        if (!cfg_.sign_frames) {
            return nullptr;
        }
        return std::make_unique<wire::SigningContext>(link_id, network_secret(),
                                                      [this] { return static_cast<std::uint64_t>(now_) * 100'000; });
    }

    void add_keys(wire::Keystore& ks) const
    {
        if (!cfg_.sign_frames) {
            return;
        }
        ks.set_require_signed(true);
        for (int id = 1; id <= cfg_.n_lps + cfg_.n_uavs; ++id) {
            ks.add_key(static_cast<std::uint8_t>(id), network_secret());
        }
    }

    /// Shared network key, derived from the seed so runs stay reproducible.
    [[nodiscard]] wire::SecretKey network_secret() const
    {
        wire::SecretKey key{};
        std::uint64_t x = cfg_.seed ^ 0x4155'544F'5345'5256ULL;
        for (std::size_t i = 0; i < key.size(); i += 8) {
            x = splitmix64(x);
            for (std::size_t b = 0; b < 8; ++b) {
                key[i + b] = static_cast<std::uint8_t>((x >> (8 * b)) & 0xFF);
            }
        }
        return key;
    }

    void on_ap_transition(std::size_t idx, std::uint8_t id, ApState from, ApState to)
    {
        auto& u = uavs_[idx];
        if (to == ApState::RequestPending) {
            u.request_started = static_cast<double>(now_);
        }
        if (to == ApState::Boarding && u.request_started) {
            waits_.push_back(static_cast<double>(now_) - *u.request_started);
            u.request_started.reset();
        }
        if (from == ApState::BeingServiced && to == ApState::Departing) {
            u.battery = 100.0;
            u.below_floor = false;
        }
        state_change("AP" + std::to_string(id), to_string(from), to_string(to));
    }

    void advance_uav(Uav& u)
    {
        const auto cmd = u.node->motion();
        if (cmd.kind != MotionCommand::Kind::Docked) {
            u.battery = std::max(0.0, u.battery - sample_consumption(u.rng, cfg_.consumption_pct_per_s.min,
                                                                     cfg_.consumption_pct_per_s.max));
        }
        switch (cmd.kind) {
        case MotionCommand::Kind::Wander: {
            const auto d = sample_displacement(u.rng, cfg_.max_step_m_per_s);
            u.position = clamp_to_area(Vec2{u.position.x + d.x, u.position.y + d.y});
            break;
        }
        case MotionCommand::Kind::Approach: {
            const double dist = distance(u.position, cmd.target);
            if (dist <= cfg_.max_step_m_per_s) {
                u.position = cmd.target;
            } else {
                const double f = cfg_.max_step_m_per_s / dist;
                u.position = clamp_to_area(Vec2{u.position.x + (cmd.target.x - u.position.x) * f,
                                                u.position.y + (cmd.target.y - u.position.y) * f});
            }
            break;
        }
        case MotionCommand::Kind::Hold:
        case MotionCommand::Kind::Docked: break;
        }

        const auto id = u.node->sys_id();
        const std::string actor = "AP" + std::to_string(id);
        u.min_battery = std::min(u.min_battery, u.battery);
        if (sink_) {
            emit(TraceKind::Battery, actor, {{"pct", u.battery}, {"x", u.position.x}, {"y", u.position.y}});
        }
        if (u.battery < cfg_.fail_threshold_pct && !u.below_floor) {
            u.below_floor = true;
            failures_.push_back(FailureEvent{id, now_, u.battery});
            emit(TraceKind::Failure, actor, {{"pct", u.battery}});
        }
        send(id, u.node->config().comp_id, u.node->tick(static_cast<double>(now_), Telemetry{u.battery, u.position}));
    }

    void send(std::uint8_t from, std::uint8_t comp_id, const std::vector<Outbound>& out)
    {
        const bool from_lp = from <= cfg_.n_lps;
        for (const auto& o : out) {
            std::uint8_t& seq = from_lp ? lp_seq_[from - 1] : uavs_[from - cfg_.n_lps - 1].seq;
            wire::SigningContext* signer =
                from_lp ? lp_signers_[from - 1].get() : uavs_[from - cfg_.n_lps - 1].signer.get();
            auto frame = std::make_shared<const std::vector<std::uint8_t>>(
                wire::encode_frame(o.msg, seq++, from, comp_id, signer));
            auto post = [&](std::uint8_t to) {
                Envelope env{next_mid_++, from, to, frame};
                ++messages_sent_;
                if (sink_) {
                    emit(TraceKind::MsgSent, actor_name(from), msg_detail(env, o.msg, seq - 1));
                }
                in_flight_.push_back(std::move(env));
            };
            if (o.to != BroadcastId) {
                post(o.to);
            } else if (from_lp) {
                for (const auto& u : uavs_) {
                    post(u.node->sys_id());
                }
            } else {
                for (const auto& lp : lps_) {
                    post(lp->sys_id());
                }
            }
        }
    }

    void deliver(const Envelope& env)
    {
        const bool to_lp = env.to <= cfg_.n_lps;
        wire::Keystore* ks = nullptr;
        if (cfg_.sign_frames) {
            ks = to_lp ? &lp_keys_[env.to - 1] : &uavs_[env.to - cfg_.n_lps - 1].keystore;
        }
        wire::DecodedFrame frame;
        try {
            frame = wire::decode_frame(*env.frame, ks);
        } catch (const wire::WireError&) {
            ++decode_errors_;
            return;
        }
        if (sink_) {
            emit(TraceKind::MsgRecv, actor_name(env.to), msg_detail(env, frame.message, frame.header.seq));
        }
        const double t = static_cast<double>(now_);
        if (to_lp) {
            auto& lp = *lps_[env.to - 1];
            send(lp.sys_id(), lp.config().comp_id, lp.handle_message(frame.header.sys_id, frame.message, t));
        } else {
            auto& ap = *uavs_[env.to - cfg_.n_lps - 1].node;
            send(ap.sys_id(), ap.config().comp_id, ap.handle_message(frame.header.sys_id, frame.message, t));
        }
    }

    [[nodiscard]] std::string actor_name(std::uint8_t id) const
    {
        return (id <= cfg_.n_lps ? "LP" : "AP") + std::to_string(id);
    }

    [[nodiscard]] static nlohmann::json msg_detail(const Envelope& env, const wire::Message& msg, std::uint8_t seq)
    {
        return {{"mid", env.mid}, {"from", env.from}, {"to", env.to}, {"seq", seq}, {"msg", message_to_json(msg)}};
    }

    void state_change(const std::string& actor, std::string_view from, std::string_view to)
    {
        if (sink_) {
            emit(TraceKind::StateChange, actor, {{"from", std::string(from)}, {"to", std::string(to)}});
        }
    }

    void emit(TraceKind kind, const std::string& actor, nlohmann::json detail)
    {
        if (sink_) {
            sink_(TraceRecord{now_, actor, kind, std::move(detail)});
        }
    }

    [[nodiscard]] Vec2 clamp_to_area(Vec2 p) const
    {
        return Vec2{std::clamp(p.x, 0.0, cfg_.area_m.x), std::clamp(p.y, 0.0, cfg_.area_m.y)};
    }

    SimConfig cfg_;
    TraceSink sink_;
    std::vector<LpSite> roster_;
    std::vector<std::unique_ptr<LpNode>> lps_;
    std::vector<std::uint8_t> lp_seq_;
    std::vector<wire::Keystore> lp_keys_;
    std::vector<std::unique_ptr<wire::SigningContext>> lp_signers_;
    std::vector<Uav> uavs_;
    std::vector<Envelope> in_flight_;
    std::vector<FailureEvent> failures_;
    std::vector<double> waits_;
    std::int64_t now_ = 0;
    std::uint64_t next_mid_ = 0;
    std::size_t messages_sent_ = 0;
    std::size_t decode_errors_ = 0;
};

/// Runs a full simulation. Trace records, if wanted, go to `sink` in time order.
inline SimReport run_sim(const SimConfig& cfg, TraceSink sink = {})
{
    Simulation sim(cfg, std::move(sink));
    return sim.run();
}

}  // namespace autoserve::sim

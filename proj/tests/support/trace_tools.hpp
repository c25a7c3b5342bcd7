#pragma once

// Reading traces back and replaying their message and telemetry records through
// fresh state machines.

#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "autoserve/sim/sim.hpp"

namespace tracetools {

using namespace autoserve;
using nlohmann::json;

struct Captured
{
    std::string text;  // JSON lines including the header
    sim::SimReport report;
};

inline Captured capture(const sim::SimConfig& cfg)
{
    std::ostringstream os;
    sim::JsonlTraceWriter w(os);
    w.header(sim::trace_header(cfg));
    Captured c;
    c.report = sim::run_sim(cfg, [&](const sim::TraceRecord& r) { w(r); });
    c.text = os.str();
    return c;
}

/// Parsed records, header skipped.
inline std::vector<json> records(const std::string& text)
{
    std::vector<json> out;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (first) {
            first = false;
            continue;
        }
        out.push_back(json::parse(line));
    }
    return out;
}

using Change = std::tuple<std::int64_t, std::string, std::string, std::string>;

inline std::vector<Change> state_changes(const std::vector<json>& recs)
{
    std::vector<Change> out;
    for (const auto& r : recs) {
        if (r["kind"] == "STATE_CHANGE") {
            out.emplace_back(r["t"].get<std::int64_t>(), r["actor"].get<std::string>(),
                             r["detail"]["from"].get<std::string>(), r["detail"]["to"].get<std::string>());
        }
    }
    return out;
}

/**
 * Feeds MSG_RECV records to handle_message and BATTERY records to the AP tick, and
 * runs the LP ticks at the end of every second, as the simulator does. Returns the
 * state changes the fresh machines went through.
 */
inline std::vector<Change> replay(const sim::SimConfig& cfg, const std::vector<json>& recs)
{
    const auto roster = sim::lp_roster(cfg);
    std::vector<Change> out;
    std::int64_t now = 0;

    std::map<std::uint8_t, std::unique_ptr<LpNode>> lps;
    std::map<std::uint8_t, std::unique_ptr<ApNode>> aps;
    for (int i = 0; i < cfg.n_lps; ++i) {
        auto n = std::make_unique<LpNode>(sim::lp_config(cfg, roster, i));
        const std::string actor = "LP" + std::to_string(n->sys_id());
        n->set_observer([&, actor](LpState f, LpState t, double) {
            out.emplace_back(now, actor, std::string(to_string(f)), std::string(to_string(t)));
        });
        lps[n->sys_id()] = std::move(n);
    }
    for (int k = 0; k < cfg.n_uavs; ++k) {
        auto n = std::make_unique<ApNode>(sim::ap_config(cfg, roster, k));
        const std::string actor = "AP" + std::to_string(n->sys_id());
        n->set_observer([&, actor](ApState f, ApState t, double) {
            out.emplace_back(now, actor, std::string(to_string(f)), std::string(to_string(t)));
        });
        aps[n->sys_id()] = std::move(n);
    }
    auto lp_ticks = [&] {
        for (auto& [_, lp] : lps) {
            (void)lp->tick(static_cast<double>(now));
        }
    };

    for (const auto& r : recs) {
        const auto kind = r["kind"].get<std::string>();
        if (kind == "TICK") {
            if (now > 0) {
                lp_ticks();
            }
            now = r["t"].get<std::int64_t>();
        } else if (kind == "MSG_RECV") {
            const auto& d = r["detail"];
            const auto from = d["from"].get<std::uint8_t>();
            const auto to = d["to"].get<std::uint8_t>();
            const auto msg = sim::message_from_json(d["msg"]);
            if (auto it = lps.find(to); it != lps.end()) {
                (void)it->second->handle_message(from, msg, static_cast<double>(now));
            } else {
                (void)aps.at(to)->handle_message(from, msg, static_cast<double>(now));
            }
        } else if (kind == "BATTERY") {
            const auto id = static_cast<std::uint8_t>(std::stoi(r["actor"].get<std::string>().substr(2)));
            const auto& d = r["detail"];
            (void)aps.at(id)->tick(static_cast<double>(now),
                                   Telemetry{d["pct"].get<double>(), {d["x"].get<double>(), d["y"].get<double>()}});
        }
    }
    if (now > 0) {
        lp_ticks();
    }
    return out;
}

}  // namespace tracetools

#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "autoserve/common.hpp"

namespace autoserve::sim {

class InvalidConfig : public std::invalid_argument
{
public:
    explicit InvalidConfig(const std::string& what) : std::invalid_argument("invalid config: " + what) {}
};

struct Range
{
    double min = 0.0;
    double max = 0.0;

    bool operator==(const Range&) const = default;
};

/**
 * Every knob of a simulation run. JSON keys mirror the member names exactly.
 *
 * Defaults describe the one-LP capacity run: 0.15-0.20 %/s drain, request below 50 %,
 * failure below 15 %, 120 s service, 0.3 m/s displacement, a 1000 m x 1000 m area,
 * 7200 s, spawn within 40 m of an LP and initial battery uniform in 60-100 %.
 */
struct SimConfig
{
    Vec2 area_m{1000.0, 1000.0};
    int n_uavs = 5;
    int n_lps = 1;
    /// Empty means AUTO: LPs placed at the centres of a near-square grid over the area.
    std::vector<Vec2> lp_positions;
    double spawn_radius_m = 40.0;
    int duration_s = 7200;
    Range consumption_pct_per_s{0.15, 0.20};
    double request_threshold_pct = 50.0;
    double fail_threshold_pct = 15.0;
    double service_duration_s = 120.0;
    double max_step_m_per_s = 0.3;
    std::uint64_t seed = 1;

    Range initial_battery_pct{60.0, 100.0};
    double alignment_duration_s = 10.0;
    double boarding_timeout_s = 180.0;
    double critical_threshold_pct = 15.0;
    double safe_range_m = 60.0;
    std::vector<std::pair<std::uint8_t, std::uint8_t>> blocked_edges;
    bool wait_at_lp = false;
    bool sign_frames = false;

    bool operator==(const SimConfig&) const = default;
};

/// LP ids are 1..n_lps, UAV ids follow at n_lps + 1.
[[nodiscard]] inline std::uint8_t lp_sys_id(int index) { return static_cast<std::uint8_t>(index + 1); }
[[nodiscard]] inline std::uint8_t uav_sys_id(const SimConfig& cfg, int index)
{
    return static_cast<std::uint8_t>(cfg.n_lps + index + 1);
}

[[nodiscard]] inline std::vector<Vec2> auto_lp_layout(Vec2 area, int n)
{
    std::vector<Vec2> out;
    if (n <= 0) {
        return out;
    }
    const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
    const int rows = (n + cols - 1) / cols;
    for (int i = 0; i < n; ++i) {
        const int r = i / cols;
        const int c = i % cols;
        out.push_back(Vec2{(c + 0.5) * area.x / cols, (r + 0.5) * area.y / rows});
    }
    return out;
}

[[nodiscard]] inline std::vector<LpSite> lp_roster(const SimConfig& cfg)
{
    const auto positions = cfg.lp_positions.empty() ? auto_lp_layout(cfg.area_m, cfg.n_lps) : cfg.lp_positions;
    std::vector<LpSite> roster;
    for (int i = 0; i < cfg.n_lps; ++i) {
        roster.push_back(LpSite{lp_sys_id(i), positions[static_cast<std::size_t>(i)]});
    }
    return roster;
}

inline void validate(const SimConfig& c)
{
    auto inside = [&](Vec2 p) { return p.x >= 0.0 && p.y >= 0.0 && p.x <= c.area_m.x && p.y <= c.area_m.y; };
    if (!(c.area_m.x > 0.0 && c.area_m.y > 0.0)) {
        throw InvalidConfig("area_m must be positive");
    }
    if (c.n_uavs < 0 || c.n_lps < 1) {
        throw InvalidConfig("need n_uavs >= 0 and n_lps >= 1");
    }
    if (c.n_uavs + c.n_lps > 255) {
        throw InvalidConfig("n_uavs + n_lps must fit the 255 system ids");
    }
    if (!c.lp_positions.empty() && static_cast<int>(c.lp_positions.size()) != c.n_lps) {
        throw InvalidConfig("lp_positions has " + std::to_string(c.lp_positions.size()) + " entries but n_lps is " +
                            std::to_string(c.n_lps));
    }
    for (const auto& p : c.lp_positions) {
        if (!inside(p)) {
            throw InvalidConfig("LP position outside area");
        }
    }
    if (c.duration_s < 0) {
        throw InvalidConfig("duration_s must be >= 0");
    }
    if (!(c.consumption_pct_per_s.min > 0.0 && c.consumption_pct_per_s.min <= c.consumption_pct_per_s.max)) {
        throw InvalidConfig("need 0 < consumption min <= max");
    }
    if (!(c.fail_threshold_pct < c.request_threshold_pct && c.request_threshold_pct <= 100.0)) {
        throw InvalidConfig("need fail_threshold_pct < request_threshold_pct <= 100");
    }
    if (!(c.initial_battery_pct.min >= 0.0 && c.initial_battery_pct.min <= c.initial_battery_pct.max &&
          c.initial_battery_pct.max <= 100.0)) {
        throw InvalidConfig("need 0 <= initial battery min <= max <= 100");
    }
    if (c.spawn_radius_m < 0.0 || c.max_step_m_per_s < 0.0 || c.service_duration_s < 0.0 ||
        c.alignment_duration_s < 0.0 || c.boarding_timeout_s <= 0.0 || c.safe_range_m < 0.0) {
        throw InvalidConfig("durations, distances and speeds must be non-negative");
    }
    if (c.n_uavs > 0 && c.max_step_m_per_s <= 0.0) {
        throw InvalidConfig("max_step_m_per_s must be positive when UAVs fly");
    }
    for (auto [a, b] : c.blocked_edges) {
        if (a < 1 || b < 1 || a > c.n_lps || b > c.n_lps) {
            throw InvalidConfig("blocked edge references an unknown LP");
        }
    }
}

namespace detail {

inline Vec2 vec_from_json(const nlohmann::json& j, const char* key)
{
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        throw InvalidConfig(std::string(key) + " must be [x, y]");
    }
    return Vec2{j[0].get<double>(), j[1].get<double>()};
}

inline Range range_from_json(const nlohmann::json& j, const char* key)
{
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
        return Range{j[0].get<double>(), j[1].get<double>()};
    }
    if (j.is_object() && j.contains("min") && j.contains("max") && j.size() == 2) {
        return Range{j["min"].get<double>(), j["max"].get<double>()};
    }
    throw InvalidConfig(std::string(key) + " must be [min, max] or {\"min\":..,\"max\":..}");
}

template <class T>
T number(const nlohmann::json& j, const char* key)
{
    if (!j.is_number()) {
        throw InvalidConfig(std::string(key) + " must be a number");
    }
    if constexpr (std::is_integral_v<T>) {
        if (!j.is_number_integer() && !j.is_number_unsigned()) {
            throw InvalidConfig(std::string(key) + " must be an integer");
        }
    }
    return j.get<T>();
}

}  // namespace detail

/// Fills `cfg` from a JSON object. Missing keys keep their current values; unknown keys are rejected.
inline void apply_json(SimConfig& cfg, const nlohmann::json& j)
{
    using detail::number;
    if (!j.is_object()) {
        throw InvalidConfig("top level must be an object");
    }
    for (const auto& [key, v] : j.items()) {
        const char* k = key.c_str();
        if (key == "area_m") {
            cfg.area_m = detail::vec_from_json(v, k);
        } else if (key == "n_uavs") {
            cfg.n_uavs = number<int>(v, k);
        } else if (key == "n_lps") {
            cfg.n_lps = number<int>(v, k);
        } else if (key == "lp_positions") {
            cfg.lp_positions.clear();
            if (v.is_string()) {
                if (v.get<std::string>() != "AUTO") {
                    throw InvalidConfig("lp_positions must be \"AUTO\" or a list of [x, y]");
                }
            } else if (v.is_array()) {
                for (const auto& p : v) {
                    cfg.lp_positions.push_back(detail::vec_from_json(p, k));
                }
            } else {
                throw InvalidConfig("lp_positions must be \"AUTO\" or a list of [x, y]");
            }
        } else if (key == "spawn_radius_m") {
            cfg.spawn_radius_m = number<double>(v, k);
        } else if (key == "duration_s") {
            cfg.duration_s = number<int>(v, k);
        } else if (key == "consumption_pct_per_s") {
            cfg.consumption_pct_per_s = detail::range_from_json(v, k);
        } else if (key == "request_threshold_pct") {
            cfg.request_threshold_pct = number<double>(v, k);
        } else if (key == "fail_threshold_pct") {
            cfg.fail_threshold_pct = number<double>(v, k);
        } else if (key == "service_duration_s") {
            cfg.service_duration_s = number<double>(v, k);
        } else if (key == "max_step_m_per_s") {
            cfg.max_step_m_per_s = number<double>(v, k);
        } else if (key == "seed") {
            cfg.seed = number<std::uint64_t>(v, k);
        } else if (key == "initial_battery_pct") {
            cfg.initial_battery_pct = detail::range_from_json(v, k);
        } else if (key == "alignment_duration_s") {
            cfg.alignment_duration_s = number<double>(v, k);
        } else if (key == "boarding_timeout_s") {
            cfg.boarding_timeout_s = number<double>(v, k);
        } else if (key == "critical_threshold_pct") {
            cfg.critical_threshold_pct = number<double>(v, k);
        } else if (key == "safe_range_m") {
            cfg.safe_range_m = number<double>(v, k);
        } else if (key == "blocked_edges") {
            cfg.blocked_edges.clear();
            if (!v.is_array()) {
                throw InvalidConfig("blocked_edges must be a list of [a, b]");
            }
            for (const auto& e : v) {
                if (!e.is_array() || e.size() != 2) {
                    throw InvalidConfig("blocked_edges must be a list of [a, b]");
                }
                cfg.blocked_edges.emplace_back(number<std::uint8_t>(e[0], k), number<std::uint8_t>(e[1], k));
            }
        } else if (key == "wait_at_lp") {
            cfg.wait_at_lp = v.get<bool>();
        } else if (key == "sign_frames") {
            cfg.sign_frames = v.get<bool>();
        } else {
            throw InvalidConfig("unknown key \"" + key + "\"");
        }
    }
}

[[nodiscard]] inline SimConfig config_from_json(const nlohmann::json& j)
{
    SimConfig cfg;
    try {
        apply_json(cfg, j);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidConfig(e.what());
    }
    validate(cfg);
    return cfg;
}

[[nodiscard]] inline SimConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw InvalidConfig("cannot open " + path);
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw InvalidConfig(path + ": " + e.what());
    }
    return config_from_json(j);
}

[[nodiscard]] inline nlohmann::json to_json(const SimConfig& c)
{
    nlohmann::json j;
    j["area_m"] = {c.area_m.x, c.area_m.y};
    j["n_uavs"] = c.n_uavs;
    j["n_lps"] = c.n_lps;
    if (c.lp_positions.empty()) {
        j["lp_positions"] = "AUTO";
    } else {
        j["lp_positions"] = nlohmann::json::array();
        for (const auto& p : c.lp_positions) {
            j["lp_positions"].push_back({p.x, p.y});
        }
    }
    j["spawn_radius_m"] = c.spawn_radius_m;
    j["duration_s"] = c.duration_s;
    j["consumption_pct_per_s"] = {c.consumption_pct_per_s.min, c.consumption_pct_per_s.max};
    j["request_threshold_pct"] = c.request_threshold_pct;
    j["fail_threshold_pct"] = c.fail_threshold_pct;
    j["service_duration_s"] = c.service_duration_s;
    j["max_step_m_per_s"] = c.max_step_m_per_s;
    j["seed"] = c.seed;
    j["initial_battery_pct"] = {c.initial_battery_pct.min, c.initial_battery_pct.max};
    j["alignment_duration_s"] = c.alignment_duration_s;
    j["boarding_timeout_s"] = c.boarding_timeout_s;
    j["critical_threshold_pct"] = c.critical_threshold_pct;
    j["safe_range_m"] = c.safe_range_m;
    j["blocked_edges"] = nlohmann::json::array();
    for (auto [a, b] : c.blocked_edges) {
        j["blocked_edges"].push_back({a, b});
    }
    j["wait_at_lp"] = c.wait_at_lp;
    j["sign_frames"] = c.sign_frames;
    return j;
}

}  // namespace autoserve::sim

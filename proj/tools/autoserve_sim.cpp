// autoserve-sim: run / sweep the fleet simulation, decode frames, plan LP routes.

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "autoserve/routing.hpp"
#include "autoserve/sim/config.hpp"
#include "autoserve/sim/sim.hpp"
#include "autoserve/tools/dump.hpp"

namespace {

using namespace autoserve;

struct Overrides
{
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> uavs;
    std::optional<int> lps;
    std::optional<int> duration;
};

void add_override_flags(CLI::App* cmd, Overrides& o)
{
    cmd->add_option("--config", o.config_path, "Simulation config (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", o.seed, "Override seed");
    cmd->add_option("--uavs", o.uavs, "Override n_uavs");
    cmd->add_option("--lps", o.lps, "Override n_lps");
    cmd->add_option("--duration", o.duration, "Override duration_s");
}

sim::SimConfig resolve(const Overrides& o)
{
    auto cfg = sim::load_config(o.config_path);
    if (o.seed) cfg.seed = *o.seed;
    if (o.uavs) cfg.n_uavs = *o.uavs;
    if (o.lps) cfg.n_lps = *o.lps;
    if (o.duration) cfg.duration_s = *o.duration;
    sim::validate(cfg);
    return cfg;
}

int cmd_run(const Overrides& o, const std::string& trace_path, const std::string& report_path)
{
    const auto cfg = resolve(o);
    std::ofstream trace_file;
    sim::TraceSink sink;
    std::optional<sim::JsonlTraceWriter> writer;
    if (!trace_path.empty()) {
        trace_file.open(trace_path, std::ios::binary);
        if (!trace_file) {
            throw std::runtime_error("cannot write " + trace_path);
        }
        writer.emplace(trace_file);
        writer->header(sim::trace_header(cfg));
        sink = [&](const sim::TraceRecord& r) { (*writer)(r); };
    }
    const auto report = sim::run_sim(cfg, sink);
    const auto j = sim::to_json(report);
    if (!report_path.empty()) {
        std::ofstream out(report_path);
        if (!out) {
            throw std::runtime_error("cannot write " + report_path);
        }
        out << j.dump(2) << '\n';
    }
    std::cout << "outcome=" << sim::to_string(report.outcome) << '\n'
              << "seed=" << cfg.seed << '\n'
              << "uavs=" << cfg.n_uavs << '\n'
              << "lps=" << cfg.n_lps << '\n'
              << "duration_s=" << cfg.duration_s << '\n'
              << "min_battery_pct=" << report.overall_min_battery() << '\n'
              << "failures=" << report.failures.size() << '\n';
    std::size_t services = 0;
    for (auto s : report.services_per_lp) {
        services += s;
    }
    std::cout << "services=" << services << '\n'
              << "queue_wait_mean_s=" << report.mean_queue_wait_s << '\n'
              << "queue_wait_max_s=" << report.max_queue_wait_s << '\n';
    return report.outcome == sim::SimReport::Outcome::Pass ? 0 : 2;
}

double quantile(std::vector<double> v, double q)
{
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (v[hi] - v[lo]) * (pos - static_cast<double>(lo));
}

int cmd_sweep(const Overrides& o, int seeds)
{
    auto cfg = resolve(o);
    const auto first = cfg.seed;
    std::vector<double> mins;
    int passes = 0;
    for (int i = 0; i < seeds; ++i) {
        cfg.seed = first + static_cast<std::uint64_t>(i);
        const auto r = sim::run_sim(cfg);
        mins.push_back(r.overall_min_battery());
        passes += r.outcome == sim::SimReport::Outcome::Pass ? 1 : 0;
        std::cout << "seed=" << cfg.seed << " outcome=" << sim::to_string(r.outcome)
                  << " min_battery_pct=" << r.overall_min_battery() << '\n';
    }
    cfg.seed = first;
    std::cout << "config=" << sim::to_json(cfg).dump() << '\n';
    std::cout << "pass_rate=" << passes << '/' << seeds << '\n';
    if (!mins.empty()) {
        std::cout << "min_battery_pct.min=" << quantile(mins, 0.0) << '\n'
                  << "min_battery_pct.p10=" << quantile(mins, 0.1) << '\n'
                  << "min_battery_pct.median=" << quantile(mins, 0.5) << '\n'
                  << "min_battery_pct.p90=" << quantile(mins, 0.9) << '\n'
                  << "min_battery_pct.max=" << quantile(mins, 1.0) << '\n';
    }
    return 0;
}

int cmd_route(const std::string& config_path, int from, int to, std::optional<double> range)
{
    const auto cfg = sim::load_config(config_path);
    const routing::LpGraph g(sim::lp_roster(cfg), cfg.blocked_edges);
    const auto route = routing::plan_route(g, static_cast<std::uint8_t>(from), static_cast<std::uint8_t>(to),
                                           range.value_or(cfg.safe_range_m));
    for (std::size_t i = 0; i < route.size(); ++i) {
        std::cout << (i ? " " : "") << static_cast<int>(route[i]);
    }
    std::cout << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"AutoServe protocol engine and fleet simulator"};
    app.require_subcommand(1);

    Overrides run_o;
    std::string trace_path;
    std::string report_path;
    auto* run = app.add_subcommand("run", "Run one simulation (exit 0 PASS, 2 FAIL, 1 error)");
    add_override_flags(run, run_o);
    run->add_option("--trace", trace_path, "Write the JSON-lines trace here");
    run->add_option("--report", report_path, "Write the JSON report here");

    Overrides sweep_o;
    int seeds = 20;
    auto* sweep = app.add_subcommand("sweep", "Run consecutive seeds and summarise");
    add_override_flags(sweep, sweep_o);
    sweep->add_option("--seeds", seeds, "Number of seeds")->required()->check(CLI::PositiveNumber);

    std::string hex;
    auto* dump = app.add_subcommand("dump", "Decode a hex frame, one name=value per line");
    dump->add_option("hex", hex, "Frame bytes in hex ('-' reads stdin)")->required();

    std::string route_cfg;
    int from = 0;
    int to = 0;
    std::optional<double> range;
    auto* route = app.add_subcommand("route", "Plan a range-bounded route between two LPs");
    route->add_option("--config", route_cfg, "Network config (JSON)")->required()->check(CLI::ExistingFile);
    route->add_option("--from", from, "Source LP id")->required()->check(CLI::Range(1, 255));
    route->add_option("--to", to, "Destination LP id")->required()->check(CLI::Range(1, 255));
    route->add_option("--range", range, "Safe range in meters (default: config safe_range_m)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (*run) {
            return cmd_run(run_o, trace_path, report_path);
        }
        if (*sweep) {
            return cmd_sweep(sweep_o, seeds);
        }
        if (*dump) {
            if (hex == "-") {
                std::ostringstream ss;
                ss << std::cin.rdbuf();
                hex = ss.str();
            }
            tools::dump_frame(tools::parse_hex(hex), std::cout);
            return 0;
        }
        if (*route) {
            return cmd_route(route_cfg, from, to, range);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

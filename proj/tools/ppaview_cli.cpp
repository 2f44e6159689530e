#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "ppaview/experiments.hpp"

using namespace ppaview;

namespace {

constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

struct Common {
    std::string scenario;
    std::string out{"out"};
    std::optional<std::uint64_t> seed;
    std::optional<double> noise_pos_std;
    std::optional<double> noise_yaw_std;
    std::string resolution;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--scenario", c.scenario, "Scenario file")->required();
    cmd->add_option("--out", c.out, "Output directory");
    cmd->add_option("--seed", c.seed, "Override the scenario seed");
    cmd->add_option("--noise-pos-std", c.noise_pos_std, "Actor position noise std (m)");
    cmd->add_option("--noise-yaw-std", c.noise_yaw_std, "Actor yaw noise std (rad)");
    cmd->add_option("--resolution", c.resolution, "Image size as WxH");
}

Scenario load(const Common& c) {
    Scenario sc = load_scenario(c.scenario);
    if (c.seed) sc.seed = *c.seed;
    if (c.noise_pos_std) sc.noise_pos_std = *c.noise_pos_std;
    if (c.noise_yaw_std) sc.noise_yaw_std = *c.noise_yaw_std;
    if (!c.resolution.empty()) {
        const auto x = c.resolution.find('x');
        int w = 0, h = 0;
        try {
            if (x == std::string::npos) throw std::invalid_argument(c.resolution);
            w = std::stoi(c.resolution.substr(0, x));
            h = std::stoi(c.resolution.substr(x + 1));
        } catch (const std::exception&) {
            throw ConfigError("--resolution expects WxH, got '" + c.resolution + "'");
        }
        try {
            sc.set_intrinsics(CameraIntrinsics(w, h, sc.intrinsics.fov_horizontal_deg));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }
    sc.validate();
    return sc;
}

std::vector<PlannerKind> parse_planners(const std::string& list) {
    std::vector<PlannerKind> kinds;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) kinds.push_back(parse_planner_kind(item));
    }
    if (kinds.empty()) throw ConfigError("--planners is empty");
    return kinds;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"PPA-based view planning experiments"};
    app.require_subcommand(1);

    Common correlate_opts, plan_opts, tour_opts;
    auto* correlate = app.add_subcommand("correlate", "PPA vs reconstruction quality over a view sphere");
    add_common(correlate, correlate_opts);

    auto* plan = app.add_subcommand("plan", "Run planners over the actor sequence and score reconstructions");
    add_common(plan, plan_opts);
    std::string planners = "no_plan,greedy,ppa_cuboid,ppa_mesh,enum_coverage,enum_chamfer";
    plan->add_option("--planners", planners, "Comma-separated planner list");

    auto* tour = app.add_subcommand("tour", "Shortest tour through PPA-thresholded viewpoint neighborhoods");
    add_common(tour, tour_opts);
    std::optional<double> threshold;
    tour->add_option("--threshold", threshold, "PPA threshold C (1/m)");

    auto* replay = app.add_subcommand("replay", "Summarize a plan or tour CSV");
    std::string replay_path;
    replay->add_option("csv", replay_path, "Plan or tour CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfigError;
    }

    try {
        if (*correlate) {
            cmd_correlate(load(correlate_opts), correlate_opts.out, std::cout);
        } else if (*plan) {
            const Scenario sc = load(plan_opts);
            cmd_plan(sc, parse_planners(planners), plan_opts.out, std::cout);
        } else if (*tour) {
            const Scenario sc = load(tour_opts);
            const double c = threshold.value_or(sc.tour_c_threshold);
            try {
                cmd_tour(sc, c, tour_opts.out, std::cout);
            } catch (const InfeasibleThresholdError& e) {
                std::cerr << "error: " << e.what() << "; choose --threshold <= " << 1.0 / sc.planner.r_safe << '\n';
                return kConfigError;
            }
        } else if (*replay) {
            return cmd_replay(replay_path, std::cout) == 0 ? 0 : kRuntimeError;
        }
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
    return 0;
}

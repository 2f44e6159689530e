#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "ppaview/experiments.hpp"
#include "ppaview/scenario.hpp"
#include "test_util.hpp"

using namespace ppaview;

namespace {

Scenario parse(const std::string& text) {
    std::istringstream in(text);
    return parse_scenario(in, test::source_dir() / "scenarios");
}

const char* kSmallWalk = R"(
walk_frames = 6
walk_dt_s = 0.2
walk_speed_mps = 1.0
walk_start = -1 0 0
image_width_px = 96
image_height_px = 72
delta_t = 200
enum_samples = 4
camera_start_m = 0 -12 2
merge_window_frames = 3
gt_samples = 2000
seed = 5
)";

}  // namespace

TEST(ScenarioParse, ReadsKeysAndDefaults) {
    const Scenario sc = parse(R"(
# comment line
actor_pose = 0 1 2 0.5
actor_pose = 0.5 1.5 2 0.5   # trailing comment
image_width_px = 640
image_height_px = 480
fov_horizontal_deg = 60
r_safe_m = 6
orientation_mode = free
sphere_radii_m = 4 6
tour_patches = mesh
seed = 19
)");
    ASSERT_EQ(sc.poses.size(), 2u);
    EXPECT_EQ(sc.poses[1].pose.x, 1.5);
    EXPECT_EQ(sc.intrinsics.width, 640);
    EXPECT_NEAR(sc.planner.fov.tan_half_horizontal, std::tan(deg_to_rad(30)), 1e-12);
    EXPECT_EQ(sc.planner.r_safe, 6.0);
    EXPECT_EQ(sc.planner.t_max, 1.0);
    EXPECT_EQ(sc.planner.orientation, OrientationMode::free);
    EXPECT_EQ(sc.sphere.radii, (std::vector<double>{4, 6}));
    EXPECT_TRUE(sc.tour_use_mesh);
    EXPECT_EQ(sc.seed, 19u);
    EXPECT_EQ(sc.build_sequence().size(), 2u);
}

TEST(ScenarioParse, WalkGenerator) {
    const Scenario sc = parse("walk_frames = 4\nwalk_dt_s = 0.5\nwalk_speed_mps = 2\nwalk_start = 1 0 1.5707963267948966\n");
    ASSERT_EQ(sc.poses.size(), 4u);
    EXPECT_NEAR(sc.poses[3].t, 1.5, 1e-12);
    EXPECT_NEAR(sc.poses[3].pose.x, 1.0, 1e-12);
    EXPECT_NEAR(sc.poses[3].pose.y, 3.0, 1e-12);

    WalkSpec turn;
    turn.frames = 101;
    turn.dt = 0.1;
    turn.turn_rate = kPi / 10.0;  // a full circle in 20 s
    turn.speed = 1.0;
    const auto w = generate_walk(turn);
    // The positions are vertices of a regular polygon with side 0.1 m and
    // exterior angle pi / 100, so after 100 sides the actor is across its
    // circumscribed circle: distance 2 R = side / sin(angle / 2).
    EXPECT_NEAR(w.back().pose.position().norm(), 0.1 / std::sin(kPi / 200.0), 1e-9);
    EXPECT_NEAR(w.back().pose.yaw, kPi, 1e-9);
}

TEST(ScenarioParse, Errors) {
    EXPECT_THROW(parse("unknown_key = 3\n"), ConfigError);
    EXPECT_THROW(parse("r_safe_m = abc\n"), ConfigError);
    EXPECT_THROW(parse("r_safe_m = -1\nactor_pose = 0 0 0 0\n"), ConfigError);
    EXPECT_THROW(parse("actor_pose = 0 0 0\n"), ConfigError);
    EXPECT_THROW(parse("actor_pose = 1 0 0 0\nactor_pose = 0 0 0 0\n"), ConfigError);
    EXPECT_THROW(parse("actor_pose = 0 0 0 0\nwalk_frames = 3\n"), ConfigError);
    EXPECT_THROW(parse("walk_frames = 2.5\n"), ConfigError);
    EXPECT_THROW(parse("just text\n"), ConfigError);
    EXPECT_THROW(parse(""), ConfigError);
    EXPECT_THROW(load_scenario(test::source_dir() / "scenarios" / "missing.scn"), ConfigError);
    const Scenario sc = parse("actor_pose = 0 0 0 0\nmesh_path = nowhere.obj\n");
    EXPECT_THROW(sc.load_actor_mesh(), ConfigError);
}

TEST(ScenarioFiles, BundledScenariosLoad) {
    for (const char* name : {"correlation.scn", "walking.scn", "tour.scn"}) {
        const Scenario sc = load_scenario(test::source_dir() / "scenarios" / name);
        EXPECT_NO_THROW(sc.validate()) << name;
        EXPECT_GT(sc.load_actor_mesh()->size(), 100u) << name;
    }
}

TEST(Commands, SingleViewCorrelationWarns) {
    Scenario sc = parse("actor_pose = 0 0 0 0\nsphere_radii_m = 6\nsphere_polar_steps = 1\nsphere_azimuth_steps = 1\n");
    const auto dir = test::temp_dir("single_view");
    std::ostringstream log;
    const CorrelationStudy s = cmd_correlate(sc, dir, log);
    EXPECT_EQ(s.records.size(), 1u);
    EXPECT_TRUE(std::isnan(s.spearman_ppt));
    EXPECT_NE(log.str().find("warning"), std::string::npos);
    EXPECT_TRUE(std::filesystem::exists(dir / "correlation.csv"));
}

TEST(Commands, PlanIsByteIdenticalAcrossRuns) {
    const Scenario sc = parse(kSmallWalk);
    const std::vector<PlannerKind> kinds{PlannerKind::no_plan, PlannerKind::ppa_cuboid, PlannerKind::enum_coverage};
    const auto a = test::temp_dir("plan_a"), b = test::temp_dir("plan_b");
    std::ostringstream log;
    cmd_plan(sc, kinds, a, log);
    cmd_plan(sc, kinds, b, log);
    std::size_t compared = 0;
    for (const auto& e : std::filesystem::directory_iterator(a)) {
        EXPECT_EQ(test::read_text(e.path()), test::read_text(b / e.path().filename())) << e.path();
        ++compared;
    }
    EXPECT_GE(compared, 7u);
    const std::string table = test::read_text(a / "table.csv");
    EXPECT_EQ(table.rfind("# r_safe_m=8.0 t_max_m=1.0 noise_pos_std_m=0.5 noise_yaw_std_rad=0.5 seed=5\n", 0), 0u);
    const std::string run = test::read_text(a / "run_ppa_cuboid_noisy.csv");
    EXPECT_NE(run.find("r_safe_m=8.0 t_max_m=1.0"), std::string::npos);
    std::ostringstream replay;
    EXPECT_EQ(cmd_replay(a / "run_ppa_cuboid_noisy.csv", replay), 0);
    EXPECT_NE(replay.str().find("violations=0"), std::string::npos);
}

TEST(Commands, SeedChangesNoisyRun) {
    Scenario sc = parse(kSmallWalk);
    const auto r1 = run_planners(sc, {PlannerKind::ppa_cuboid}, true);
    sc.seed = 6;
    const auto r2 = run_planners(sc, {PlannerKind::ppa_cuboid}, true);
    EXPECT_NE(r1[0].run.steps[2].actor_estimate.x, r2[0].run.steps[2].actor_estimate.x);
}

TEST(Commands, TourOnBundledScenario) {
    const Scenario sc = load_scenario(test::source_dir() / "scenarios" / "tour.scn");
    const auto dir = test::temp_dir("tour");
    std::ostringstream log;
    const TourResult r = cmd_tour(sc, sc.tour_c_threshold, dir, log);
    EXPECT_EQ(r.tour.order.size(), 5u);
    for (std::size_t k = 0; k < r.tour.order.size(); ++k) {
        const Patch& p = r.patches[r.neighborhoods[r.tour.order[k]].patch_index];
        EXPECT_TRUE(viewpoint_feasible(r.tour.viewpoints[k], p, sc.tour_c_threshold, sc.planner.r_safe));
    }
    EXPECT_THROW(run_tour(sc, 0.2), InfeasibleThresholdError);
    std::ostringstream replay;
    EXPECT_EQ(cmd_replay(dir / "tour.csv", replay), 0);
    EXPECT_NE(replay.str().find("stops=5"), std::string::npos);
}

// Acceptance checks; prints one PASS/FAIL line per criterion and exits
// nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Geometry>

#include "ppaview/evaluation.hpp"
#include "ppaview/experiments.hpp"
#include "ppaview/ppa.hpp"
#include "ppaview/reconstruction.hpp"
#include "ppaview/scenario.hpp"
#include "ppaview/tracking.hpp"
#include "ppaview/tspn.hpp"

using namespace ppaview;

namespace {

struct Outcome {
    bool pass{false};
    std::string detail;
};

const std::filesystem::path kScenarios = std::filesystem::path(PPAVIEW_SOURCE_DIR) / "scenarios";

std::string fmt(double v, int prec = 4) {
    std::ostringstream s;
    s.precision(prec);
    s << v;
    return s.str();
}

Vec3 random_unit(Rng& rng) {
    std::normal_distribution<double> n;
    return Vec3(n(rng), n(rng), n(rng)).normalized();
}

// Steps from every planner run, shared with the feasibility check.
std::vector<std::pair<std::string, PlanRun>> g_runs;

void record_runs(const std::string& label, const std::vector<PlanTableRow>& rows) {
    for (const auto& r : rows) {
        g_runs.emplace_back(label + "/" + to_string(r.kind) + (r.noisy ? "/noisy" : "/clean"), r.run);
    }
}

// Plain sum of |v . n| / d used as the finite-difference target.
double raw_free(const Vec3& pos, const Vec3& dir, const std::vector<Patch>& patches) {
    double s = 0;
    for (const auto& p : patches) s += std::abs(dir.dot(p.normal)) / (pos - p.centroid).norm();
    return s;
}

double raw_constrained(const Vec3& pos, const std::vector<Patch>& patches) {
    double s = 0;
    for (const auto& p : patches) {
        const Vec3 r = pos - p.centroid;
        s += r.dot(p.normal) / r.squaredNorm();
    }
    return s;
}

double rel_err(const Eigen::VectorXd& fd, const Eigen::VectorXd& an) {
    return (fd - an).norm() / std::max(an.norm(), 1e-12);
}

Outcome jacobians() {
    Rng rng(1001);
    std::uniform_real_distribution<double> u(-3, 3);
    const double h = 1e-6;
    double worst = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const Vec3 pos(u(rng), u(rng), u(rng));
        const Vec3 dir = random_unit(rng);
        std::vector<Patch> patches;
        const int n = 1 + static_cast<int>(rng() % 4);
        while (static_cast<int>(patches.size()) < n) {
            Patch p{Vec3(u(rng), u(rng), u(rng)), random_unit(rng)};
            const Vec3 r = pos - p.centroid;
            if (r.norm() < 0.5) continue;
            // Non-grazing for both the free view direction and the line of sight.
            if (std::abs(p.normal.dot(dir)) < 0.1 || std::abs(p.normal.dot(r.normalized())) < 0.1) continue;
            patches.push_back(p);
        }
        const PpaGradient g = ppa_jacobian(CameraPose{pos, dir}, patches);
        const Vec3 gc = ppa_constrained_gradient(pos, patches);
        Vec3 fd = Vec3::Zero(), fdc = Vec3::Zero();
        for (int i = 0; i < 3; ++i) {
            Vec3 e = Vec3::Zero();
            e[i] = h;
            fd[i] = (raw_free(pos + e, dir, patches) - raw_free(pos - e, dir, patches)) / (2 * h);
            fdc[i] = (raw_constrained(pos + e, patches) - raw_constrained(pos - e, patches)) / (2 * h);
        }
        worst = std::max({worst, rel_err(fd, g.d_position), rel_err(fdc, gc)});
        // The view direction lives on the unit sphere: compare tangent derivatives.
        const CameraBasis b = camera_basis(dir);
        Eigen::Vector2d fdv, anv;
        for (int i = 0; i < 2; ++i) {
            const Vec3 t = i == 0 ? b.right : b.up;
            fdv[i] = (raw_free(pos, (dir + h * t).normalized(), patches) -
                      raw_free(pos, (dir - h * t).normalized(), patches)) /
                     (2 * h);
            anv[i] = g.d_view_dir.dot(t);
        }
        worst = std::max(worst, rel_err(fdv, anv));
    }
    return {worst < 1e-6, "max relative error " + fmt(worst, 3)};
}

Outcome level_set() {
    // Patch at the origin in the x-z plane slice, normal +z.
    const Patch p{Vec3::Zero(), Vec3::UnitZ()};
    double worst = 0;
    for (double t : {0.5, 3.0, 8.0}) {
        for (int k = 0; k < 360; ++k) {
            const double alpha = -kPi / 2 + kPi * (k + 0.5) / 360.0;
            const double d = t * std::cos(alpha);
            const Vec3 r = d * Vec3(std::sin(alpha), 0.0, std::cos(alpha));
            worst = std::max(worst, std::abs(ppa_constrained(r, p) - 1.0 / t));
        }
    }
    return {worst < 1e-12, "max |ppa - 1/t| " + fmt(worst, 3)};
}

Outcome correlation() {
    const Scenario sc = load_scenario(kScenarios / "correlation.scn");
    const std::size_t tris = sc.load_actor_mesh()->size();
    const CorrelationStudy s = run_correlation(sc);
    const bool ok = tris >= 1000 && s.records.size() == 100 && sc.intrinsics.width == 640 &&
                    sc.intrinsics.height == 480 && s.spearman_ppt >= 0.8 && s.spearman_coverage >= 0.8 &&
                    s.spearman_cuboid >= 0.7;
    return {ok, std::to_string(tris) + " triangles, " + std::to_string(s.records.size()) + " views, rho(ppt) " +
                    fmt(s.spearman_ppt) + ", rho(coverage) " + fmt(s.spearman_coverage) + ", rho(cuboid) " +
                    fmt(s.spearman_cuboid)};
}

const std::vector<PlannerKind> kAllPlanners{PlannerKind::no_plan,  PlannerKind::greedy,
                                            PlannerKind::ppa_cuboid, PlannerKind::ppa_mesh,
                                            PlannerKind::enum_coverage, PlannerKind::enum_chamfer};

double coverage_of(const std::vector<PlanTableRow>& rows, PlannerKind k) {
    for (const auto& r : rows) {
        if (r.kind == k) return r.eval.coverage_pct;
    }
    throw std::logic_error("planner missing from table");
}

double chamfer_of(const std::vector<PlanTableRow>& rows, PlannerKind k) {
    for (const auto& r : rows) {
        if (r.kind == k) return r.eval.chamfer_mm;
    }
    throw std::logic_error("planner missing from table");
}

std::string table_line(const std::vector<PlanTableRow>& rows) {
    std::string s;
    for (const auto& r : rows) {
        if (!s.empty()) s += ", ";
        s += to_string(r.kind) + " " + fmt(r.eval.coverage_pct) + "%/" + fmt(r.eval.chamfer_mm) + "mm";
    }
    return s;
}

Outcome planner_ordering() {
    const Scenario sc = load_scenario(kScenarios / "walking.scn");
    const auto rows = run_planners(sc, kAllPlanners, false);
    record_runs("walking", rows);
    const double slack = 0.1;
    const double ec = coverage_of(rows, PlannerKind::enum_coverage), pm = coverage_of(rows, PlannerKind::ppa_mesh);
    const double pc = coverage_of(rows, PlannerKind::ppa_cuboid), np = coverage_of(rows, PlannerKind::no_plan);
    const bool setup = sc.poses.size() == 50 && sc.planner.r_safe == 8.0 && sc.planner.t_max == 1.0 &&
                       sc.intrinsics.width == 320 && sc.intrinsics.height == 240;
    const bool ok = setup && ec >= pm - slack && pm >= pc - slack && pc >= np - slack &&
                    chamfer_of(rows, PlannerKind::ppa_mesh) <= chamfer_of(rows, PlannerKind::no_plan);
    return {ok, table_line(rows)};
}

Outcome noise_robustness() {
    const Scenario sc = load_scenario(kScenarios / "walking.scn");
    const auto rows = run_planners(sc, kAllPlanners, true);
    record_runs("walking", rows);
    const bool ok = sc.noise_pos_std == 0.5 && sc.noise_yaw_std == 0.5 &&
                    coverage_of(rows, PlannerKind::ppa_cuboid) >= coverage_of(rows, PlannerKind::no_plan);
    return {ok, table_line(rows)};
}

Outcome feasibility() {
    // Extra seeded scenarios on top of the runs above: curving walks, both
    // orientation modes, several noise seeds, small images to keep it quick.
    Scenario base = load_scenario(kScenarios / "walking.scn");
    base.set_intrinsics(CameraIntrinsics(64, 48));
    base.gt_samples = 2000;
    base.planner.enum_samples = 8;
    for (std::uint64_t seed : {1, 2, 3}) {
        for (OrientationMode mode : {OrientationMode::look_at, OrientationMode::free}) {
            Scenario sc = base;
            sc.seed = seed;
            sc.planner.orientation = mode;
            WalkSpec walk;
            walk.frames = 30;
            walk.speed = 1.5;
            walk.turn_rate = 0.3 * static_cast<double>(seed);
            walk.start = ActorPose2D(-2, 1, 0.2 * static_cast<double>(seed));
            sc.poses = generate_walk(walk);
            sc.camera_start = Vec3(3.0 * static_cast<double>(seed), -11, 1.0 + static_cast<double>(seed));
            const std::string label = "curve" + std::to_string(seed) + (mode == OrientationMode::free ? "/free" : "");
            for (bool noisy : {false, true}) record_runs(label, run_planners(sc, kAllPlanners, noisy));
        }
    }
    std::size_t steps = 0, bad = 0;
    std::string first_bad;
    for (const auto& [label, run] : g_runs) {
        for (const auto& s : run.steps) {
            ++steps;
            if (!satisfies_constraints(s, run.config)) {
                if (bad++ == 0) first_bad = " first: " + label + " frame " + std::to_string(s.frame_index);
            }
        }
    }
    return {bad == 0 && steps > 0, std::to_string(g_runs.size()) + " runs, " + std::to_string(steps) +
                                       " steps, " + std::to_string(bad) + " violations" + first_bad};
}

// Rendered clouds sit on the pixel lattice, and the humanoid is mostly
// vertical tubes, so a copy shifted by a whole pixel row is nearly a copy of
// itself. Point-to-point ICP then has fixed points one or two rows off.
// Randomly keeping half of the rendered points removes that regularity.
Outcome icp_recovery() {
    const TriangleMesh mesh = make_humanoid_mesh();
    const Vec3 center(0, 0, 0.9);
    const CameraPose cam = CameraPose::look_at(center + Vec3(3.0, 1.5, 1.0), center);
    const PointCloud rendered = backproject(render(mesh, cam, CameraIntrinsics(640, 480)));
    Rng rng(7007);
    std::uniform_real_distribution<double> u01(0, 1);
    PointCloud thinned;
    for (const auto& p : rendered.points) {
        if (u01(rng) < 0.5) thinned.points.push_back(p);
    }

    struct Stats {
        double worst_r{0}, worst_t{0};
        int missed{0};
        bool monotone{true};
    };
    auto run = [&](const PointCloud& target, int trials, Rng& prng) {
        Vec3 c = Vec3::Zero();
        for (const auto& p : target.points) c += p;
        c /= static_cast<double>(target.size());
        Stats st;
        for (int k = 0; k < trials; ++k) {
            // Rotation up to 10 degrees about the centroid, shift up to 0.1 m.
            RigidTransform perturb;
            perturb.rotation =
                Eigen::AngleAxisd(deg_to_rad(10.0 * u01(prng)), random_unit(prng)).toRotationMatrix();
            const Vec3 shift = 0.1 * u01(prng) * random_unit(prng);
            perturb.translation = c + shift - perturb.rotation * c;
            const IcpResult r = icp_align(perturb.apply(target), target, IcpParams{300, 0.5, 1e-14});
            const RigidTransform truth = perturb.inverse();
            const double er = (r.transform.rotation - truth.rotation).norm();
            const double et = (r.transform.translation - truth.translation).norm();
            st.worst_r = std::max(st.worst_r, er);
            st.worst_t = std::max(st.worst_t, et);
            if (er >= 1e-3 || et >= 1e-3) ++st.missed;
            for (std::size_t i = 1; i < r.rmse_history.size(); ++i) {
                if (r.rmse_history[i] > r.rmse_history[i - 1]) st.monotone = false;
            }
        }
        return st;
    };
    Rng a(11), b(12);
    const Stats thin = run(thinned, 50, a);
    const Stats lattice = run(rendered, 10, b);
    return {thin.worst_r < 1e-3 && thin.worst_t < 1e-3 && thin.monotone && lattice.monotone,
            "50 perturbations of a " + std::to_string(thinned.size()) + "-point cloud, worst rotation " +
                fmt(thin.worst_r, 3) + ", translation " + fmt(thin.worst_t, 3) + " m" +
                (thin.monotone && lattice.monotone ? ", RMSE non-increasing" : ", RMSE increased") +
                "; unthinned lattice cloud stalls in " + std::to_string(lattice.missed) + "/10"};
}

Outcome metric_identities() {
    const TriangleMesh mesh = make_humanoid_mesh();
    Rng rng(8008);
    const PointCloud x = sample_mesh_surface(mesh, 5000, rng);
    const PointCloud y = sample_mesh_surface(mesh, 3000, rng);
    const ChamferResult self = chamfer_distance(x, x);
    const ChamferResult xy = chamfer_distance(x, y), yx = chamfer_distance(y, x);
    PointCloud a, b;
    a.points = {Vec3(0.2, 0.4, 1.0)};
    b.points = {Vec3(0.2, 0.4, 1.001)};
    const ChamferResult pair = chamfer_distance(a, b);
    int monotone_fail = 0;
    for (int seed = 0; seed < 100; ++seed) {
        Rng r(static_cast<std::uint64_t>(seed));
        PointCloud cloud = sample_mesh_surface(mesh, 200, r);
        const double before = triangle_coverage(cloud, mesh, 0.01).coverage_ratio;
        const PointCloud more = sample_mesh_surface(mesh, 100, r);
        cloud.points.insert(cloud.points.end(), more.points.begin(), more.points.end());
        if (triangle_coverage(cloud, mesh, 0.01).coverage_ratio < before) ++monotone_fail;
    }
    const bool ok = self.mean_mm == 0.0 && self.forward_mm == 0.0 && xy.mean_mm == yx.mean_mm &&
                    std::abs(pair.mean_mm - 1.0) < 1e-9 && monotone_fail == 0;
    return {ok, "self " + fmt(self.mean_mm) + " mm, symmetric " + (xy.mean_mm == yx.mean_mm ? "yes" : "no") +
                    ", single pair " + fmt(pair.mean_mm, 12) + " mm, coverage decreases " +
                    std::to_string(monotone_fail) + "/100"};
}

Outcome tracking() {
    const TriangleMesh local = make_humanoid_mesh();
    const double footprint = footprint_radius(local);
    const CameraIntrinsics intr(640, 480);
    Rng rng(9009);
    std::uniform_real_distribution<double> u01(0, 1);
    double worst = 0, sum = 0, worst_raw = 0;
    int localized = 0;
    for (int k = 0; k < 100; ++k) {
        const ActorPose2D pose(-5 + 10 * u01(rng), -5 + 10 * u01(rng), kPi * (2 * u01(rng) - 1));
        const TriangleMesh world = local.transformed(pose);
        const double az = 2 * kPi * u01(rng), ground = 5 + 3 * u01(rng), height = 3 + 3 * u01(rng);
        const Vec3 pos = pose.ground_point() + Vec3(ground * std::cos(az), ground * std::sin(az), height);
        const CameraPose cam = CameraPose::look_at(pos, pose.ground_point() + Vec3(0, 0, 0.9));
        const auto box = bbox_from_view(render(world, cam, intr));
        if (!box) continue;
        const double err = (localize_from_bbox(*box, cam, intr, footprint) - pose.position()).norm();
        worst_raw = std::max(worst_raw, (localize_from_bbox(*box, cam, intr) - pose.position()).norm());
        worst = std::max(worst, err);
        sum += err;
        ++localized;
    }

    // Constant-velocity target, 10^4 noisy steps.
    KalmanEstimator::Params kp;
    kp.pos_std = 0.5;
    kp.yaw_std = 0.0;
    kp.accel_noise = 0.01;
    KalmanEstimator kf(kp, 4242);
    const double dt = 0.1;
    const Vec2 v(0.8, -0.3);
    double sq = 0;
    int counted = 0;
    for (int k = 0; k < 10000; ++k) {
        const Vec2 p = Vec2(1, 2) + v * (k * dt);
        const ActorPose2D est = kf.estimate(k * dt, ActorPose2D(p.x(), p.y(), 0.0));
        if (k >= 200) {
            sq += (est.position() - p).squaredNorm();
            ++counted;
        }
    }
    const double rmse = std::sqrt(sq / counted);
    const bool ok = localized == 100 && worst < 0.1 && rmse < kp.pos_std;
    return {ok, "localized " + std::to_string(localized) + "/100, worst " + fmt(worst, 3) + " m, mean " +
                    fmt(sum / std::max(localized, 1), 3) + " m (footprint " + fmt(footprint, 3) +
                    " m; without it worst " + fmt(worst_raw, 3) + " m); KF steady-state RMSE " + fmt(rmse, 3) +
                    " m vs sigma " + fmt(kp.pos_std)};
}

Outcome tspn() {
    Rng rng(1010);
    std::uniform_real_distribution<double> u(-2, 2);
    const double c_threshold = 0.05, r_safe = 8.0;
    double worst_ratio = 0;
    int invalid = 0;
    for (int inst = 0; inst < 50; ++inst) {
        const std::size_t n = 2 + inst % 7;
        std::vector<Patch> patches;
        std::vector<Neighborhood> nbs;
        for (std::size_t i = 0; i < n; ++i) {
            patches.push_back({Vec3(u(rng), u(rng), 1 + 0.5 * u(rng)), random_unit(rng)});
            nbs.push_back(build_neighborhood(patches.back(), i, c_threshold, r_safe, 0,
                                             static_cast<std::uint64_t>(inst)));
        }
        const Tour t = solve_tour(nbs, static_cast<std::uint64_t>(inst));
        const double best = brute_force_tour_length(nbs);
        worst_ratio = std::max(worst_ratio, best > 0 ? t.total_length / best : 1.0);
        for (std::size_t k = 0; k < t.order.size(); ++k) {
            if (!viewpoint_feasible(t.viewpoints[k], patches[nbs[t.order[k]].patch_index], c_threshold, r_safe)) {
                ++invalid;
            }
        }
    }
    // Bundled tour with sampled (non-singleton) neighborhoods.
    const Scenario sc = load_scenario(kScenarios / "tour.scn");
    const TourResult res = run_tour(sc, sc.tour_c_threshold);
    for (std::size_t k = 0; k < res.tour.order.size(); ++k) {
        const Patch& p = res.patches[res.neighborhoods[res.tour.order[k]].patch_index];
        if (!viewpoint_feasible(res.tour.viewpoints[k], p, sc.tour_c_threshold, sc.planner.r_safe)) ++invalid;
    }
    return {worst_ratio <= 1.05 && invalid == 0,
            "worst heuristic/optimal " + fmt(worst_ratio, 6) + " over 50 instances, " + std::to_string(invalid) +
                " invalid viewpoints"};
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        double budget_s;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {"1 jacobian finite differences", 5, jacobians},
        {"2 constrained PPA level set", 1, level_set},
        {"3 PPA correlation study", 300, correlation},
        {"4 planner ordering", 600, planner_ordering},
        {"5 noise robustness", 600, noise_robustness},
        {"6 constraint feasibility", 0, feasibility},
        {"7 ICP recovery", 30, icp_recovery},
        {"8 metric identities", 0, metric_identities},
        {"9 tracking round trip", 0, tracking},
        {"10 TSPN small-scale optimality", 60, tspn},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.budget_s > 0 && secs > c.budget_s) {
            o.pass = false;
            o.detail += "; over the " + fmt(c.budget_s) + " s budget";
        }
        std::printf("%s  %-32s %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), secs);
        std::fflush(stdout);
        if (!o.pass) ++failed;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}

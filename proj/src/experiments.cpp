#include "ppaview/experiments.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "ppaview/csv.hpp"
#include "ppaview/ppa.hpp"
#include "ppaview/reconstruction.hpp"
#include "ppaview/random.hpp"

namespace ppaview {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

std::string fmt(double v) { return std::isfinite(v) ? format_double(v) : std::string("nan"); }

}  // namespace

CorrelationStudy run_correlation(const Scenario& sc) {
    const MeshRef mesh = sc.load_actor_mesh();
    const ActorPose2D pose = sc.poses.front().pose;
    const TriangleMesh world = mesh->transformed(pose);
    const Vec3 center = cuboid_center(pose, sc.cuboid);
    const auto views = sample_view_sphere(center, sc.sphere);
    return run_correlation_study(world, views, sc.intrinsics, cuboid_patches(pose, sc.cuboid), center,
                                 sc.prism_height);
}

CorrelationStudy cmd_correlate(const Scenario& sc, const std::filesystem::path& out_dir, std::ostream& log) {
    std::filesystem::create_directories(out_dir);
    const CorrelationStudy study = run_correlation(sc);
    {
        auto out = open_out(out_dir / "correlation.csv");
        write_correlation_csv(study, out);
    }
    std::ostringstream summary;
    summary << "views=" << study.records.size() << " spearman_ppa_ppt=" << fmt(study.spearman_ppt)
            << " spearman_ppa_coverage=" << fmt(study.spearman_coverage)
            << " spearman_ppa_cuboid=" << fmt(study.spearman_cuboid) << '\n';
    {
        auto out = open_out(out_dir / "summary.txt");
        out << summary.str();
    }
    log << summary.str();
    if (!std::isfinite(study.spearman_ppt) || !std::isfinite(study.spearman_coverage) ||
        !std::isfinite(study.spearman_cuboid)) {
        log << "warning: correlation undefined (fewer than two views or a constant column)\n";
    }
    return study;
}

std::unique_ptr<ActorEstimator> make_estimator(const Scenario& sc, bool noisy) {
    if (!noisy) return std::make_unique<GroundTruthEstimator>();
    const std::uint64_t seed = stream_seed(sc.seed, "tracking/noise");
    if (sc.noisy_estimator == EstimatorKind::noisy) {
        return std::make_unique<NoisyEstimator>(sc.noise_pos_std, sc.noise_yaw_std, seed);
    }
    KalmanEstimator::Params p;
    p.pos_std = sc.noise_pos_std;
    p.yaw_std = sc.noise_yaw_std;
    p.accel_noise = sc.kf_accel_noise;
    return std::make_unique<KalmanEstimator>(p, seed);
}

PointCloud sample_ground_truth(const Scenario& sc, const TriangleMesh& local_mesh) {
    Rng rng = make_stream(sc.seed, "evaluation/gt_samples");
    return sample_mesh_surface(local_mesh, sc.gt_samples, rng);
}

namespace {

PointCloud place(const PointCloud& local, const ActorPose2D& pose) {
    PointCloud out;
    out.points.reserve(local.size());
    for (const auto& p : local.points) out.points.push_back(pose.to_world(p));
    return out;
}

}  // namespace

ViewScorer make_view_scorer(const Scenario& sc, PlannerKind kind, const PointCloud& gt_local) {
    const CameraIntrinsics intr = sc.intrinsics;
    const double prism = sc.prism_height;
    if (kind == PlannerKind::enum_coverage) {
        return [intr, prism](const CameraPose& cam, const ActorFrame& frame) {
            const TriangleMesh world = frame.mesh->transformed(frame.pose);
            const PointCloud cloud = backproject(render(world, cam, intr));
            if (cloud.empty()) return 0.0;
            return triangle_coverage(cloud, world, prism).coverage_ratio;
        };
    }
    if (kind == PlannerKind::enum_chamfer) {
        return [intr, gt_local](const CameraPose& cam, const ActorFrame& frame) {
            const TriangleMesh world = frame.mesh->transformed(frame.pose);
            const PointCloud cloud = backproject(render(world, cam, intr));
            if (cloud.empty()) return -std::numeric_limits<double>::infinity();
            return -chamfer_distance(cloud, place(gt_local, frame.pose)).mean_mm;
        };
    }
    return {};
}

PlanEvaluation evaluate_plan(const Scenario& sc, const ActorSequence& seq, const PlanRun& run,
                             const PointCloud& gt_local) {
    if (run.steps.size() != seq.size()) throw std::invalid_argument("plan length does not match the sequence");
    PlanEvaluation ev;
    double coverage_sum = 0, chamfer_sum = 0;
    std::size_t chamfer_windows = 0;
    const std::size_t w = static_cast<std::size_t>(sc.merge_window);
    for (std::size_t start = 0; start < seq.size(); start += w) {
        const std::size_t end = std::min(seq.size(), start + w);
        const ActorPose2D anchor = seq[start].pose;
        std::vector<CameraFrame> frames;
        for (std::size_t i = start; i < end; ++i) {
            const ActorFrame& f = seq[i];
            const CameraPose& cam = run.steps[i].camera_after;
            const RenderedView view = render(f.mesh->transformed(f.pose), cam, sc.intrinsics);
            // Express the camera in the anchor frame's actor coordinates so the
            // merged cloud lines up with the actor at `anchor`.
            const Vec3 pos = anchor.to_world(f.pose.to_local(cam.position));
            const Vec3 dir = anchor.rotate(f.pose.to_local(cam.position + cam.view_dir) - f.pose.to_local(cam.position));
            const CameraPose effective{pos, dir};
            frames.push_back({to_camera_frame(backproject(view), cam), effective});
        }
        PointCloud merged;
        if (frames.size() == 1) {
            merged = voxel_downsample(to_world_frame(frames[0].cloud, frames[0].pose), sc.voxel);
        } else {
            bool all_nonempty = true;
            for (const auto& f : frames) all_nonempty = all_nonempty && f.cloud.size() >= 3;
            merged = merge_frames(frames, sc.merge_use_icp && all_nonempty, sc.voxel, sc.icp);
        }
        const TriangleMesh world = seq[start].mesh->transformed(anchor);
        const double cov = merged.empty() ? 0.0 : triangle_coverage(merged, world, sc.prism_height).coverage_ratio;
        coverage_sum += cov;
        if (!merged.empty()) {
            chamfer_sum += chamfer_distance(merged, place(gt_local, anchor)).mean_mm;
            ++chamfer_windows;
        }
        ev.merged.push_back(std::move(merged));
        ++ev.windows;
    }
    ev.coverage_pct = 100.0 * coverage_sum / static_cast<double>(ev.windows);
    ev.chamfer_mm = chamfer_windows ? chamfer_sum / static_cast<double>(chamfer_windows)
                                    : std::numeric_limits<double>::quiet_NaN();
    return ev;
}

std::vector<PlanTableRow> run_planners(const Scenario& sc, const std::vector<PlannerKind>& kinds, bool noisy) {
    const MeshRef mesh = sc.load_actor_mesh();
    const ActorSequence seq = sc.build_sequence(mesh);
    const PointCloud gt_local = sample_ground_truth(sc, *mesh);
    const ActorPose2D first = seq[0].pose;
    const CameraPose initial = CameraPose::look_at(sc.camera_start, cuboid_center(first, sc.cuboid));
    std::vector<PlanTableRow> rows;
    for (PlannerKind kind : kinds) {
        PlannerConfig cfg = sc.planner;
        cfg.kind = kind;
        auto estimator = make_estimator(sc, noisy);
        PlanTableRow row;
        row.kind = kind;
        row.noisy = noisy;
        row.run = plan_sequence(seq, initial, cfg, *estimator, sc.seed, make_view_scorer(sc, kind, gt_local));
        row.eval = evaluate_plan(sc, seq, row.run, gt_local);
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_plan_table(const Scenario& sc, const std::vector<PlanTableRow>& rows, std::ostream& out) {
    out << "# r_safe_m=" << format_param(sc.planner.r_safe) << " t_max_m=" << format_param(sc.planner.t_max)
        << " noise_pos_std_m=" << format_param(sc.noise_pos_std)
        << " noise_yaw_std_rad=" << format_param(sc.noise_yaw_std) << " seed=" << sc.seed << '\n';
    out << "planner,condition,coverage_pct,chamfer_mm,windows\n";
    for (const auto& r : rows) {
        CsvRow row;
        row << to_string(r.kind) << (r.noisy ? "noisy" : "clean") << r.eval.coverage_pct << r.eval.chamfer_mm
            << static_cast<unsigned long>(r.eval.windows);
        out << row.str() << '\n';
    }
}

std::vector<PlanTableRow> cmd_plan(const Scenario& sc, const std::vector<PlannerKind>& kinds,
                                   const std::filesystem::path& out_dir, std::ostream& log) {
    std::filesystem::create_directories(out_dir);
    std::vector<PlanTableRow> rows = run_planners(sc, kinds, false);
    auto noisy = run_planners(sc, kinds, true);
    for (auto& r : noisy) rows.push_back(std::move(r));
    for (const auto& r : rows) {
        const std::string stem = to_string(r.kind) + (r.noisy ? "_noisy" : "_clean");
        {
            auto out = open_out(out_dir / ("run_" + stem + ".csv"));
            write_plan_csv(r.run, out);
        }
        for (std::size_t w = 0; w < r.eval.merged.size(); ++w) {
            write_ply(r.eval.merged[w], out_dir / ("merged_" + stem + "_w" + std::to_string(w) + ".ply"));
        }
        log << stem << ": coverage " << fmt(r.eval.coverage_pct) << " %, chamfer " << fmt(r.eval.chamfer_mm)
            << " mm\n";
    }
    auto out = open_out(out_dir / "table.csv");
    write_plan_table(sc, rows, out);
    return rows;
}

std::vector<Patch> tour_patches(const Scenario& sc) {
    const ActorPose2D pose = sc.poses.front().pose;
    if (!sc.tour_use_mesh) return cuboid_patches(pose, sc.cuboid);
    return mesh_to_patches(sc.load_actor_mesh()->transformed(pose));
}

TourResult run_tour(const Scenario& sc, double c) {
    TourResult res;
    res.patches = tour_patches(sc);
    for (std::size_t j = 0; j < res.patches.size(); ++j) {
        res.neighborhoods.push_back(
            build_neighborhood(res.patches[j], j, c, sc.planner.r_safe, sc.tour_samples, sc.seed));
    }
    res.tour = solve_tour(res.neighborhoods, sc.seed);
    return res;
}

TourResult cmd_tour(const Scenario& sc, double c, const std::filesystem::path& out_dir, std::ostream& log) {
    std::filesystem::create_directories(out_dir);
    TourResult res = run_tour(sc, c);
    std::size_t violations = 0;
    for (std::size_t k = 0; k < res.tour.order.size(); ++k) {
        const Patch& p = res.patches[res.neighborhoods[res.tour.order[k]].patch_index];
        if (!viewpoint_feasible(res.tour.viewpoints[k], p, c, sc.planner.r_safe)) ++violations;
    }
    auto out = open_out(out_dir / "tour.csv");
    write_tour_csv(res.tour, res.neighborhoods, out);
    log << "stops=" << res.tour.order.size() << " total_length_m=" << fmt(res.tour.total_length)
        << " constraint_violations=" << violations << '\n';
    if (violations) throw std::runtime_error("tour viewpoints violate the PPA or safety constraint");
    return res;
}

int cmd_replay(const std::filesystem::path& csv, std::ostream& out) {
    std::ifstream in(csv);
    if (!in) throw ConfigError("cannot open " + csv.string());
    std::string first;
    std::getline(in, first);
    in.clear();
    in.seekg(0);
    if (first.rfind("# tour", 0) == 0) {
        const Tour t = read_tour_csv(in);
        out << "tour stops=" << t.order.size() << " total_length_m=" << fmt(t.total_length) << '\n';
        for (std::size_t k = 0; k < t.order.size(); ++k) {
            out << "  " << k << " patch " << t.order[k] << " at (" << fmt(t.viewpoints[k].x()) << ", "
                << fmt(t.viewpoints[k].y()) << ", " << fmt(t.viewpoints[k].z()) << ")\n";
        }
        return 0;
    }
    if (first.rfind("# planner", 0) != 0) throw ConfigError(csv.string() + " is neither a plan nor a tour CSV");
    const PlanRun run = read_plan_csv(in);
    double travelled = 0;
    int violations = 0;
    std::size_t clamped = 0, projected = 0;
    for (const auto& s : run.steps) {
        travelled += (s.camera_after.position - s.camera_before.position).norm();
        if (!satisfies_constraints(s, run.config)) ++violations;
        if (s.constraint_active == ConstraintFlag::step_clamped || s.constraint_active == ConstraintFlag::both) ++clamped;
        if (s.constraint_active == ConstraintFlag::safety_projected || s.constraint_active == ConstraintFlag::both) {
            ++projected;
        }
    }
    out << "planner=" << to_string(run.config.kind) << " steps=" << run.steps.size()
        << " travelled_m=" << fmt(travelled) << " step_clamped=" << clamped << " safety_projected=" << projected
        << " violations=" << violations << '\n';
    if (!run.steps.empty()) {
        out << "ppa first=" << fmt(run.steps.front().ppa_before) << " last=" << fmt(run.steps.back().ppa_after)
            << '\n';
    }
    return violations;
}

}  // namespace ppaview

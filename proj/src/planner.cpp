#include "ppaview/planner.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "ppaview/csv.hpp"
#include "ppaview/ppa.hpp"
#include "ppaview/random.hpp"

namespace ppaview {

std::string to_string(PlannerKind k) {
    switch (k) {
        case PlannerKind::no_plan: return "no_plan";
        case PlannerKind::greedy: return "greedy";
        case PlannerKind::ppa_cuboid: return "ppa_cuboid";
        case PlannerKind::ppa_mesh: return "ppa_mesh";
        case PlannerKind::enum_coverage: return "enum_coverage";
        case PlannerKind::enum_chamfer: return "enum_chamfer";
    }
    return "?";
}

std::string to_string(ConstraintFlag f) {
    switch (f) {
        case ConstraintFlag::none: return "none";
        case ConstraintFlag::step_clamped: return "step_clamped";
        case ConstraintFlag::safety_projected: return "safety_projected";
        case ConstraintFlag::both: return "both";
    }
    return "?";
}

PlannerKind parse_planner_kind(const std::string& s) {
    for (auto k : {PlannerKind::no_plan, PlannerKind::greedy, PlannerKind::ppa_cuboid, PlannerKind::ppa_mesh,
                   PlannerKind::enum_coverage, PlannerKind::enum_chamfer}) {
        if (to_string(k) == s) return k;
    }
    throw ConfigError("unknown planner '" + s + "'");
}

ConstraintFlag parse_constraint_flag(const std::string& s) {
    for (auto f : {ConstraintFlag::none, ConstraintFlag::step_clamped, ConstraintFlag::safety_projected,
                   ConstraintFlag::both}) {
        if (to_string(f) == s) return f;
    }
    throw ConfigError("unknown constraint flag '" + s + "'");
}

void PlannerConfig::validate() const {
    if (!(r_safe > 0.0)) throw ConfigError("r_safe must be positive");
    if (!(t_max > 0.0)) throw ConfigError("t_max must be positive");
    if (!(delta_t > 0.0)) throw ConfigError("delta_t must be positive");
    if (max_halvings < 0) throw ConfigError("max_halvings must be non-negative");
    if (enum_samples < 1) throw ConfigError("enum_samples must be at least 1");
    try {
        cuboid.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

namespace {

ConstraintFlag combine(bool clamped, bool projected) {
    if (clamped && projected) return ConstraintFlag::both;
    if (clamped) return ConstraintFlag::step_clamped;
    if (projected) return ConstraintFlag::safety_projected;
    return ConstraintFlag::none;
}

Vec3 push_out(Vec3 q, const Vec3& current, const Vec3& actor, double r_safe, bool& projected) {
    if (q.z() < 0.0) {
        q.z() = 0.0;
        projected = true;
    }
    const Vec3 rel = q - actor;
    const double n = rel.norm();
    if (n < r_safe) {
        Vec3 dir = rel;
        if (n < 1e-12) {
            dir = current - actor;
            if (dir.norm() < 1e-12) dir = Vec3::UnitX();
        }
        q = actor + r_safe * dir.normalized();
        projected = true;
    }
    return q;
}

}  // namespace

Vec3 project_onto_active_constraints(const Vec3& position, const Vec3& gradient, const Vec3& actor,
                                     const PlannerConfig& cfg) {
    Vec3 g = gradient;
    const Vec3 rel = position - actor;
    const double dist = rel.norm();
    if (dist > 0.0 && dist <= cfg.r_safe * (1.0 + 1e-9)) {
        const Vec3 out = rel / dist;
        const double inward = g.dot(out);
        if (inward < 0.0) g -= inward * out;
    }
    if (position.z() <= 1e-12 && g.z() < 0.0) g.z() = 0.0;
    return g;
}

std::pair<Vec3, ConstraintFlag> constrain_step(const Vec3& current, const Vec3& proposed, const Vec3& actor,
                                               const PlannerConfig& cfg) {
    Vec3 d = proposed - current;
    bool clamped = false;
    const double len = d.norm();
    if (len > cfg.t_max) {
        d *= cfg.t_max / len;
        clamped = true;
    }
    bool projected = false;
    Vec3 q = push_out(current + d, current, actor, cfg.r_safe, projected);
    if ((q - current).norm() > cfg.t_max) {
        bool p0 = false;
        const Vec3 q0 = push_out(current, current, actor, cfg.r_safe, p0);
        if ((q0 - current).norm() > cfg.t_max) return {q0, ConstraintFlag::both};
        double lo = 0.0, hi = 1.0;
        for (int i = 0; i < 60; ++i) {
            const double mid = 0.5 * (lo + hi);
            bool pm = false;
            if ((push_out(current + mid * d, current, actor, cfg.r_safe, pm) - current).norm() <= cfg.t_max) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        projected = false;
        q = push_out(current + lo * d, current, actor, cfg.r_safe, projected);
        clamped = true;
    }
    return {q, combine(clamped, projected)};
}

bool satisfies_constraints(const PlanStep& s, const PlannerConfig& cfg) {
    const double step = (s.camera_after.position - s.camera_before.position).norm();
    const double dist = (s.camera_after.position - s.actor_estimate.ground_point()).norm();
    return step <= cfg.t_max + 1e-9 && dist >= cfg.r_safe - 1e-9;
}

double lookat_objective(const Vec3& position, const Vec3& target, const std::vector<Patch>& patches,
                        const FieldOfView& fov) {
    if ((target - position).norm() < 1e-12) return 0.0;
    const CameraPose cam = CameraPose::look_at(position, target);
    double sum = 0;
    for (const auto& p : patches) {
        if (is_front_facing(position, p) && fov.contains(cam, p.centroid)) sum += ppa_constrained(position, p);
    }
    return sum;
}

namespace {

std::vector<Patch> lookat_visible(const Vec3& position, const Vec3& target, const std::vector<Patch>& patches,
                                  const FieldOfView& fov) {
    std::vector<Patch> out;
    if ((target - position).norm() < 1e-12) return out;
    const CameraPose cam = CameraPose::look_at(position, target);
    for (const auto& p : patches) {
        if (is_front_facing(position, p) && fov.contains(cam, p.centroid)) out.push_back(p);
    }
    return out;
}

ConstraintFlag merge_flags(ConstraintFlag a, ConstraintFlag b) {
    auto clamped = [](ConstraintFlag f) { return f == ConstraintFlag::step_clamped || f == ConstraintFlag::both; };
    auto projected = [](ConstraintFlag f) {
        return f == ConstraintFlag::safety_projected || f == ConstraintFlag::both;
    };
    return combine(clamped(a) || clamped(b), projected(a) || projected(b));
}

// Where the ascent direction points into the safety region from its
// boundary, candidates slide along the sphere instead of leaving it.
Vec3 retract(const Vec3& candidate, const Vec3& base, const Vec3& raw_gradient, const Vec3& actor,
             const PlannerConfig& cfg, bool& slid) {
    const Vec3 rel = base - actor;
    if (rel.norm() > cfg.r_safe * (1.0 + 1e-9) || raw_gradient.dot(rel) >= 0.0) return candidate;
    const Vec3 c = candidate - actor;
    if (c.norm() < 1e-12) return candidate;
    slid = true;
    return actor + cfg.r_safe * c.normalized();
}

// Both step variants first restore feasibility (the actor may have moved
// towards the camera), then ascend from that point; a step is accepted when
// it does not lower the objective relative to the restored point.
PlanStep step_lookat(const CameraPose& camera, const std::vector<Patch>& patches, const Vec3& actor,
                     const Vec3& target, const PlannerConfig& cfg) {
    PlanStep s;
    s.camera_before = camera;
    const Vec3 p = camera.position;
    s.ppa_before = lookat_objective(p, target, patches, cfg.fov);
    const auto [base, base_flag] = constrain_step(p, p, actor, cfg);
    const double base_val = lookat_objective(base, target, patches, cfg.fov);
    const auto vis = lookat_visible(base, target, patches, cfg.fov);

    Vec3 best = base;
    double best_val = base_val;
    ConstraintFlag flag = base_flag;
    if (!vis.empty()) {
        const Vec3 raw = ppa_constrained_gradient(base, vis);
        const Vec3 g = project_onto_active_constraints(base, raw, actor, cfg);
        double scale = cfg.delta_t;
        for (int k = 0; k <= cfg.max_halvings; ++k, scale *= 0.5) {
            bool slid = false;
            const Vec3 cand = retract(base + scale * g, base, raw, actor, cfg, slid);
            const auto [q, f] = constrain_step(p, cand, actor, cfg);
            const double val = lookat_objective(q, target, patches, cfg.fov);
            if (val >= base_val) {
                best = q;
                best_val = val;
                flag = merge_flags(merge_flags(f, base_flag), slid ? ConstraintFlag::safety_projected : f);
                break;
            }
        }
    }
    s.camera_after = (target - best).norm() > 1e-12 ? CameraPose::look_at(best, target) : camera;
    s.ppa_after = best_val;
    s.constraint_active = flag;
    return s;
}

PlanStep step_free(const CameraPose& camera, const std::vector<Patch>& patches, const Vec3& actor,
                   const PlannerConfig& cfg) {
    PlanStep s;
    s.camera_before = camera;
    s.ppa_before = ppa_sum(camera, patches, cfg.fov);
    const auto [base_pos, base_flag] = constrain_step(camera.position, camera.position, actor, cfg);
    const CameraPose base{base_pos, camera.view_dir};
    const double base_val = ppa_sum(base, patches, cfg.fov);
    const auto vis = visible_patches(base, patches, cfg.fov);

    CameraPose best = base;
    double best_val = base_val;
    ConstraintFlag flag = base_flag;
    if (!vis.empty()) {
        PpaGradient g = ppa_jacobian(base, vis);
        const Vec3 raw = g.d_position;
        g.d_position = project_onto_active_constraints(base.position, raw, actor, cfg);
        double scale = cfg.delta_t;
        for (int k = 0; k <= cfg.max_halvings; ++k, scale *= 0.5) {
            bool slid = false;
            const Vec3 target_pos = retract(base.position + scale * g.d_position, base.position, raw, actor, cfg, slid);
            const auto [q, f] = constrain_step(camera.position, target_pos, actor, cfg);
            const Vec3 dir = base.view_dir + scale * g.d_view_dir;
            const CameraPose cand{q, dir.norm() > 1e-12 ? Vec3(dir.normalized()) : base.view_dir};
            const double val = ppa_sum(cand, patches, cfg.fov);
            if (val >= base_val) {
                best = cand;
                best_val = val;
                flag = merge_flags(merge_flags(f, base_flag), slid ? ConstraintFlag::safety_projected : f);
                break;
            }
        }
    }
    s.camera_after = best;
    s.ppa_after = best_val;
    s.constraint_active = flag;
    return s;
}

}  // namespace

PlanStep local_vp_step(const CameraPose& camera, const std::vector<Patch>& patches, const Vec3& actor_ground,
                       const Vec3& target, const PlannerConfig& config) {
    return config.orientation == OrientationMode::look_at ? step_lookat(camera, patches, actor_ground, target, config)
                                                          : step_free(camera, patches, actor_ground, config);
}

namespace {

std::vector<Patch> world_mesh_patches(const ActorFrame& frame, const ActorPose2D& pose) {
    std::vector<Patch> out;
    out.reserve(frame.mesh->size());
    for (std::size_t t = 0; t < frame.mesh->size(); ++t) {
        out.push_back({pose.to_world(frame.mesh->triangle_centroid(t)), pose.rotate(frame.mesh->normals()[t])});
    }
    return out;
}

Vec3 mean_centroid(const std::vector<Patch>& patches) {
    Vec3 c = Vec3::Zero();
    for (const auto& p : patches) c += p.centroid;
    return c / static_cast<double>(patches.size());
}

CameraPose aim(const Vec3& position, const Vec3& target, const Vec3& fallback_dir) {
    if ((target - position).norm() < 1e-12) return {position, fallback_dir};
    return CameraPose::look_at(position, target);
}

}  // namespace

PlanRun plan_sequence(const ActorSequence& seq, const CameraPose& initial, const PlannerConfig& config,
                      ActorEstimator& estimator, std::uint64_t seed, const ViewScorer& scorer) {
    config.validate();
    const bool enumerating = config.kind == PlannerKind::enum_coverage || config.kind == PlannerKind::enum_chamfer;
    if (enumerating && !scorer) throw ConfigError("enumeration planners need a view scorer");
    if (seq.size() == 0) throw ConfigError("empty actor sequence");

    PlanRun run;
    run.config = config;
    run.seed = seed;
    Rng rng = make_stream(seed, "planner/" + to_string(config.kind));
    std::uniform_real_distribution<double> unit(-1.0, 1.0);

    CameraPose camera = initial;
    for (std::size_t i = 0; i < seq.size(); ++i) {
        const ActorFrame& frame = seq[i];
        const ActorPose2D est = estimator.estimate(frame.timestamp, frame.pose);
        const Vec3 ground = est.ground_point();
        if (i == 0 && (initial.position - ground).norm() < config.r_safe) {
            throw ConfigError("initial camera is inside the safety region");
        }
        const auto cuboid = cuboid_patches(est, config.cuboid);
        const Vec3 cuboid_target = cuboid_center(est, config.cuboid);

        PlanStep step;
        switch (config.kind) {
            case PlannerKind::ppa_cuboid:
                step = local_vp_step(camera, cuboid, ground, cuboid_target, config);
                break;
            case PlannerKind::ppa_mesh: {
                const auto patches = world_mesh_patches(frame, est);
                step = local_vp_step(camera, patches, ground, mean_centroid(patches), config);
                break;
            }
            case PlannerKind::no_plan: {
                step.camera_before = camera;
                step.camera_after = camera;
                break;
            }
            case PlannerKind::greedy: {
                step.camera_before = camera;
                const Vec3 to_actor = ground - camera.position;
                const double dist = to_actor.norm();
                const double advance = std::clamp(dist - config.r_safe, 0.0, config.t_max);
                const Vec3 proposed = dist > 0 ? Vec3(camera.position + advance * to_actor / dist) : camera.position;
                const auto [q, f] = constrain_step(camera.position, proposed, ground, config);
                step.camera_after = aim(q, cuboid_target, camera.view_dir);
                step.constraint_active = f;
                break;
            }
            case PlannerKind::enum_coverage:
            case PlannerKind::enum_chamfer: {
                step.camera_before = camera;
                const auto [stay, f0] = constrain_step(camera.position, camera.position, ground, config);
                CameraPose best = aim(stay, cuboid_target, camera.view_dir);
                double best_score = scorer(best, frame);
                ConstraintFlag best_flag = f0;
                int drawn = 0;
                for (int attempt = 0; drawn < config.enum_samples && attempt < 100 * config.enum_samples;
                     ++attempt) {
                    const Vec3 offset(unit(rng), unit(rng), unit(rng));
                    if (offset.squaredNorm() > 1.0) continue;
                    const Vec3 q = camera.position + config.t_max * offset;
                    if (q.z() < 0.0 || (q - ground).norm() < config.r_safe) continue;
                    ++drawn;
                    const CameraPose cand = aim(q, cuboid_target, camera.view_dir);
                    const double score = scorer(cand, frame);
                    if (score > best_score) {
                        best = cand;
                        best_score = score;
                        best_flag = ConstraintFlag::none;
                    }
                }
                step.camera_after = best;
                step.constraint_active = best_flag;
                break;
            }
        }
        if (config.kind != PlannerKind::ppa_cuboid && config.kind != PlannerKind::ppa_mesh) {
            step.ppa_before = lookat_objective(step.camera_before.position, cuboid_target, cuboid, config.fov);
            step.ppa_after = lookat_objective(step.camera_after.position, cuboid_target, cuboid, config.fov);
        }
        step.frame_index = i;
        step.timestamp = frame.timestamp;
        step.actor_estimate = est;
        run.steps.push_back(step);
        camera = step.camera_after;
    }
    return run;
}

void write_plan_csv(const PlanRun& run, std::ostream& out) {
    out << "# planner=" << to_string(run.config.kind) << " r_safe_m=" << format_param(run.config.r_safe)
        << " t_max_m=" << format_param(run.config.t_max) << " delta_t=" << format_param(run.config.delta_t)
        << " seed=" << run.seed << '\n';
    out << "frame,t_s,actor_x_m,actor_y_m,actor_yaw_rad,"
           "before_x_m,before_y_m,before_z_m,before_dx,before_dy,before_dz,"
           "after_x_m,after_y_m,after_z_m,after_dx,after_dy,after_dz,"
           "ppa_before,ppa_after,constraint\n";
    for (const auto& s : run.steps) {
        CsvRow row;
        row << static_cast<unsigned long>(s.frame_index) << s.timestamp << s.actor_estimate.x << s.actor_estimate.y
            << s.actor_estimate.yaw;
        for (const CameraPose* c : {&s.camera_before, &s.camera_after}) {
            row << c->position.x() << c->position.y() << c->position.z() << c->view_dir.x() << c->view_dir.y()
                << c->view_dir.z();
        }
        row << s.ppa_before << s.ppa_after << to_string(s.constraint_active);
        out << row.str() << '\n';
    }
}

PlanRun read_plan_csv(std::istream& in) {
    PlanRun run;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream ls(line.substr(1));
            std::string kv;
            while (ls >> kv) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos) continue;
                const std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
                if (key == "planner") run.config.kind = parse_planner_kind(val);
                if (key == "r_safe_m") run.config.r_safe = std::stod(val);
                if (key == "t_max_m") run.config.t_max = std::stod(val);
                if (key == "delta_t") run.config.delta_t = std::stod(val);
                if (key == "seed") run.seed = std::stoull(val);
            }
            continue;
        }
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        const auto c = split_csv_line(line);
        if (c.size() != 20) throw ConfigError("plan CSV row has " + std::to_string(c.size()) + " columns");
        auto d = [&](std::size_t i) { return std::stod(c[i]); };
        PlanStep s;
        s.frame_index = std::stoul(c[0]);
        s.timestamp = d(1);
        s.actor_estimate = ActorPose2D(d(2), d(3), d(4));
        s.camera_before = {{d(5), d(6), d(7)}, {d(8), d(9), d(10)}};
        s.camera_after = {{d(11), d(12), d(13)}, {d(14), d(15), d(16)}};
        s.ppa_before = d(17);
        s.ppa_after = d(18);
        s.constraint_active = parse_constraint_flag(c[19]);
        run.steps.push_back(s);
    }
    return run;
}

}  // namespace ppaview

#pragma once

#include <cstdint>
#include <functional>
#include <istream>
#include <ostream>
#include <string>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ppaview/actor_model.hpp"
#include "ppaview/geometry.hpp"
#include "ppaview/tracking.hpp"

namespace ppaview {

enum class PlannerKind { no_plan, greedy, ppa_cuboid, ppa_mesh, enum_coverage, enum_chamfer };
enum class OrientationMode { look_at, free };
enum class ConstraintFlag { none, step_clamped, safety_projected, both };

std::string to_string(PlannerKind k);
std::string to_string(ConstraintFlag f);
PlannerKind parse_planner_kind(const std::string& s);
ConstraintFlag parse_constraint_flag(const std::string& s);

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct PlannerConfig {
    double r_safe{8.0};
    double t_max{1.0};
    double delta_t{0.5};
    int max_halvings{8};
    PlannerKind kind{PlannerKind::ppa_cuboid};
    OrientationMode orientation{OrientationMode::look_at};
    int enum_samples{64};
    CuboidSpec cuboid;
    FieldOfView fov;

    void validate() const;
};

struct PlanStep {
    std::size_t frame_index{0};
    double timestamp{0};
    ActorPose2D actor_estimate;
    CameraPose camera_before;
    CameraPose camera_after;
    double ppa_before{0};
    double ppa_after{0};
    ConstraintFlag constraint_active{ConstraintFlag::none};
};

struct PlanRun {
    PlannerConfig config;
    std::vector<PlanStep> steps;
    std::uint64_t seed{0};
};

/// Clamps the displacement to t_max, then pushes the point out of the safety
/// hemisphere (radius r_safe about `actor_ground`, z >= 0) along the ray from
/// its center. If the push breaks the step bound, the step is shortened
/// until both hold; when the actor moved so far that no such point exists,
/// safety wins.
std::pair<Vec3, ConstraintFlag> constrain_step(const Vec3& current, const Vec3& proposed, const Vec3& actor_ground,
                                               const PlannerConfig& config);

/// Drops the gradient component pointing into the safety region (when the
/// camera sits on its boundary) or below the ground (when z = 0).
Vec3 project_onto_active_constraints(const Vec3& position, const Vec3& gradient, const Vec3& actor_ground,
                                     const PlannerConfig& config);

bool satisfies_constraints(const PlanStep& step, const PlannerConfig& config);

/// Sum of look-at PPA over patches that face `position` and fall inside the
/// frustum of a camera aimed at `target`.
double lookat_objective(const Vec3& position, const Vec3& target, const std::vector<Patch>& patches,
                        const FieldOfView& fov);

/// One gradient-ascent step with backtracking. In look-at mode the position
/// follows the look-at PPA gradient and the view is re-aimed at `target`; in
/// free mode position and view direction both follow the free PPA gradient.
PlanStep local_vp_step(const CameraPose& camera, const std::vector<Patch>& patches, const Vec3& actor_ground,
                       const Vec3& target, const PlannerConfig& config);

/// Scores a candidate view of the given frame; higher is better.
using ViewScorer = std::function<double(const CameraPose&, const ActorFrame&)>;

/// Runs the configured planner over every frame of `seq`. Enumeration
/// planners require `scorer`.
PlanRun plan_sequence(const ActorSequence& seq, const CameraPose& initial, const PlannerConfig& config,
                      ActorEstimator& estimator, std::uint64_t seed, const ViewScorer& scorer = {});

void write_plan_csv(const PlanRun& run, std::ostream& out);
/// Reads the steps back (config fields other than kind, r_safe and t_max
/// keep their defaults).
PlanRun read_plan_csv(std::istream& in);

}  // namespace ppaview

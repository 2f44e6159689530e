#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include "ppaview/actor_model.hpp"
#include "ppaview/camera.hpp"
#include "ppaview/planner.hpp"
#include "ppaview/reconstruction.hpp"

namespace ppaview {

struct TimedPose {
    double t{0};
    ActorPose2D pose;
};

/// Straight or curving walk at constant speed and turn rate.
struct WalkSpec {
    int frames{50};
    double dt{0.2};
    double speed{1.0};
    double turn_rate{0.0};
    ActorPose2D start;
};

std::vector<TimedPose> generate_walk(const WalkSpec& walk);

enum class EstimatorKind { ground_truth, noisy, kalman };

struct Scenario {
    std::string mesh_path{"builtin:humanoid"};  // or a path relative to base_dir
    NormalOrientation mesh_normals{NormalOrientation::outward};
    std::vector<TimedPose> poses;
    CuboidSpec cuboid;
    CameraIntrinsics intrinsics;
    PlannerConfig planner;
    Vec3 camera_start{12.0, 0.0, 2.0};

    double noise_pos_std{0.5};
    double noise_yaw_std{0.5};
    EstimatorKind noisy_estimator{EstimatorKind::kalman};
    double kf_accel_noise{1.0};
    std::uint64_t seed{0};

    int merge_window{3};
    double voxel{0.01};
    bool merge_use_icp{false};
    IcpParams icp;
    double prism_height{0.01};
    std::size_t gt_samples{20000};

    SphereSampling sphere;

    double tour_c_threshold{0.05};
    int tour_samples{64};
    bool tour_use_mesh{false};

    std::filesystem::path base_dir{"."};

    /// Throws ConfigError on any inconsistent setting.
    void validate() const;
    /// Replaces the intrinsics and the planner's field of view with them.
    void set_intrinsics(const CameraIntrinsics& intr);
    MeshRef load_actor_mesh() const;
    ActorSequence build_sequence() const;
    ActorSequence build_sequence(const MeshRef& mesh) const;
};

/// Flat `key = value` lines; `#` starts a comment. Unknown keys are errors.
Scenario parse_scenario(std::istream& in, const std::filesystem::path& base_dir = ".");
Scenario load_scenario(const std::filesystem::path& path);

}  // namespace ppaview

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "ppaview/actor_model.hpp"
#include "ppaview/camera.hpp"
#include "ppaview/random.hpp"

namespace ppaview {

class NoIntersectionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Pixel-edge bounds: a mask spanning columns [c0, c1] has u_min = c0 and
/// u_max = c1 + 1.
struct BoundingBox {
    double u_min{0}, v_min{0}, u_max{0}, v_max{0};

    void validate(const CameraIntrinsics& intr) const;
};

/// Tight box around all foreground pixels; empty when nothing is visible.
std::optional<BoundingBox> bbox_from_view(const RenderedView& view);

/// Intersects the ray through the bottom-edge midpoint with the ground z = 0.
/// That ray grazes the near side of the actor's footprint, so the hit is
/// moved `footprint_radius` further along the horizontal viewing direction.
Vec2 localize_from_bbox(const BoundingBox& bbox, const CameraPose& pose, const CameraIntrinsics& intr,
                        double footprint_radius = 0.0);

/// Mean horizontal distance from the local origin of the mesh vertices
/// within 1 cm of its lowest point.
double footprint_radius(const TriangleMesh& local_mesh);

struct KalmanState {
    Eigen::Vector4d mean{Eigen::Vector4d::Zero()};  // x, y, vx, vy
    Eigen::Matrix4d covariance{Eigen::Matrix4d::Identity()};
};

/// Constant-velocity prediction with piecewise-constant acceleration noise
/// of variance `accel_noise`.
KalmanState kf_predict(const KalmanState& state, double dt, double accel_noise);
/// Position-only update with isotropic measurement variance `meas_noise`.
KalmanState kf_update(const KalmanState& state, const Vec2& measurement, double meas_noise);

struct HeadingEstimate {
    enum class Quality { oracle, noisy };
    double yaw{0};
    Quality quality{Quality::oracle};
};

HeadingEstimate heading_oracle(const ActorPose2D& true_pose, double noise_std, Rng& rng);
HeadingEstimate heading_oracle(const ActorPose2D& true_pose, double noise_std, std::uint64_t seed);

struct TrackSample {
    double t{0};
    ActorPose2D truth;
    ActorPose2D measured;
    ActorPose2D filtered;
};

/// Source of the actor pose the planner sees each frame.
class ActorEstimator {
public:
    virtual ~ActorEstimator() = default;
    virtual ActorPose2D estimate(double t, const ActorPose2D& truth) = 0;
    const std::vector<TrackSample>& trace() const { return trace_; }

protected:
    std::vector<TrackSample> trace_;
};

class GroundTruthEstimator final : public ActorEstimator {
public:
    ActorPose2D estimate(double t, const ActorPose2D& truth) override;
};

/// Truth plus independent Gaussian noise on position and yaw every frame.
class NoisyEstimator final : public ActorEstimator {
public:
    NoisyEstimator(double pos_std, double yaw_std, std::uint64_t seed);
    ActorPose2D estimate(double t, const ActorPose2D& truth) override;

private:
    double pos_std_, yaw_std_;
    Rng rng_;
};

/// Noisy position measurements smoothed by the constant-velocity filter;
/// yaw from the noisy heading oracle.
class KalmanEstimator final : public ActorEstimator {
public:
    struct Params {
        double pos_std{0.5};
        double yaw_std{0.5};
        double accel_noise{1.0};     // (m/s^2)^2
        double initial_speed_std{1.0};
    };
    KalmanEstimator(const Params& params, std::uint64_t seed);
    ActorPose2D estimate(double t, const ActorPose2D& truth) override;

private:
    Params params_;
    Rng rng_;
    std::optional<KalmanState> state_;
    double last_t_{0};
};

void write_track_csv(const std::vector<TrackSample>& trace, std::ostream& out);

}  // namespace ppaview

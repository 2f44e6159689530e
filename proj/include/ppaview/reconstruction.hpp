#pragma once

#include <ostream>
#include <stdexcept>
#include <vector>

#include "ppaview/camera.hpp"
#include "ppaview/geometry.hpp"

namespace ppaview {

class DegenerateCorrespondenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RigidTransform {
    Mat3 rotation{Mat3::Identity()};
    Vec3 translation{Vec3::Zero()};

    static RigidTransform identity() { return {}; }
    Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
    PointCloud apply(const PointCloud& cloud) const;
    RigidTransform inverse() const { return {rotation.transpose(), -(rotation.transpose() * translation)}; }
    /// (*this) after `first`.
    RigidTransform compose(const RigidTransform& first) const {
        return {rotation * first.rotation, rotation * first.translation + translation};
    }
};

/// Closed-form least-squares rigid fit (SVD) mapping `src[i]` onto `dst[i]`.
RigidTransform fit_rigid(const std::vector<Vec3>& src, const std::vector<Vec3>& dst);

struct IcpParams {
    int max_iters{50};
    double corr_dist{0.1};
    double tol{1e-6};
};

struct IcpResult {
    RigidTransform transform;  // source -> target
    int iterations{0};
    double final_rmse{0};
    bool converged{false};
    std::vector<double> rmse_history;  // one entry per correspondence pass
};

/// Point-to-point ICP. Each pass matches source points to their nearest
/// target point within corr_dist and refits the transform. A pass whose RMSE
/// would exceed the previous one is rolled back, so rmse_history never
/// increases. Throws DegenerateCorrespondenceError below 3 matches.
IcpResult icp_align(const PointCloud& source, const PointCloud& target, const IcpParams& params = {});
IcpResult icp_align(const PointCloud& source, const PointCloud& target, int max_iters, double corr_dist, double tol);

/// Centroid of the points in each occupied voxel, ordered by voxel index.
PointCloud voxel_downsample(const PointCloud& cloud, double voxel);

/// Camera-frame (right, up, forward) cloud plus the pose it was taken from.
struct CameraFrame {
    PointCloud cloud;
    CameraPose pose;
};

PointCloud to_camera_frame(const PointCloud& world, const CameraPose& pose);
PointCloud to_world_frame(const PointCloud& camera, const CameraPose& pose);

/// Places every frame in the world, optionally refines frames 1.. against
/// frame 0 by ICP, concatenates and voxel-downsamples. Accepts 2 to 5 frames.
PointCloud merge_frames(const std::vector<CameraFrame>& frames, bool use_icp, double voxel,
                        const IcpParams& icp = {}, std::vector<IcpResult>* icp_log = nullptr);

void write_icp_csv(const std::vector<IcpResult>& results, std::ostream& out);

}  // namespace ppaview

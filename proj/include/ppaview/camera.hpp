#pragma once

#include <filesystem>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "ppaview/actor_model.hpp"
#include "ppaview/geometry.hpp"

namespace ppaview {

/// Pinhole intrinsics with square pixels and the principal point at the
/// image center. Pixel (i, j) has its center at (i + 0.5, j + 0.5).
struct CameraIntrinsics {
    int width{320};
    int height{240};
    double fov_horizontal_deg{90.0};

    CameraIntrinsics() = default;
    CameraIntrinsics(int w, int h, double fov_deg = 90.0);

    double focal() const;
    double cx() const { return width / 2.0; }
    double cy() const { return height / 2.0; }
    FieldOfView field_of_view() const;
};

struct PointCloud {
    std::vector<Vec3> points;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
};

/// Depth is the z-depth along the optical axis (+inf for background).
/// Triangle ids are -1 for background.
struct RenderedView {
    using DepthImage = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    using IdImage = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

    DepthImage depth;        // rows = height, cols = width
    IdImage triangle_id;
    CameraPose pose;
    CameraIntrinsics intrinsics;

    std::size_t foreground_pixels() const;
};

/// Projects a world point; returns (u, v, z) with z the optical-axis depth.
/// Empty when the point is not in front of the camera.
std::optional<Vec3> project(const CameraPose& pose, const CameraIntrinsics& intr, const Vec3& world);
/// Unit-z ray (z component 1 in camera coordinates) through continuous
/// pixel coordinates, expressed in world axes.
Vec3 pixel_ray(const CameraPose& pose, const CameraIntrinsics& intr, double u, double v);
Vec3 backproject_pixel(const CameraPose& pose, const CameraIntrinsics& intr, double u, double v, double depth);

/// Z-buffered rasterization of all triangles (two-sided), near-plane clipped.
/// At equal depth the lower triangle index wins.
RenderedView render(const TriangleMesh& mesh, const CameraPose& pose, const CameraIntrinsics& intr);

/// One world point per foreground pixel, row-major order.
PointCloud backproject(const RenderedView& view);
/// Same, optionally keeping the source triangle id of every point.
PointCloud backproject(const RenderedView& view, std::vector<int>* triangle_ids);

/// Pixel counts per triangle id (size = triangle_count).
std::vector<int> pixels_per_triangle_id(const RenderedView& view, std::size_t triangle_count);

struct SphereSampling {
    std::vector<double> radii{8.0};
    int polar_steps{1};
    int azimuth_steps{8};
    /// Polar angle range measured from +z; midpoints of `polar_steps` equal
    /// bins are used.
    double polar_min_rad{0.0};
    double polar_max_rad{kPi / 2};
};

/// Poses on a (radius, polar, azimuth) grid around `target`, each looking at
/// it, restricted to z >= target.z.
std::vector<CameraPose> sample_view_sphere(const Vec3& target, const SphereSampling& sampling);
std::vector<CameraPose> sample_view_sphere(const Vec3& target, const std::vector<double>& radii,
                                           int polar_steps, int azimuth_steps);

void write_ply(const PointCloud& cloud, const std::filesystem::path& path);
PointCloud read_ply_points(const std::filesystem::path& path);
/// 16-bit binary PGM with millimeter depth; background and overflow are 0.
void write_depth_pgm(const RenderedView& view, const std::filesystem::path& path);

}  // namespace ppaview

#pragma once

#include <array>
#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "ppaview/geometry.hpp"

namespace ppaview {

class MeshLoadError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Ground-plane actor pose. `yaw` is kept in (-pi, pi].
struct ActorPose2D {
    double x{0};
    double y{0};
    double yaw{0};

    ActorPose2D() = default;
    ActorPose2D(double x_, double y_, double yaw_) : x(x_), y(y_), yaw(wrap_angle(yaw_)) {}

    Vec2 position() const { return {x, y}; }
    Vec3 ground_point() const { return {x, y, 0.0}; }
    Vec3 heading() const { return {std::cos(yaw), std::sin(yaw), 0.0}; }

    /// Actor-local point (x forward, y left, z up) to world.
    Vec3 to_world(const Vec3& local) const;
    Vec3 rotate(const Vec3& local_dir) const;
    /// World point to actor-local.
    Vec3 to_local(const Vec3& world) const;
};

/// Cuboid actor primitive. Width is lateral, depth runs along the heading.
struct CuboidSpec {
    double width{0.6};
    double depth{0.4};
    double height{1.8};

    void validate() const;
};

enum class NormalOrientation { outward, as_stored };

/// Indexed triangle mesh with per-triangle unit normals that always agree
/// with the winding (normal = normalized (b - a) x (c - a)).
class TriangleMesh {
public:
    using Triangle = std::array<int, 3>;

    TriangleMesh() = default;
    /// Validates indices and non-degeneracy; throws MeshLoadError on failure.
    TriangleMesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles);

    const std::vector<Vec3>& vertices() const { return vertices_; }
    const std::vector<Triangle>& triangles() const { return triangles_; }
    const std::vector<Vec3>& normals() const { return normals_; }
    std::size_t size() const { return triangles_.size(); }
    bool empty() const { return triangles_.empty(); }

    const Vec3& vertex(std::size_t tri, int corner) const {
        return vertices_[static_cast<std::size_t>(triangles_[tri][static_cast<std::size_t>(corner)])];
    }
    Vec3 triangle_centroid(std::size_t tri) const;
    double triangle_area(std::size_t tri) const;
    /// Mean of all vertices.
    Vec3 vertex_centroid() const;

    /// Reverses winding of every triangle whose normal points toward the
    /// vertex centroid.
    TriangleMesh oriented_outward() const;
    /// Applies a ground-plane rigid motion (actor-local to world).
    TriangleMesh transformed(const ActorPose2D& pose) const;

private:
    std::vector<Vec3> vertices_;
    std::vector<Triangle> triangles_;
    std::vector<Vec3> normals_;
};

using MeshRef = std::shared_ptr<const TriangleMesh>;

/// Reads ASCII OBJ (`v`/`f` records) or ASCII PLY, dispatching on extension.
TriangleMesh load_mesh(const std::filesystem::path& path,
                       NormalOrientation orientation = NormalOrientation::outward);
void save_obj(const TriangleMesh& mesh, const std::filesystem::path& path);

std::vector<Patch> mesh_to_patches(const TriangleMesh& mesh);

/// Five faces of the cuboid in the order front, back, left, right, top.
std::array<Patch, 5> build_cuboid(const ActorPose2D& pose, const CuboidSpec& spec);
std::vector<Patch> cuboid_patches(const ActorPose2D& pose, const CuboidSpec& spec);
/// Volumetric center of the cuboid.
Vec3 cuboid_center(const ActorPose2D& pose, const CuboidSpec& spec);

struct ActorFrame {
    double timestamp{0};
    ActorPose2D pose;
    MeshRef mesh;  // actor-local geometry
};

class ActorSequence {
public:
    ActorSequence() = default;
    /// Throws std::invalid_argument unless timestamps strictly increase.
    explicit ActorSequence(std::vector<ActorFrame> frames);

    const std::vector<ActorFrame>& frames() const { return frames_; }
    std::size_t size() const { return frames_.size(); }
    const ActorFrame& operator[](std::size_t i) const { return frames_[i]; }

    /// Zero-order hold: the last frame whose timestamp is <= t.
    /// Throws std::out_of_range outside [first, last].
    const ActorFrame& pose_at(double t) const;

private:
    std::vector<ActorFrame> frames_;
};

/// Proportions of the procedural humanoid. Defaults give a ~1.75 m figure
/// standing at the origin, facing +x, with both feet close to the center.
struct HumanoidParams {
    int radial_segments{16};
    int limb_rings{8};
    double arm_swing_rad{0.0};
    double leg_swing_rad{0.0};
};

/// Union of closed, outward-wound primitive surfaces (torso, head, limbs).
TriangleMesh make_humanoid_mesh(const HumanoidParams& params = {});

}  // namespace ppaview

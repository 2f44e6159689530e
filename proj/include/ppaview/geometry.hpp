#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace ppaview {

template <typename Scalar>
using Vec3T = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Vec2T = Eigen::Matrix<Scalar, 2, 1>;

using Vec3 = Vec3T<double>;
using Vec2 = Vec2T<double>;
using Mat3 = Eigen::Matrix3d;

/// Raised when a geometric quantity is evaluated outside its domain
/// (zero distance, degenerate direction).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Oriented planar surface element: centroid plus unit normal.
template <typename Scalar>
struct PatchT {
    Vec3T<Scalar> centroid{Vec3T<Scalar>::Zero()};
    Vec3T<Scalar> normal{Vec3T<Scalar>::UnitZ()};
};
using Patch = PatchT<double>;

/// Camera position plus the unit direction it looks along.
template <typename Scalar>
struct CameraPoseT {
    Vec3T<Scalar> position{Vec3T<Scalar>::Zero()};
    Vec3T<Scalar> view_dir{Vec3T<Scalar>::UnitX()};

    static CameraPoseT look_at(const Vec3T<Scalar>& position, const Vec3T<Scalar>& target) {
        const Vec3T<Scalar> d = target - position;
        const Scalar n = d.norm();
        if (!(n > Scalar(0))) {
            throw DomainError("look_at: camera coincides with its target");
        }
        return {position, d / n};
    }
};
using CameraPose = CameraPoseT<double>;

/// Orthonormal camera frame. `forward` is the view direction, `up` is world +z
/// projected into the image plane (world +x when looking straight up or down),
/// and `right = forward x up`.
template <typename Scalar>
struct CameraBasisT {
    Vec3T<Scalar> right;
    Vec3T<Scalar> up;
    Vec3T<Scalar> forward;

    Vec3T<Scalar> to_camera(const Vec3T<Scalar>& v) const {
        return {right.dot(v), up.dot(v), forward.dot(v)};
    }
    Vec3T<Scalar> to_world(const Vec3T<Scalar>& c) const {
        return right * c.x() + up * c.y() + forward * c.z();
    }
};
using CameraBasis = CameraBasisT<double>;

template <typename Scalar>
CameraBasisT<Scalar> camera_basis(const Vec3T<Scalar>& view_dir) {
    const Vec3T<Scalar> f = view_dir.normalized();
    Vec3T<Scalar> up = Vec3T<Scalar>::UnitZ() - f * f.z();
    if (up.norm() < Scalar(1e-9)) {
        up = Vec3T<Scalar>::UnitX() - f * f.x();
    }
    up.normalize();
    return {f.cross(up), up, f};
}

/// Symmetric pinhole field of view, stored as half-angle tangents.
template <typename Scalar>
struct FieldOfViewT {
    Scalar tan_half_horizontal{1};
    Scalar tan_half_vertical{Scalar(0.75)};

    static FieldOfViewT from_horizontal(Scalar fov_horizontal_rad, Scalar aspect_w_over_h) {
        const Scalar th = std::tan(fov_horizontal_rad / 2);
        return {th, th / aspect_w_over_h};
    }

    bool contains(const CameraPoseT<Scalar>& camera, const Vec3T<Scalar>& point) const {
        const Vec3T<Scalar> c = camera_basis(camera.view_dir).to_camera(point - camera.position);
        if (!(c.z() > Scalar(0))) {
            return false;
        }
        return std::abs(c.x()) <= tan_half_horizontal * c.z() &&
               std::abs(c.y()) <= tan_half_vertical * c.z();
    }
};
using FieldOfView = FieldOfViewT<double>;

inline constexpr double kPi = 3.14159265358979323846;

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
    a = std::remainder(a, 2.0 * kPi);
    if (a <= -kPi) {
        a += 2.0 * kPi;
    }
    return a;
}

inline double deg_to_rad(double d) { return d * kPi / 180.0; }

}  // namespace ppaview

#pragma once

// Pixels-per-area (PPA) view-quality proxy and its analytic gradients.
//
// For a camera (p_d, n_d) and a patch (p_j, n_j):
//
//     ppa = cos(alpha) / d,   cos(alpha) = |n_d . n_j|,   d = |p_d - p_j|
//
// The absolute value matters: a camera looking at a front-facing patch has
// n_d . n_j < 0. Every term below works with the sign-corrected normal
// n~_j = sign(n_d . n_j) n_j so the position gradient pulls the camera toward
// patches it sees head-on rather than away from them.
//
// The constrained form slaves the view direction to point at the patch, which
// reduces PPA to a function of camera position alone:
//
//     ppa_c = ((p_d - p_j) . n_j) / |p_d - p_j|^2
//
// Its level sets {ppa_c = 1/t} are spheres of diameter t tangent to the patch
// plane at p_j, centered at p_j + n_j t / 2.

#include <vector>

#include "ppaview/geometry.hpp"

namespace ppaview {

template <typename Scalar>
struct PpaGradientT {
    Vec3T<Scalar> d_position{Vec3T<Scalar>::Zero()};
    Vec3T<Scalar> d_view_dir{Vec3T<Scalar>::Zero()};  // tangent to the sphere at view_dir
};
using PpaGradient = PpaGradientT<double>;

template <typename Scalar>
bool is_front_facing(const Vec3T<Scalar>& camera_pos, const PatchT<Scalar>& patch) {
    return (camera_pos - patch.centroid).dot(patch.normal) > Scalar(0);
}

/// Front-facing patches whose centroid lies inside the view frustum. There
/// is no occlusion test.
template <typename Scalar>
std::vector<PatchT<Scalar>> visible_patches(const CameraPoseT<Scalar>& camera,
                                            const std::vector<PatchT<Scalar>>& patches,
                                            const FieldOfViewT<Scalar>& fov = {}) {
    std::vector<PatchT<Scalar>> out;
    for (const auto& p : patches) {
        if (is_front_facing(camera.position, p) && fov.contains(camera, p.centroid)) {
            out.push_back(p);
        }
    }
    return out;
}

template <typename Scalar>
Scalar ppa_value(const CameraPoseT<Scalar>& camera, const PatchT<Scalar>& patch) {
    const Scalar d = (camera.position - patch.centroid).norm();
    if (!(d > Scalar(0))) {
        throw DomainError("ppa_value: camera at the patch centroid");
    }
    return std::abs(camera.view_dir.dot(patch.normal)) / d;
}

/// Sum of PPA over the visible subset of `patches`; 0 when none are visible.
template <typename Scalar>
Scalar ppa_sum(const CameraPoseT<Scalar>& camera, const std::vector<PatchT<Scalar>>& patches,
               const FieldOfViewT<Scalar>& fov = {}) {
    Scalar sum(0);
    for (const auto& p : patches) {
        if (is_front_facing(camera.position, p) && fov.contains(camera, p.centroid)) {
            sum += ppa_value(camera, p);
        }
    }
    return sum;
}

/// Gradient of sum_j ppa over exactly the given patches (the caller filters
/// visibility).
template <typename Scalar>
PpaGradientT<Scalar> ppa_jacobian(const CameraPoseT<Scalar>& camera,
                                  const std::vector<PatchT<Scalar>>& patches) {
    PpaGradientT<Scalar> g;
    const Vec3T<Scalar>& nd = camera.view_dir;
    for (const auto& p : patches) {
        const Vec3T<Scalar> r = camera.position - p.centroid;
        const Scalar d = r.norm();
        if (!(d > Scalar(0))) {
            throw DomainError("ppa_jacobian: camera at a patch centroid");
        }
        const Scalar raw = nd.dot(p.normal);
        const Vec3T<Scalar> n_corr = raw < Scalar(0) ? Vec3T<Scalar>(-p.normal) : p.normal;
        const Scalar cos_a = std::abs(raw);
        g.d_position -= (cos_a / (d * d * d)) * r;
        g.d_view_dir += (n_corr - nd.dot(n_corr) * nd) / d;
    }
    return g;
}

/// PPA with the view direction aimed at the patch centroid.
template <typename Scalar>
Scalar ppa_constrained(const Vec3T<Scalar>& camera_pos, const PatchT<Scalar>& patch) {
    const Vec3T<Scalar> r = camera_pos - patch.centroid;
    const Scalar d2 = r.squaredNorm();
    if (!(d2 > Scalar(0))) {
        throw DomainError("ppa_constrained: camera at the patch centroid");
    }
    return r.dot(patch.normal) / d2;
}

template <typename Scalar>
Scalar ppa_constrained_sum(const Vec3T<Scalar>& camera_pos, const std::vector<PatchT<Scalar>>& patches) {
    Scalar sum(0);
    for (const auto& p : patches) sum += ppa_constrained(camera_pos, p);
    return sum;
}

/// Position gradient of sum_j ppa_constrained:
///   sum_j [n_j d_j - 2 cos(alpha_j) (p_d - p_j)] / d_j^3.
/// Each term has magnitude 1/d_j^2 and points at the center of the level-set
/// sphere through p_d.
template <typename Scalar>
Vec3T<Scalar> ppa_constrained_gradient(const Vec3T<Scalar>& camera_pos,
                                       const std::vector<PatchT<Scalar>>& patches) {
    Vec3T<Scalar> g = Vec3T<Scalar>::Zero();
    for (const auto& p : patches) {
        const Vec3T<Scalar> r = camera_pos - p.centroid;
        const Scalar d = r.norm();
        if (!(d > Scalar(0))) {
            throw DomainError("ppa_constrained_gradient: camera at a patch centroid");
        }
        const Scalar cos_a = r.dot(p.normal) / d;
        g += (p.normal * d - Scalar(2) * cos_a * r) / (d * d * d);
    }
    return g;
}

}  // namespace ppaview

#include "ppaview/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ppaview/csv.hpp"

namespace ppaview {

void BoundingBox::validate(const CameraIntrinsics& intr) const {
    if (!(u_min < u_max) || !(v_min < v_max)) throw std::invalid_argument("bounding box is empty");
    if (u_min < 0 || v_min < 0 || u_max > intr.width || v_max > intr.height) {
        throw std::invalid_argument("bounding box outside the image");
    }
}

std::optional<BoundingBox> bbox_from_view(const RenderedView& view) {
    int c0 = view.intrinsics.width, c1 = -1, r0 = view.intrinsics.height, r1 = -1;
    for (int j = 0; j < view.intrinsics.height; ++j) {
        for (int i = 0; i < view.intrinsics.width; ++i) {
            if (view.triangle_id(j, i) < 0) continue;
            c0 = std::min(c0, i);
            c1 = std::max(c1, i);
            r0 = std::min(r0, j);
            r1 = std::max(r1, j);
        }
    }
    if (c1 < 0) return std::nullopt;
    return BoundingBox{static_cast<double>(c0), static_cast<double>(r0), static_cast<double>(c1 + 1),
                       static_cast<double>(r1 + 1)};
}

Vec2 localize_from_bbox(const BoundingBox& bbox, const CameraPose& pose, const CameraIntrinsics& intr,
                        double footprint_radius) {
    bbox.validate(intr);
    if (footprint_radius < 0.0) throw std::invalid_argument("footprint radius must be non-negative");
    const Vec3 ray = pixel_ray(pose, intr, 0.5 * (bbox.u_min + bbox.u_max), bbox.v_max);
    if (!(ray.z() < -1e-12) || !(pose.position.z() > 0.0)) {
        throw NoIntersectionError("bottom-edge ray does not hit the ground in front of the camera");
    }
    const double t = -pose.position.z() / ray.z();
    const Vec3 hit = pose.position + t * ray;
    Vec2 ground(hit.x(), hit.y());
    const Vec2 away(ray.x(), ray.y());
    if (away.norm() > 1e-12) ground += footprint_radius * away.normalized();
    return ground;
}

double footprint_radius(const TriangleMesh& local_mesh) {
    if (local_mesh.vertices().empty()) throw std::invalid_argument("footprint_radius: empty mesh");
    double z0 = std::numeric_limits<double>::infinity();
    for (const auto& v : local_mesh.vertices()) z0 = std::min(z0, v.z());
    double sum = 0;
    int n = 0;
    for (const auto& v : local_mesh.vertices()) {
        if (v.z() > z0 + 0.01) continue;
        sum += std::hypot(v.x(), v.y());
        ++n;
    }
    return sum / n;
}

KalmanState kf_predict(const KalmanState& s, double dt, double accel_noise) {
    if (!(dt > 0.0)) throw std::invalid_argument("kf_predict: dt must be positive");
    Eigen::Matrix4d F = Eigen::Matrix4d::Identity();
    F(0, 2) = dt;
    F(1, 3) = dt;
    const double dt2 = dt * dt, dt3 = dt2 * dt, dt4 = dt3 * dt;
    Eigen::Matrix4d Q = Eigen::Matrix4d::Zero();
    Q(0, 0) = Q(1, 1) = dt4 / 4;
    Q(0, 2) = Q(2, 0) = Q(1, 3) = Q(3, 1) = dt3 / 2;
    Q(2, 2) = Q(3, 3) = dt2;
    KalmanState out;
    out.mean = F * s.mean;
    out.covariance = F * s.covariance * F.transpose() + accel_noise * Q;
    out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
    return out;
}

KalmanState kf_update(const KalmanState& s, const Vec2& z, double meas_noise) {
    if (!(meas_noise > 0.0)) throw std::invalid_argument("kf_update: measurement noise must be positive");
    Eigen::Matrix<double, 2, 4> H = Eigen::Matrix<double, 2, 4>::Zero();
    H(0, 0) = H(1, 1) = 1.0;
    const Eigen::Matrix2d R = meas_noise * Eigen::Matrix2d::Identity();
    const Eigen::Matrix2d S = H * s.covariance * H.transpose() + R;
    const Eigen::Matrix<double, 4, 2> K = s.covariance * H.transpose() * S.inverse();
    KalmanState out;
    out.mean = s.mean + K * (z - H * s.mean);
    // Joseph form keeps the covariance symmetric positive-definite.
    const Eigen::Matrix4d IKH = Eigen::Matrix4d::Identity() - K * H;
    out.covariance = IKH * s.covariance * IKH.transpose() + K * R * K.transpose();
    out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
    return out;
}

HeadingEstimate heading_oracle(const ActorPose2D& truth, double noise_std, Rng& rng) {
    if (noise_std < 0.0) throw std::invalid_argument("heading_oracle: negative noise");
    if (noise_std == 0.0) return {truth.yaw, HeadingEstimate::Quality::oracle};
    std::normal_distribution<double> n(0.0, noise_std);
    return {wrap_angle(truth.yaw + n(rng)), HeadingEstimate::Quality::noisy};
}

HeadingEstimate heading_oracle(const ActorPose2D& truth, double noise_std, std::uint64_t seed) {
    Rng rng(seed);
    return heading_oracle(truth, noise_std, rng);
}

ActorPose2D GroundTruthEstimator::estimate(double t, const ActorPose2D& truth) {
    trace_.push_back({t, truth, truth, truth});
    return truth;
}

NoisyEstimator::NoisyEstimator(double pos_std, double yaw_std, std::uint64_t seed)
    : pos_std_(pos_std), yaw_std_(yaw_std), rng_(seed) {}

ActorPose2D NoisyEstimator::estimate(double t, const ActorPose2D& truth) {
    std::normal_distribution<double> n(0.0, 1.0);
    const double dx = pos_std_ * n(rng_), dy = pos_std_ * n(rng_);
    const double yaw = heading_oracle(truth, yaw_std_, rng_).yaw;
    const ActorPose2D est(truth.x + dx, truth.y + dy, yaw);
    trace_.push_back({t, truth, est, est});
    return est;
}

KalmanEstimator::KalmanEstimator(const Params& params, std::uint64_t seed) : params_(params), rng_(seed) {}

ActorPose2D KalmanEstimator::estimate(double t, const ActorPose2D& truth) {
    std::normal_distribution<double> n(0.0, 1.0);
    const Vec2 z(truth.x + params_.pos_std * n(rng_), truth.y + params_.pos_std * n(rng_));
    const double yaw = heading_oracle(truth, params_.yaw_std, rng_).yaw;
    const double r = std::max(params_.pos_std * params_.pos_std, 1e-8);
    if (!state_) {
        KalmanState s;
        s.mean << z.x(), z.y(), 0.0, 0.0;
        const double v2 = params_.initial_speed_std * params_.initial_speed_std;
        s.covariance = Eigen::Vector4d(r, r, v2, v2).asDiagonal();
        state_ = s;
    } else {
        state_ = kf_update(kf_predict(*state_, t - last_t_, params_.accel_noise), z, r);
    }
    last_t_ = t;
    const ActorPose2D filtered(state_->mean.x(), state_->mean.y(), yaw);
    trace_.push_back({t, truth, ActorPose2D(z.x(), z.y(), yaw), filtered});
    return filtered;
}

void write_track_csv(const std::vector<TrackSample>& trace, std::ostream& out) {
    out << "t_s,true_x_m,true_y_m,true_yaw_rad,meas_x_m,meas_y_m,meas_yaw_rad,filt_x_m,filt_y_m,filt_yaw_rad\n";
    for (const auto& s : trace) {
        CsvRow row;
        row << s.t << s.truth.x << s.truth.y << s.truth.yaw << s.measured.x << s.measured.y << s.measured.yaw
            << s.filtered.x << s.filtered.y << s.filtered.yaw;
        out << row.str() << '\n';
    }
}

}  // namespace ppaview

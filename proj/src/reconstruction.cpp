#include "ppaview/reconstruction.hpp"

#include <array>
#include <cmath>
#include <map>

#include <Eigen/SVD>

#include "ppaview/csv.hpp"
#include "ppaview/kdtree.hpp"

namespace ppaview {

PointCloud RigidTransform::apply(const PointCloud& cloud) const {
    PointCloud out;
    out.points.reserve(cloud.size());
    for (const auto& p : cloud.points) out.points.push_back(apply(p));
    return out;
}

RigidTransform fit_rigid(const std::vector<Vec3>& src, const std::vector<Vec3>& dst) {
    if (src.size() != dst.size() || src.size() < 3) {
        throw DegenerateCorrespondenceError("fit_rigid needs >= 3 paired points");
    }
    Vec3 cs = Vec3::Zero(), cd = Vec3::Zero();
    for (std::size_t i = 0; i < src.size(); ++i) {
        cs += src[i];
        cd += dst[i];
    }
    cs /= static_cast<double>(src.size());
    cd /= static_cast<double>(src.size());
    Mat3 H = Mat3::Zero();
    for (std::size_t i = 0; i < src.size(); ++i) H += (src[i] - cs) * (dst[i] - cd).transpose();
    Eigen::JacobiSVD<Mat3> svd(H, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Mat3 U = svd.matrixU(), V = svd.matrixV();
    Mat3 D = Mat3::Identity();
    D(2, 2) = (V * U.transpose()).determinant() < 0 ? -1.0 : 1.0;
    RigidTransform t;
    t.rotation = V * D * U.transpose();
    t.translation = cd - t.rotation * cs;
    return t;
}

IcpResult icp_align(const PointCloud& source, const PointCloud& target, const IcpParams& params) {
    if (source.size() < 3 || target.size() < 3) {
        throw DegenerateCorrespondenceError("icp_align: clouds need at least 3 points");
    }
    const KdTree tree(target.points);
    const double max_d2 = params.corr_dist * params.corr_dist;
    IcpResult res;
    RigidTransform current = RigidTransform::identity();
    std::vector<Vec3> src, dst;
    for (int iter = 0; iter < params.max_iters; ++iter) {
        src.clear();
        dst.clear();
        double sum_sq = 0;
        for (const auto& p : source.points) {
            const auto nb = tree.nearest(current.apply(p));
            if (nb.squared_distance <= max_d2) {
                src.push_back(p);
                dst.push_back(target.points[nb.index]);
                sum_sq += nb.squared_distance;
            }
        }
        if (src.size() < 3) {
            throw DegenerateCorrespondenceError("icp_align: fewer than 3 correspondences within " +
                                                std::to_string(params.corr_dist) + " m");
        }
        const double rmse = std::sqrt(sum_sq / static_cast<double>(src.size()));
        ++res.iterations;
        if (!res.rmse_history.empty()) {
            const double prev = res.rmse_history.back();
            if (rmse > prev) {
                // Keep the previous (better) estimate.
                res.converged = true;
                break;
            }
            res.rmse_history.push_back(rmse);
            res.transform = current;
            res.final_rmse = rmse;
            if (prev - rmse < params.tol) {
                res.converged = true;
                break;
            }
        } else {
            res.rmse_history.push_back(rmse);
            res.transform = current;
            res.final_rmse = rmse;
        }
        if (rmse < params.tol) {
            res.converged = true;
            break;
        }
        if (iter + 1 < params.max_iters) current = fit_rigid(src, dst);
    }
    return res;
}

IcpResult icp_align(const PointCloud& source, const PointCloud& target, int max_iters, double corr_dist, double tol) {
    return icp_align(source, target, IcpParams{max_iters, corr_dist, tol});
}

PointCloud voxel_downsample(const PointCloud& cloud, double voxel) {
    if (!(voxel > 0.0)) throw std::invalid_argument("voxel size must be positive");
    std::map<std::array<long long, 3>, std::pair<Vec3, long>> cells;
    for (const auto& p : cloud.points) {
        const std::array<long long, 3> key{static_cast<long long>(std::floor(p.x() / voxel)),
                                           static_cast<long long>(std::floor(p.y() / voxel)),
                                           static_cast<long long>(std::floor(p.z() / voxel))};
        auto& cell = cells[key];
        if (cell.second == 0) cell.first = Vec3::Zero();
        cell.first += p;
        ++cell.second;
    }
    PointCloud out;
    out.points.reserve(cells.size());
    for (const auto& [key, acc] : cells) out.points.push_back(acc.first / static_cast<double>(acc.second));
    return out;
}

PointCloud to_camera_frame(const PointCloud& world, const CameraPose& pose) {
    const CameraBasis b = camera_basis(pose.view_dir);
    PointCloud out;
    out.points.reserve(world.size());
    for (const auto& p : world.points) out.points.push_back(b.to_camera(p - pose.position));
    return out;
}

PointCloud to_world_frame(const PointCloud& camera, const CameraPose& pose) {
    const CameraBasis b = camera_basis(pose.view_dir);
    PointCloud out;
    out.points.reserve(camera.size());
    for (const auto& p : camera.points) out.points.push_back(pose.position + b.to_world(p));
    return out;
}

PointCloud merge_frames(const std::vector<CameraFrame>& frames, bool use_icp, double voxel, const IcpParams& icp,
                        std::vector<IcpResult>* icp_log) {
    if (frames.empty()) throw std::invalid_argument("merge_frames: no frames");
    if (frames.size() < 2 || frames.size() > 5) {
        throw std::invalid_argument("merge_frames: expects a window of 2 to 5 frames, got " +
                                    std::to_string(frames.size()));
    }
    PointCloud merged;
    const PointCloud anchor = to_world_frame(frames.front().cloud, frames.front().pose);
    merged.points = anchor.points;
    for (std::size_t i = 1; i < frames.size(); ++i) {
        PointCloud world = to_world_frame(frames[i].cloud, frames[i].pose);
        if (use_icp) {
            const IcpResult r = icp_align(world, anchor, icp);
            world = r.transform.apply(world);
            if (icp_log) icp_log->push_back(r);
        }
        merged.points.insert(merged.points.end(), world.points.begin(), world.points.end());
    }
    return voxel_downsample(merged, voxel);
}

void write_icp_csv(const std::vector<IcpResult>& results, std::ostream& out) {
    out << "pair,iterations,final_rmse_m,converged,tx_m,ty_m,tz_m\n";
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& r = results[i];
        CsvRow row;
        row << static_cast<unsigned long>(i) << r.iterations << r.final_rmse << (r.converged ? 1 : 0)
            << r.transform.translation.x() << r.transform.translation.y() << r.transform.translation.z();
        out << row.str() << '\n';
    }
}

}  // namespace ppaview

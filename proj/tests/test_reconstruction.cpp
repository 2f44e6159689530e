#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <Eigen/Geometry>

#include "ppaview/evaluation.hpp"
#include "ppaview/reconstruction.hpp"
#include "test_util.hpp"

using namespace ppaview;

namespace {

PointCloud humanoid_samples(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    return sample_mesh_surface(make_humanoid_mesh(), n, rng);
}

RigidTransform make_transform(double angle_deg, const Vec3& axis, const Vec3& t) {
    RigidTransform r;
    r.rotation = Eigen::AngleAxisd(deg_to_rad(angle_deg), axis.normalized()).toRotationMatrix();
    r.translation = t;
    return r;
}

double rotation_angle_deg(const Mat3& r) {
    return Eigen::AngleAxisd(r).angle() * 180.0 / kPi;
}

}  // namespace

TEST(FitRigid, RecoversRandomTransforms) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int trial = 0; trial < 20; ++trial) {
        const RigidTransform truth = make_transform(180 * u(rng), test::random_unit(rng), Vec3(u(rng), u(rng), u(rng)));
        std::vector<Vec3> src, dst;
        for (int i = 0; i < 10; ++i) {
            src.emplace_back(u(rng), u(rng), u(rng));
            dst.push_back(truth.apply(src.back()));
        }
        const RigidTransform fit = fit_rigid(src, dst);
        EXPECT_TRUE(fit.rotation.isApprox(truth.rotation, 1e-9));
        EXPECT_TRUE(fit.translation.isApprox(truth.translation, 1e-9));
        EXPECT_NEAR(fit.rotation.determinant(), 1.0, 1e-12);
    }
    EXPECT_THROW(fit_rigid({Vec3::Zero(), Vec3::UnitX()}, {Vec3::Zero(), Vec3::UnitX()}),
                 DegenerateCorrespondenceError);
}

TEST(FitRigid, ReflectionIsNotReturned) {
    // Mirror-image correspondences; the best proper rotation must still be a rotation.
    std::vector<Vec3> src{Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1), Vec3(1, 1, 1)};
    std::vector<Vec3> dst;
    for (const auto& p : src) dst.emplace_back(-p.x(), p.y(), p.z());
    EXPECT_NEAR(fit_rigid(src, dst).rotation.determinant(), 1.0, 1e-12);
}

TEST(RigidTransform, InverseAndCompose) {
    const RigidTransform a = make_transform(30, Vec3(1, 2, 3), Vec3(0.1, -0.2, 0.3));
    const RigidTransform b = make_transform(-50, Vec3(0, 1, 0), Vec3(1, 0, 0));
    const Vec3 p(0.3, 0.7, -1.1);
    EXPECT_TRUE(a.inverse().apply(a.apply(p)).isApprox(p, 1e-12));
    EXPECT_TRUE(b.compose(a).apply(p).isApprox(b.apply(a.apply(p)), 1e-12));
}

TEST(Icp, IdenticalCloudsStopImmediately) {
    const PointCloud c = humanoid_samples(2000, 1);
    const IcpResult r = icp_align(c, c);
    EXPECT_EQ(r.iterations, 1);
    EXPECT_EQ(r.final_rmse, 0.0);
    EXPECT_TRUE(r.converged);
    EXPECT_TRUE(r.transform.rotation.isIdentity());
}

TEST(Icp, RecoversSmallRigidMotion) {
    const PointCloud target = humanoid_samples(4000, 2);
    const RigidTransform truth = make_transform(5, Vec3(0.2, 0.3, 1.0), Vec3(0.05, 0, 0));
    // Rotate about the centroid so the displacement stays local.
    Vec3 c = Vec3::Zero();
    for (const auto& p : target.points) c += p;
    c /= static_cast<double>(target.size());
    RigidTransform about_c = truth;
    about_c.translation = truth.translation + c - truth.rotation * c;
    const PointCloud source = about_c.inverse().apply(target);
    const IcpResult r = icp_align(source, target, IcpParams{100, 0.3, 1e-10});
    EXPECT_LT(rotation_angle_deg(r.transform.rotation * about_c.rotation.transpose()), 0.1);
    EXPECT_LT((r.transform.apply(c) - about_c.apply(c)).norm(), 0.005);
    for (std::size_t i = 1; i < r.rmse_history.size(); ++i) {
        EXPECT_LE(r.rmse_history[i], r.rmse_history[i - 1]);
    }
}

TEST(Icp, ToleratesOutliers) {
    const PointCloud target = humanoid_samples(3000, 3);
    const RigidTransform shift = make_transform(2, Vec3::UnitZ(), Vec3(0.03, -0.02, 0.01));
    PointCloud source = shift.inverse().apply(target);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-3, 3);
    for (int i = 0; i < 300; ++i) source.points.emplace_back(u(rng), u(rng), 5 + u(rng));
    const IcpResult r = icp_align(source, target, IcpParams{100, 0.2, 1e-10});
    EXPECT_LT((r.transform.translation - shift.translation).norm(), 0.01);
    EXPECT_LT(rotation_angle_deg(r.transform.rotation * shift.rotation.transpose()), 0.2);
}

TEST(Icp, DegenerateInputsThrow) {
    PointCloud tiny;
    tiny.points = {Vec3::Zero(), Vec3::UnitX()};
    EXPECT_THROW(icp_align(tiny, humanoid_samples(100, 1)), DegenerateCorrespondenceError);
    PointCloud far = humanoid_samples(100, 1);
    for (auto& p : far.points) p += Vec3(10, 0, 0);
    EXPECT_THROW(icp_align(far, humanoid_samples(100, 1)), DegenerateCorrespondenceError);
}

TEST(VoxelDownsample, CentroidPerCell) {
    PointCloud c;
    c.points = {Vec3(0.001, 0.001, 0.001), Vec3(0.003, 0.005, 0.007), Vec3(0.015, 0, 0), Vec3(-0.001, 0, 0)};
    const PointCloud d = voxel_downsample(c, 0.01);
    ASSERT_EQ(d.size(), 3u);
    // Ordered by voxel index: (-1,0,0), (0,0,0), (1,0,0).
    EXPECT_TRUE(d.points[0].isApprox(Vec3(-0.001, 0, 0)));
    EXPECT_TRUE(d.points[1].isApprox(Vec3(0.002, 0.003, 0.004)));
    EXPECT_TRUE(d.points[2].isApprox(Vec3(0.015, 0, 0)));
    EXPECT_THROW(voxel_downsample(c, 0.0), std::invalid_argument);
}

TEST(FrameTransforms, RoundTrip) {
    const PointCloud w = humanoid_samples(200, 5);
    const CameraPose pose = CameraPose::look_at(Vec3(4, -3, 2), Vec3(0, 0, 1));
    const PointCloud back = to_world_frame(to_camera_frame(w, pose), pose);
    for (std::size_t i = 0; i < w.size(); ++i) EXPECT_TRUE(back.points[i].isApprox(w.points[i], 1e-12));
}

TEST(MergeFrames, IdenticalFramesCollapse) {
    const PointCloud w = humanoid_samples(3000, 6);
    const CameraPose a = CameraPose::look_at(Vec3(4, 0, 1), Vec3(0, 0, 1));
    const CameraPose b = CameraPose::look_at(Vec3(0, 4, 1), Vec3(0, 0, 1));
    const PointCloud merged =
        merge_frames({{to_camera_frame(w, a), a}, {to_camera_frame(w, b), b}}, false, 0.01);
    EXPECT_EQ(merged.size(), voxel_downsample(w, 0.01).size());
    EXPECT_THROW(merge_frames({{w, a}}, false, 0.01), std::invalid_argument);
}

TEST(MergeFrames, IcpReducesMisregistration) {
    const TriangleMesh mesh = make_humanoid_mesh();
    const CameraIntrinsics intr(960, 720);
    const Vec3 center(0, 0, 0.9);
    const CameraPose a = CameraPose::look_at(center + Vec3(3, 0, 0.5), center);
    const CameraPose b = CameraPose::look_at(center + Vec3(3, 0.6, 0.5), center);
    const PointCloud ca = backproject(render(mesh, a, intr));
    const PointCloud cb = backproject(render(mesh, b, intr));
    // Frame b's recorded pose is off by 1 cm.
    const CameraPose b_wrong{b.position + Vec3(0, 0.01, 0), b.view_dir};
    const std::vector<CameraFrame> frames{{to_camera_frame(ca, a), a}, {to_camera_frame(cb, b), b_wrong}};
    PointCloud gt;
    Rng rng(9);
    gt = sample_mesh_surface(mesh, 20000, rng);
    std::vector<IcpResult> log;
    const double plain = chamfer_distance(merge_frames(frames, false, 0.005), gt).mean_mm;
    const double aligned = chamfer_distance(merge_frames(frames, true, 0.005, IcpParams{50, 0.05, 1e-9}, &log), gt).mean_mm;
    ASSERT_EQ(log.size(), 1u);
    EXPECT_LT(aligned, plain);
    Vec3 c = Vec3::Zero();
    for (const auto& p : cb.points) c += p;
    c /= static_cast<double>(cb.size());
    // Frame b lands 1 cm too far along +y; ICP should pull it back.
    EXPECT_LT((log[0].transform.apply(c) - c + Vec3(0, 0.01, 0)).norm(), 0.004);
}

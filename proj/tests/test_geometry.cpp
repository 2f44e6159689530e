#include <gtest/gtest.h>

#include <random>

#include "ppaview/csv.hpp"
#include "ppaview/geometry.hpp"
#include "ppaview/random.hpp"
#include "test_util.hpp"

using namespace ppaview;

TEST(Geometry, CameraBasisIsOrthonormalWithDownwardImageAxes) {
    std::mt19937_64 rng(1);
    for (int i = 0; i < 200; ++i) {
        const Vec3 f = test::random_unit(rng);
        const CameraBasis b = camera_basis(f);
        EXPECT_NEAR(b.right.norm(), 1.0, 1e-12);
        EXPECT_NEAR(b.up.norm(), 1.0, 1e-12);
        EXPECT_NEAR(b.right.dot(b.up), 0.0, 1e-12);
        EXPECT_NEAR(b.up.dot(b.forward), 0.0, 1e-12);
        // (right, -up, forward) matches the pixel axes (u right, v down, depth).
        EXPECT_NEAR(b.right.cross(-b.up).dot(b.forward), 1.0, 1e-12);
        EXPECT_GE(b.up.z(), -1e-12);
    }
}

TEST(Geometry, CameraBasisHandlesVerticalView) {
    const CameraBasis b = camera_basis(Vec3(0, 0, -1));
    EXPECT_NEAR(b.up.x(), 1.0, 1e-12);
    EXPECT_NEAR(b.forward.z(), -1.0, 1e-12);
}

TEST(Geometry, ToCameraRoundTrip) {
    const CameraBasis b = camera_basis(Vec3(0.3, -0.4, 0.2).normalized());
    const Vec3 v(1.5, -2, 0.25);
    EXPECT_TRUE(b.to_world(b.to_camera(v)).isApprox(v, 1e-12));
}

TEST(Geometry, LookAtRejectsCoincidentTarget) {
    EXPECT_THROW(CameraPose::look_at(Vec3(1, 2, 3), Vec3(1, 2, 3)), DomainError);
    const CameraPose c = CameraPose::look_at(Vec3(0, 0, 0), Vec3(0, 3, 4));
    EXPECT_TRUE(c.view_dir.isApprox(Vec3(0, 0.6, 0.8), 1e-15));
}

TEST(Geometry, FieldOfViewContains) {
    const FieldOfView fov = FieldOfView::from_horizontal(kPi / 2, 4.0 / 3.0);
    const CameraPose cam{Vec3::Zero(), Vec3::UnitX()};
    EXPECT_TRUE(fov.contains(cam, Vec3(2, 0, 0)));
    EXPECT_TRUE(fov.contains(cam, Vec3(2, 1.99, 0)));
    EXPECT_FALSE(fov.contains(cam, Vec3(2, 2.01, 0)));
    EXPECT_TRUE(fov.contains(cam, Vec3(2, 0, 1.49)));
    EXPECT_FALSE(fov.contains(cam, Vec3(2, 0, 1.51)));
    EXPECT_FALSE(fov.contains(cam, Vec3(-2, 0, 0)));
}

TEST(Geometry, WrapAngleRange) {
    EXPECT_DOUBLE_EQ(wrap_angle(kPi), kPi);
    EXPECT_DOUBLE_EQ(wrap_angle(-kPi), kPi);
    EXPECT_NEAR(wrap_angle(3 * kPi / 2), -kPi / 2, 1e-15);
    for (double a = -20; a < 20; a += 0.37) {
        const double w = wrap_angle(a);
        EXPECT_GT(w, -kPi);
        EXPECT_LE(w, kPi);
        EXPECT_NEAR(std::remainder(w - a, 2 * kPi), 0.0, 1e-12);
    }
}

TEST(Random, NamedStreamsAreStableAndDistinct) {
    EXPECT_EQ(stream_seed(5, "planner"), stream_seed(5, "planner"));
    EXPECT_NE(stream_seed(5, "planner"), stream_seed(5, "tracking"));
    EXPECT_NE(stream_seed(5, "planner"), stream_seed(6, "planner"));
    Rng a = make_stream(9, "x"), b = make_stream(9, "x");
    for (int i = 0; i < 10; ++i) EXPECT_EQ(a(), b());
}

TEST(Csv, FormatRoundTripsAndSplits) {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-17, 8.0, 12345.678}) {
        EXPECT_EQ(std::stod(format_double(v)), v);
    }
    EXPECT_EQ(format_param(8.0), "8.0");
    EXPECT_EQ(format_param(0.5), "0.5");
    const auto cells = split_csv_line("a,1.5,,x");
    ASSERT_EQ(cells.size(), 4u);
    EXPECT_EQ(cells[1], "1.5");
    EXPECT_EQ(cells[2], "");
}

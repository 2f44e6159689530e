#pragma once

#include <optional>
#include <ostream>
#include <vector>

#include "ppaview/actor_model.hpp"
#include "ppaview/camera.hpp"
#include "ppaview/random.hpp"

namespace ppaview {

struct CoverageReport {
    std::size_t visible_triangles{0};
    std::size_t total_triangles{0};
    double coverage_ratio{0};
    double pixels_per_triangle{0};
};

/// A triangle counts as covered when at least one cloud point lies inside
/// its prism: the triangle extruded +-prism_height/2 along its normal, with
/// the point's in-plane projection inside the triangle. Pixels per triangle
/// come from `view`'s triangle ids when given (mean over triangles with at
/// least one pixel), else from in-prism point counts over covered triangles.
CoverageReport triangle_coverage(const PointCloud& cloud, const TriangleMesh& mesh, double prism_height,
                                 const RenderedView* view = nullptr);

/// Number of cloud points inside each triangle's prism.
std::vector<int> prism_point_counts(const PointCloud& cloud, const TriangleMesh& mesh, double prism_height);

struct ChamferResult {
    double forward_mm{0};
    double backward_mm{0};
    double mean_mm{0};
};

/// forward: mean over x of the distance to the nearest y; backward swaps the
/// roles; both in millimeters.
ChamferResult chamfer_distance(const PointCloud& x, const PointCloud& y);
/// One direction only, in meters.
double mean_nearest_distance(const PointCloud& from, const PointCloud& to);

/// Area-uniform surface samples.
PointCloud sample_mesh_surface(const TriangleMesh& mesh, std::size_t count, Rng& rng);

/// Spearman rank correlation with average ranks for ties. NaN when either
/// input is constant or has fewer than two entries.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

struct CorrelationRecord {
    CameraPose view;
    double r{0}, theta{0}, phi{0};  // spherical coordinates about the actor center
    double ppa_mesh{0};
    double ppa_cuboid{0};
    double coverage_ratio{0};
    double pixels_per_triangle{0};
};

struct CorrelationStudy {
    std::vector<CorrelationRecord> records;
    double spearman_ppt{0};
    double spearman_coverage{0};
    double spearman_cuboid{0};
};

/// Per view: mean PPA over visible mesh patches and over visible cuboid
/// faces, plus coverage and pixels-per-triangle from a render of `mesh`.
CorrelationStudy run_correlation_study(const TriangleMesh& mesh, const std::vector<CameraPose>& views,
                                       const CameraIntrinsics& intr, const std::vector<Patch>& cuboid,
                                       const Vec3& center, double prism_height = 0.01);

void write_correlation_csv(const CorrelationStudy& study, std::ostream& out);
void write_coverage_csv_row(const CoverageReport& report, std::ostream& out, bool header = false);

}  // namespace ppaview

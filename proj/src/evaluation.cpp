#include "ppaview/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ppaview/csv.hpp"
#include "ppaview/kdtree.hpp"
#include "ppaview/ppa.hpp"

namespace ppaview {

namespace {

bool in_prism(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& n, double half_height) {
    const double s = (p - a).dot(n);
    if (std::abs(s) > half_height) return false;
    const Vec3 q = p - s * n;
    // Barycentric containment in the triangle plane.
    const Vec3 e0 = b - a, e1 = c - a, w = q - a;
    const double d00 = e0.dot(e0), d01 = e0.dot(e1), d11 = e1.dot(e1);
    const double d20 = w.dot(e0), d21 = w.dot(e1);
    const double denom = d00 * d11 - d01 * d01;
    const double v = (d11 * d20 - d01 * d21) / denom;
    const double u = (d00 * d21 - d01 * d20) / denom;
    constexpr double eps = 1e-9;
    return v >= -eps && u >= -eps && v + u <= 1.0 + eps;
}

}  // namespace

std::vector<int> prism_point_counts(const PointCloud& cloud, const TriangleMesh& mesh, double prism_height) {
    if (mesh.empty()) throw std::invalid_argument("triangle_coverage: empty mesh");
    if (!(prism_height > 0.0)) throw std::invalid_argument("triangle_coverage: prism height must be positive");
    std::vector<int> counts(mesh.size(), 0);
    if (cloud.empty()) return counts;
    const KdTree tree(cloud.points);
    const double h = prism_height / 2;
    for (std::size_t t = 0; t < mesh.size(); ++t) {
        const Vec3 &a = mesh.vertex(t, 0), &b = mesh.vertex(t, 1), &c = mesh.vertex(t, 2);
        const Vec3 lo = a.cwiseMin(b).cwiseMin(c) - Vec3::Constant(h);
        const Vec3 hi = a.cwiseMax(b).cwiseMax(c) + Vec3::Constant(h);
        for (std::size_t idx : tree.box_search(lo, hi)) {
            if (in_prism(cloud.points[idx], a, b, c, mesh.normals()[t], h)) ++counts[t];
        }
    }
    return counts;
}

CoverageReport triangle_coverage(const PointCloud& cloud, const TriangleMesh& mesh, double prism_height,
                                 const RenderedView* view) {
    const std::vector<int> counts = prism_point_counts(cloud, mesh, prism_height);
    CoverageReport rep;
    rep.total_triangles = mesh.size();
    long point_hits = 0;
    for (int c : counts) {
        if (c > 0) {
            ++rep.visible_triangles;
            point_hits += c;
        }
    }
    rep.coverage_ratio = static_cast<double>(rep.visible_triangles) / static_cast<double>(rep.total_triangles);
    if (view) {
        const auto pix = pixels_per_triangle_id(*view, mesh.size());
        long total = 0, hit = 0;
        for (int p : pix) {
            if (p > 0) {
                total += p;
                ++hit;
            }
        }
        rep.pixels_per_triangle = hit ? static_cast<double>(total) / static_cast<double>(hit) : 0.0;
    } else {
        rep.pixels_per_triangle =
            rep.visible_triangles ? static_cast<double>(point_hits) / static_cast<double>(rep.visible_triangles) : 0.0;
    }
    return rep;
}

double mean_nearest_distance(const PointCloud& from, const PointCloud& to) {
    if (from.empty() || to.empty()) throw std::invalid_argument("chamfer_distance: empty point cloud");
    const KdTree tree(to.points);
    double sum = 0;
    for (const auto& p : from.points) sum += std::sqrt(tree.nearest(p).squared_distance);
    return sum / static_cast<double>(from.size());
}

ChamferResult chamfer_distance(const PointCloud& x, const PointCloud& y) {
    ChamferResult r;
    r.forward_mm = 1000.0 * mean_nearest_distance(x, y);
    r.backward_mm = 1000.0 * mean_nearest_distance(y, x);
    r.mean_mm = 0.5 * (r.forward_mm + r.backward_mm);
    return r;
}

PointCloud sample_mesh_surface(const TriangleMesh& mesh, std::size_t count, Rng& rng) {
    if (mesh.empty()) throw std::invalid_argument("sample_mesh_surface: empty mesh");
    std::vector<double> cumulative(mesh.size());
    double acc = 0;
    for (std::size_t t = 0; t < mesh.size(); ++t) {
        acc += mesh.triangle_area(t);
        cumulative[t] = acc;
    }
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    PointCloud out;
    out.points.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double pick = unit(rng) * acc;
        auto it = std::lower_bound(cumulative.begin(), cumulative.end(), pick);
        const std::size_t t = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), mesh.size() - 1);
        double u = unit(rng), v = unit(rng);
        if (u + v > 1.0) {
            u = 1.0 - u;
            v = 1.0 - v;
        }
        out.points.push_back(mesh.vertex(t, 0) + u * (mesh.vertex(t, 1) - mesh.vertex(t, 0)) +
                             v * (mesh.vertex(t, 2) - mesh.vertex(t, 0)));
    }
    return out;
}

namespace {
std::vector<double> average_ranks(const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
        i = j + 1;
    }
    return ranks;
}
}  // namespace

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("spearman: size mismatch");
    const std::size_t n = a.size();
    if (n < 2) return std::numeric_limits<double>::quiet_NaN();
    const auto ra = average_ranks(a), rb = average_ranks(b);
    const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / static_cast<double>(n);
    const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / static_cast<double>(n);
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sab += (ra[i] - ma) * (rb[i] - mb);
        saa += (ra[i] - ma) * (ra[i] - ma);
        sbb += (rb[i] - mb) * (rb[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return sab / std::sqrt(saa * sbb);
}

namespace {
double mean_visible_ppa(const CameraPose& view, const std::vector<Patch>& patches, const FieldOfView& fov) {
    const auto vis = visible_patches(view, patches, fov);
    if (vis.empty()) return 0.0;
    double s = 0;
    for (const auto& p : vis) s += ppa_value(view, p);
    return s / static_cast<double>(vis.size());
}
}  // namespace

CorrelationStudy run_correlation_study(const TriangleMesh& mesh, const std::vector<CameraPose>& views,
                                       const CameraIntrinsics& intr, const std::vector<Patch>& cuboid,
                                       const Vec3& center, double prism_height) {
    if (views.empty()) throw std::invalid_argument("run_correlation_study: no views");
    const auto mesh_patches = mesh_to_patches(mesh);
    const FieldOfView fov = intr.field_of_view();
    CorrelationStudy study;
    study.records.reserve(views.size());
    for (const auto& view : views) {
        CorrelationRecord rec;
        rec.view = view;
        const Vec3 rel = view.position - center;
        rec.r = rel.norm();
        rec.theta = rec.r > 0 ? std::acos(std::clamp(rel.z() / rec.r, -1.0, 1.0)) : 0.0;
        rec.phi = std::atan2(rel.y(), rel.x());
        rec.ppa_mesh = mean_visible_ppa(view, mesh_patches, fov);
        rec.ppa_cuboid = mean_visible_ppa(view, cuboid, fov);
        const RenderedView rendered = render(mesh, view, intr);
        const CoverageReport cov = triangle_coverage(backproject(rendered), mesh, prism_height, &rendered);
        rec.coverage_ratio = cov.coverage_ratio;
        rec.pixels_per_triangle = cov.pixels_per_triangle;
        study.records.push_back(rec);
    }
    std::vector<double> pm, pc, cv, pt;
    for (const auto& r : study.records) {
        pm.push_back(r.ppa_mesh);
        pc.push_back(r.ppa_cuboid);
        cv.push_back(r.coverage_ratio);
        pt.push_back(r.pixels_per_triangle);
    }
    study.spearman_ppt = spearman(pm, pt);
    study.spearman_coverage = spearman(pm, cv);
    study.spearman_cuboid = spearman(pm, pc);
    return study;
}

void write_correlation_csv(const CorrelationStudy& study, std::ostream& out) {
    out << "view,r_m,theta_rad,phi_rad,ppa_mesh,ppa_cuboid,coverage,ppt\n";
    for (std::size_t i = 0; i < study.records.size(); ++i) {
        const auto& r = study.records[i];
        CsvRow row;
        row << static_cast<unsigned long>(i) << r.r << r.theta << r.phi << r.ppa_mesh << r.ppa_cuboid
            << r.coverage_ratio << r.pixels_per_triangle;
        out << row.str() << '\n';
    }
}

void write_coverage_csv_row(const CoverageReport& rep, std::ostream& out, bool header) {
    if (header) out << "visible_triangles,total_triangles,coverage_ratio,pixels_per_triangle\n";
    CsvRow row;
    row << static_cast<unsigned long>(rep.visible_triangles) << static_cast<unsigned long>(rep.total_triangles)
        << rep.coverage_ratio << rep.pixels_per_triangle;
    out << row.str() << '\n';
}

}  // namespace ppaview

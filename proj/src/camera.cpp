#include "ppaview/camera.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ppaview/csv.hpp"

namespace ppaview {

CameraIntrinsics::CameraIntrinsics(int w, int h, double fov_deg) : width(w), height(h), fov_horizontal_deg(fov_deg) {
    if (w <= 0 || h <= 0) throw std::invalid_argument("image size must be positive");
    if (!(fov_deg > 0.0 && fov_deg < 180.0)) throw std::invalid_argument("field of view must be in (0, 180) degrees");
}

double CameraIntrinsics::focal() const {
    return (width / 2.0) / std::tan(deg_to_rad(fov_horizontal_deg) / 2.0);
}

FieldOfView CameraIntrinsics::field_of_view() const {
    return FieldOfView::from_horizontal(deg_to_rad(fov_horizontal_deg), static_cast<double>(width) / height);
}

std::size_t RenderedView::foreground_pixels() const {
    return static_cast<std::size_t>((triangle_id.array() >= 0).count());
}

std::optional<Vec3> project(const CameraPose& pose, const CameraIntrinsics& intr, const Vec3& world) {
    const Vec3 c = camera_basis(pose.view_dir).to_camera(world - pose.position);
    if (!(c.z() > 0.0)) return std::nullopt;
    const double f = intr.focal();
    return Vec3(intr.cx() + f * c.x() / c.z(), intr.cy() - f * c.y() / c.z(), c.z());
}

Vec3 pixel_ray(const CameraPose& pose, const CameraIntrinsics& intr, double u, double v) {
    const double f = intr.focal();
    return camera_basis(pose.view_dir).to_world({(u - intr.cx()) / f, -(v - intr.cy()) / f, 1.0});
}

Vec3 backproject_pixel(const CameraPose& pose, const CameraIntrinsics& intr, double u, double v, double depth) {
    return pose.position + depth * pixel_ray(pose, intr, u, v);
}

namespace {

constexpr double kNear = 1e-3;

struct ScreenVertex {
    double u, v, z;
};

// Sutherland-Hodgman against the plane z = kNear in camera coordinates.
int clip_near(const std::array<Vec3, 3>& in, std::array<Vec3, 4>& out) {
    int n = 0;
    for (int i = 0; i < 3; ++i) {
        const Vec3& a = in[static_cast<std::size_t>(i)];
        const Vec3& b = in[static_cast<std::size_t>((i + 1) % 3)];
        const bool a_in = a.z() >= kNear, b_in = b.z() >= kNear;
        if (a_in) out[static_cast<std::size_t>(n++)] = a;
        if (a_in != b_in) {
            const double t = (kNear - a.z()) / (b.z() - a.z());
            out[static_cast<std::size_t>(n++)] = a + t * (b - a);
        }
    }
    return n;
}

void raster_triangle(const ScreenVertex& a, const ScreenVertex& b, const ScreenVertex& c, int id,
                     RenderedView& view) {
    const double area = (b.u - a.u) * (c.v - a.v) - (b.v - a.v) * (c.u - a.u);
    if (area == 0.0 || !std::isfinite(area)) return;
    const int w = view.intrinsics.width, h = view.intrinsics.height;
    const double umin = std::min({a.u, b.u, c.u}), umax = std::max({a.u, b.u, c.u});
    const double vmin = std::min({a.v, b.v, c.v}), vmax = std::max({a.v, b.v, c.v});
    // Pixel i covers center i + 0.5.
    const int i0 = std::max(0, static_cast<int>(std::ceil(umin - 0.5)));
    const int i1 = std::min(w - 1, static_cast<int>(std::floor(umax - 0.5)));
    const int j0 = std::max(0, static_cast<int>(std::ceil(vmin - 0.5)));
    const int j1 = std::min(h - 1, static_cast<int>(std::floor(vmax - 0.5)));
    if (i0 > i1 || j0 > j1) return;
    const double inv_area = 1.0 / area;
    const double iza = 1.0 / a.z, izb = 1.0 / b.z, izc = 1.0 / c.z;
    for (int j = j0; j <= j1; ++j) {
        const double pv = j + 0.5;
        for (int i = i0; i <= i1; ++i) {
            const double pu = i + 0.5;
            const double wa = ((b.u - pu) * (c.v - pv) - (b.v - pv) * (c.u - pu)) * inv_area;
            const double wb = ((c.u - pu) * (a.v - pv) - (c.v - pv) * (a.u - pu)) * inv_area;
            const double wc = 1.0 - wa - wb;
            if (wa < 0.0 || wb < 0.0 || wc < 0.0) continue;
            const double z = 1.0 / (wa * iza + wb * izb + wc * izc);
            double& zbuf = view.depth(j, i);
            int& idbuf = view.triangle_id(j, i);
            if (z < zbuf || (z == zbuf && id < idbuf)) {
                zbuf = z;
                idbuf = id;
            }
        }
    }
}

}  // namespace

RenderedView render(const TriangleMesh& mesh, const CameraPose& pose, const CameraIntrinsics& intr) {
    RenderedView view;
    view.pose = pose;
    view.intrinsics = intr;
    view.depth.setConstant(intr.height, intr.width, std::numeric_limits<double>::infinity());
    view.triangle_id.setConstant(intr.height, intr.width, -1);

    const CameraBasis basis = camera_basis(pose.view_dir);
    const double f = intr.focal();
    std::vector<Vec3> cam(mesh.vertices().size());
    for (std::size_t i = 0; i < cam.size(); ++i) cam[i] = basis.to_camera(mesh.vertices()[i] - pose.position);

    auto to_screen = [&](const Vec3& c) {
        return ScreenVertex{intr.cx() + f * c.x() / c.z(), intr.cy() - f * c.y() / c.z(), c.z()};
    };
    for (std::size_t t = 0; t < mesh.size(); ++t) {
        const auto& tri = mesh.triangles()[t];
        const std::array<Vec3, 3> v{cam[static_cast<std::size_t>(tri[0])], cam[static_cast<std::size_t>(tri[1])],
                                    cam[static_cast<std::size_t>(tri[2])]};
        if (v[0].z() < kNear && v[1].z() < kNear && v[2].z() < kNear) continue;
        std::array<Vec3, 4> poly;
        const int n = clip_near(v, poly);
        const ScreenVertex s0 = to_screen(poly[0]);
        for (int k = 1; k + 1 < n; ++k) {
            raster_triangle(s0, to_screen(poly[static_cast<std::size_t>(k)]),
                            to_screen(poly[static_cast<std::size_t>(k + 1)]), static_cast<int>(t), view);
        }
    }
    return view;
}

PointCloud backproject(const RenderedView& view, std::vector<int>* triangle_ids) {
    PointCloud cloud;
    if (triangle_ids) triangle_ids->clear();
    const auto& intr = view.intrinsics;
    const CameraBasis basis = camera_basis(view.pose.view_dir);
    const double f = intr.focal();
    for (int j = 0; j < intr.height; ++j) {
        for (int i = 0; i < intr.width; ++i) {
            const int id = view.triangle_id(j, i);
            if (id < 0) continue;
            const double z = view.depth(j, i);
            const Vec3 ray = basis.to_world({(i + 0.5 - intr.cx()) / f, -(j + 0.5 - intr.cy()) / f, 1.0});
            cloud.points.push_back(view.pose.position + z * ray);
            if (triangle_ids) triangle_ids->push_back(id);
        }
    }
    return cloud;
}

PointCloud backproject(const RenderedView& view) { return backproject(view, nullptr); }

std::vector<int> pixels_per_triangle_id(const RenderedView& view, std::size_t triangle_count) {
    std::vector<int> counts(triangle_count, 0);
    for (Eigen::Index k = 0; k < view.triangle_id.size(); ++k) {
        const int id = view.triangle_id.data()[k];
        if (id >= 0 && static_cast<std::size_t>(id) < triangle_count) ++counts[static_cast<std::size_t>(id)];
    }
    return counts;
}

std::vector<CameraPose> sample_view_sphere(const Vec3& target, const SphereSampling& s) {
    if (s.polar_steps < 1 || s.azimuth_steps < 1) throw std::invalid_argument("sphere sampling needs >= 1 step");
    std::vector<CameraPose> poses;
    for (double r : s.radii) {
        if (!(r > 0.0)) throw std::invalid_argument("sphere radii must be positive");
        for (int ip = 0; ip < s.polar_steps; ++ip) {
            const double polar =
                s.polar_min_rad + (ip + 0.5) * (s.polar_max_rad - s.polar_min_rad) / s.polar_steps;
            for (int ia = 0; ia < s.azimuth_steps; ++ia) {
                const double az = 2.0 * kPi * ia / s.azimuth_steps;
                const Vec3 offset(std::sin(polar) * std::cos(az), std::sin(polar) * std::sin(az), std::cos(polar));
                if (offset.z() < 0.0) continue;
                const Vec3 pos = target + r * offset;
                poses.push_back({pos, -offset});
            }
        }
    }
    return poses;
}

std::vector<CameraPose> sample_view_sphere(const Vec3& target, const std::vector<double>& radii, int polar_steps,
                                           int azimuth_steps) {
    SphereSampling s;
    s.radii = radii;
    s.polar_steps = polar_steps;
    s.azimuth_steps = azimuth_steps;
    return sample_view_sphere(target, s);
}

void write_ply(const PointCloud& cloud, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "ply\nformat ascii 1.0\nelement vertex " << cloud.size()
        << "\nproperty double x\nproperty double y\nproperty double z\nend_header\n";
    for (const auto& p : cloud.points) {
        out << format_double(p.x()) << ' ' << format_double(p.y()) << ' ' << format_double(p.z()) << '\n';
    }
}

PointCloud read_ply_points(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string kw, what;
        ls >> kw;
        if (kw == "element") {
            ls >> what;
            if (what == "vertex") ls >> n;
        }
        if (kw == "end_header") break;
    }
    PointCloud cloud;
    cloud.points.reserve(n);
    for (std::size_t i = 0; i < n && std::getline(in, line); ++i) {
        std::istringstream ls(line);
        double x, y, z;
        if (!(ls >> x >> y >> z)) throw std::runtime_error("malformed PLY vertex in " + path.string());
        cloud.points.emplace_back(x, y, z);
    }
    if (cloud.size() != n) throw std::runtime_error("truncated PLY " + path.string());
    return cloud;
}

void write_depth_pgm(const RenderedView& view, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "P5\n" << view.intrinsics.width << ' ' << view.intrinsics.height << "\n65535\n";
    for (int j = 0; j < view.intrinsics.height; ++j) {
        for (int i = 0; i < view.intrinsics.width; ++i) {
            const double d = view.depth(j, i);
            std::uint16_t mm = 0;
            if (std::isfinite(d)) mm = static_cast<std::uint16_t>(std::clamp(std::lround(d * 1000.0), 0L, 65535L));
            const char bytes[2] = {static_cast<char>(mm >> 8), static_cast<char>(mm & 0xff)};
            out.write(bytes, 2);
        }
    }
}

}  // namespace ppaview

#include "ppaview/actor_model.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace ppaview {

Vec3 ActorPose2D::rotate(const Vec3& d) const {
    const double c = std::cos(yaw), s = std::sin(yaw);
    return {c * d.x() - s * d.y(), s * d.x() + c * d.y(), d.z()};
}

Vec3 ActorPose2D::to_world(const Vec3& local) const {
    return rotate(local) + Vec3(x, y, 0.0);
}

Vec3 ActorPose2D::to_local(const Vec3& world) const {
    const double c = std::cos(yaw), s = std::sin(yaw);
    const double dx = world.x() - x, dy = world.y() - y;
    return {c * dx + s * dy, -s * dx + c * dy, world.z()};
}

void CuboidSpec::validate() const {
    if (!(width > 0.0) || !(depth > 0.0) || !(height > 0.0)) {
        throw std::invalid_argument("cuboid extents must be positive");
    }
}

// ---------------------------------------------------------------------------
// TriangleMesh

TriangleMesh::TriangleMesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
    const int nv = static_cast<int>(vertices_.size());
    normals_.reserve(triangles_.size());
    for (std::size_t t = 0; t < triangles_.size(); ++t) {
        for (int idx : triangles_[t]) {
            if (idx < 0 || idx >= nv) {
                throw MeshLoadError("triangle " + std::to_string(t) + " references vertex " +
                                    std::to_string(idx) + " out of range");
            }
        }
        const Vec3 n = (vertex(t, 1) - vertex(t, 0)).cross(vertex(t, 2) - vertex(t, 0));
        if (0.5 * n.norm() <= 1e-12) {
            throw MeshLoadError("triangle " + std::to_string(t) + " is degenerate (zero area)");
        }
        normals_.push_back(n.normalized());
    }
}

Vec3 TriangleMesh::triangle_centroid(std::size_t t) const {
    return (vertex(t, 0) + vertex(t, 1) + vertex(t, 2)) / 3.0;
}

double TriangleMesh::triangle_area(std::size_t t) const {
    return 0.5 * (vertex(t, 1) - vertex(t, 0)).cross(vertex(t, 2) - vertex(t, 0)).norm();
}

Vec3 TriangleMesh::vertex_centroid() const {
    Vec3 c = Vec3::Zero();
    for (const auto& v : vertices_) c += v;
    return vertices_.empty() ? c : Vec3(c / static_cast<double>(vertices_.size()));
}

TriangleMesh TriangleMesh::oriented_outward() const {
    const Vec3 center = vertex_centroid();
    auto tris = triangles_;
    for (std::size_t t = 0; t < tris.size(); ++t) {
        if (normals_[t].dot(triangle_centroid(t) - center) < 0.0) {
            std::swap(tris[t][1], tris[t][2]);
        }
    }
    return TriangleMesh(vertices_, std::move(tris));
}

TriangleMesh TriangleMesh::transformed(const ActorPose2D& pose) const {
    std::vector<Vec3> verts;
    verts.reserve(vertices_.size());
    for (const auto& v : vertices_) verts.push_back(pose.to_world(v));
    return TriangleMesh(std::move(verts), triangles_);
}

// ---------------------------------------------------------------------------
// Loading

namespace {

std::string lower_ext(const std::filesystem::path& p) {
    auto e = p.extension().string();
    std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
    return e;
}

// OBJ face tokens look like "7", "7/2", "7//3" or "7/2/3"; indices are
// 1-based, negatives are relative to the current vertex count.
int parse_obj_index(const std::string& token, int vertex_count, std::size_t line_no) {
    const auto slash = token.find('/');
    const std::string head = token.substr(0, slash);
    int idx = 0;
    try {
        std::size_t used = 0;
        idx = std::stoi(head, &used);
        if (used != head.size()) throw std::invalid_argument(head);
    } catch (const std::exception&) {
        throw MeshLoadError("OBJ line " + std::to_string(line_no) + ": bad face index '" + token + "'");
    }
    if (idx < 0) return vertex_count + idx;
    return idx - 1;
}

TriangleMesh read_obj(std::istream& in) {
    std::vector<Vec3> verts;
    std::vector<TriangleMesh::Triangle> tris;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag) || tag[0] == '#') continue;
        if (tag == "v") {
            double x, y, z;
            if (!(ls >> x >> y >> z)) {
                throw MeshLoadError("OBJ line " + std::to_string(line_no) + ": malformed vertex");
            }
            verts.emplace_back(x, y, z);
        } else if (tag == "f") {
            std::vector<int> idx;
            std::string tok;
            while (ls >> tok) idx.push_back(parse_obj_index(tok, static_cast<int>(verts.size()), line_no));
            if (idx.size() != 3) {
                throw MeshLoadError("OBJ line " + std::to_string(line_no) + ": face with " +
                                    std::to_string(idx.size()) + " vertices (only triangles supported)");
            }
            tris.push_back({idx[0], idx[1], idx[2]});
        }
    }
    return TriangleMesh(std::move(verts), std::move(tris));
}

TriangleMesh read_ply(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("ply", 0) != 0) {
        throw MeshLoadError("PLY: missing magic");
    }
    std::size_t n_vertices = 0, n_faces = 0;
    int vertex_props = 0, x_col = -1, y_col = -1, z_col = -1;
    std::string current;
    bool header_done = false;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string kw;
        ls >> kw;
        if (kw == "format") {
            std::string fmt;
            ls >> fmt;
            if (fmt != "ascii") throw MeshLoadError("PLY: only ascii format is supported");
        } else if (kw == "element") {
            std::size_t count = 0;
            ls >> current >> count;
            if (current == "vertex") n_vertices = count;
            if (current == "face") n_faces = count;
        } else if (kw == "property" && current == "vertex") {
            std::string type, name;
            ls >> type >> name;
            if (name == "x") x_col = vertex_props;
            if (name == "y") y_col = vertex_props;
            if (name == "z") z_col = vertex_props;
            ++vertex_props;
        } else if (kw == "end_header") {
            header_done = true;
            break;
        }
    }
    if (!header_done || x_col < 0 || y_col < 0 || z_col < 0) {
        throw MeshLoadError("PLY: incomplete header");
    }
    std::vector<Vec3> verts;
    verts.reserve(n_vertices);
    for (std::size_t i = 0; i < n_vertices; ++i) {
        if (!std::getline(in, line)) throw MeshLoadError("PLY: truncated vertex list");
        std::istringstream ls(line);
        std::vector<double> vals(static_cast<std::size_t>(vertex_props));
        for (auto& v : vals) {
            if (!(ls >> v)) throw MeshLoadError("PLY: malformed vertex " + std::to_string(i));
        }
        verts.emplace_back(vals[static_cast<std::size_t>(x_col)], vals[static_cast<std::size_t>(y_col)],
                           vals[static_cast<std::size_t>(z_col)]);
    }
    std::vector<TriangleMesh::Triangle> tris;
    tris.reserve(n_faces);
    for (std::size_t i = 0; i < n_faces; ++i) {
        if (!std::getline(in, line)) throw MeshLoadError("PLY: truncated face list");
        std::istringstream ls(line);
        int k = 0;
        ls >> k;
        if (k != 3) {
            throw MeshLoadError("PLY face " + std::to_string(i) + " has " + std::to_string(k) +
                                " vertices (only triangles supported)");
        }
        TriangleMesh::Triangle t{};
        if (!(ls >> t[0] >> t[1] >> t[2])) throw MeshLoadError("PLY: malformed face " + std::to_string(i));
        tris.push_back(t);
    }
    return TriangleMesh(std::move(verts), std::move(tris));
}

}  // namespace

TriangleMesh load_mesh(const std::filesystem::path& path, NormalOrientation orientation) {
    std::ifstream in(path);
    if (!in) throw MeshLoadError("cannot open mesh file " + path.string());
    const auto ext = lower_ext(path);
    TriangleMesh mesh;
    try {
        if (ext == ".obj") {
            mesh = read_obj(in);
        } else if (ext == ".ply") {
            mesh = read_ply(in);
        } else {
            throw MeshLoadError("unsupported mesh extension '" + ext + "'");
        }
    } catch (const MeshLoadError& e) {
        throw MeshLoadError(path.string() + ": " + e.what());
    }
    if (mesh.empty()) throw MeshLoadError(path.string() + ": no triangles");
    return orientation == NormalOrientation::outward ? mesh.oriented_outward() : mesh;
}

void save_obj(const TriangleMesh& mesh, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.precision(9);
    out << "# " << mesh.vertices().size() << " vertices, " << mesh.size() << " triangles\n";
    for (const auto& v : mesh.vertices()) out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
    for (const auto& t : mesh.triangles()) out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

// ---------------------------------------------------------------------------
// Patches

std::vector<Patch> mesh_to_patches(const TriangleMesh& mesh) {
    std::vector<Patch> out;
    out.reserve(mesh.size());
    for (std::size_t t = 0; t < mesh.size(); ++t) out.push_back({mesh.triangle_centroid(t), mesh.normals()[t]});
    return out;
}

std::array<Patch, 5> build_cuboid(const ActorPose2D& pose, const CuboidSpec& spec) {
    spec.validate();
    const double hw = spec.width / 2, hd = spec.depth / 2, hh = spec.height / 2;
    const std::array<Patch, 5> local{{
        {{hd, 0, hh}, {1, 0, 0}},           // front
        {{-hd, 0, hh}, {-1, 0, 0}},         // back
        {{0, hw, hh}, {0, 1, 0}},           // left
        {{0, -hw, hh}, {0, -1, 0}},         // right
        {{0, 0, spec.height}, {0, 0, 1}},   // top
    }};
    std::array<Patch, 5> out;
    for (std::size_t i = 0; i < local.size(); ++i) {
        out[i] = {pose.to_world(local[i].centroid), pose.rotate(local[i].normal)};
    }
    return out;
}

std::vector<Patch> cuboid_patches(const ActorPose2D& pose, const CuboidSpec& spec) {
    const auto faces = build_cuboid(pose, spec);
    return {faces.begin(), faces.end()};
}

Vec3 cuboid_center(const ActorPose2D& pose, const CuboidSpec& spec) {
    return {pose.x, pose.y, spec.height / 2};
}

// ---------------------------------------------------------------------------
// Sequences

ActorSequence::ActorSequence(std::vector<ActorFrame> frames) : frames_(std::move(frames)) {
    if (frames_.empty()) throw std::invalid_argument("actor sequence needs at least one frame");
    for (std::size_t i = 1; i < frames_.size(); ++i) {
        if (!(frames_[i].timestamp > frames_[i - 1].timestamp)) {
            throw std::invalid_argument("actor sequence timestamps must strictly increase (frame " +
                                        std::to_string(i) + ")");
        }
    }
}

const ActorFrame& ActorSequence::pose_at(double t) const {
    if (frames_.empty() || t < frames_.front().timestamp || t > frames_.back().timestamp) {
        throw std::out_of_range("time " + std::to_string(t) + " outside the actor sequence");
    }
    auto it = std::upper_bound(frames_.begin(), frames_.end(), t,
                               [](double v, const ActorFrame& f) { return v < f.timestamp; });
    return *std::prev(it);
}

// ---------------------------------------------------------------------------
// Procedural humanoid

namespace {

class MeshBuilder {
public:
    // Tube along the polyline `axis` with per-ring radii (rx lateral, ry
    // front/back), closed by fans at both ends. Rings are perpendicular to
    // the local axis direction.
    void tube(const std::vector<Vec3>& axis, const std::vector<Vec2>& radii, int segments) {
        const int base = static_cast<int>(verts_.size());
        const int rings = static_cast<int>(axis.size());
        for (int r = 0; r < rings; ++r) {
            const Vec3 dir = (axis[static_cast<std::size_t>(std::min(r + 1, rings - 1))] -
                              axis[static_cast<std::size_t>(std::max(r - 1, 0))]).normalized();
            // Frame with e1 roughly along +x (front) and e2 along +y (left).
            Vec3 e2 = dir.cross(Vec3::UnitX());
            if (e2.norm() < 1e-6) e2 = dir.cross(Vec3::UnitZ());
            e2.normalize();
            if (e2.y() < 0) e2 = -e2;
            const Vec3 e1 = e2.cross(dir).normalized();
            for (int s = 0; s < segments; ++s) {
                const double a = 2.0 * kPi * s / segments;
                const auto& rad = radii[static_cast<std::size_t>(r)];
                verts_.push_back(axis[static_cast<std::size_t>(r)] + rad.y() * std::cos(a) * e1 +
                                 rad.x() * std::sin(a) * e2);
            }
        }
        auto at = [&](int r, int s) { return base + r * segments + (s % segments); };
        for (int r = 0; r + 1 < rings; ++r) {
            for (int s = 0; s < segments; ++s) {
                const Vec3 mid = 0.5 * (axis[static_cast<std::size_t>(r)] + axis[static_cast<std::size_t>(r + 1)]);
                add_oriented(at(r, s), at(r + 1, s), at(r + 1, s + 1), mid);
                add_oriented(at(r, s), at(r + 1, s + 1), at(r, s + 1), mid);
            }
        }
        cap(base, segments, axis.front(), axis[1]);
        cap(base + (rings - 1) * segments, segments, axis.back(), axis[axis.size() - 2]);
    }

    void ellipsoid(const Vec3& center, const Vec3& radii, int segments, int stacks) {
        const int base = static_cast<int>(verts_.size());
        verts_.push_back(center + Vec3(0, 0, radii.z()));
        for (int i = 1; i < stacks; ++i) {
            const double phi = kPi * i / stacks;
            for (int s = 0; s < segments; ++s) {
                const double th = 2.0 * kPi * s / segments;
                verts_.push_back(center + Vec3(radii.x() * std::sin(phi) * std::cos(th),
                                               radii.y() * std::sin(phi) * std::sin(th),
                                               radii.z() * std::cos(phi)));
            }
        }
        const int bottom = static_cast<int>(verts_.size());
        verts_.push_back(center - Vec3(0, 0, radii.z()));
        auto at = [&](int i, int s) { return base + 1 + (i - 1) * segments + (s % segments); };
        for (int s = 0; s < segments; ++s) add_oriented(base, at(1, s), at(1, s + 1), center);
        for (int i = 1; i + 1 < stacks; ++i) {
            for (int s = 0; s < segments; ++s) {
                add_oriented(at(i, s), at(i + 1, s), at(i + 1, s + 1), center);
                add_oriented(at(i, s), at(i + 1, s + 1), at(i, s + 1), center);
            }
        }
        for (int s = 0; s < segments; ++s) add_oriented(bottom, at(stacks - 1, s + 1), at(stacks - 1, s), center);
    }

    TriangleMesh build() { return TriangleMesh(std::move(verts_), std::move(tris_)); }

private:
    void cap(int ring_base, int segments, const Vec3& end, const Vec3& inner) {
        const int c = static_cast<int>(verts_.size());
        verts_.push_back(end);
        for (int s = 0; s < segments; ++s) {
            add_oriented(c, ring_base + s, ring_base + (s + 1) % segments, inner);
        }
    }

    // Winds the triangle so its normal points away from `inside`.
    void add_oriented(int a, int b, int c, const Vec3& inside) {
        const Vec3& pa = verts_[static_cast<std::size_t>(a)];
        const Vec3 n = (verts_[static_cast<std::size_t>(b)] - pa).cross(verts_[static_cast<std::size_t>(c)] - pa);
        const Vec3 centroid = (pa + verts_[static_cast<std::size_t>(b)] + verts_[static_cast<std::size_t>(c)]) / 3.0;
        if (n.dot(centroid - inside) < 0) std::swap(b, c);
        tris_.push_back({a, b, c});
    }

    std::vector<Vec3> verts_;
    std::vector<TriangleMesh::Triangle> tris_;
};

std::vector<Vec3> limb_axis(const Vec3& top, const Vec3& bottom_rest, double swing, int rings) {
    // Swing rotates the limb about the lateral axis through `top`.
    const Vec3 rel = bottom_rest - top;
    const Vec3 swung(rel.x() * std::cos(swing) - rel.z() * std::sin(swing), rel.y(),
                     rel.x() * std::sin(swing) + rel.z() * std::cos(swing));
    std::vector<Vec3> axis;
    for (int i = 0; i < rings; ++i) axis.push_back(top + swung * (static_cast<double>(i) / (rings - 1)));
    return axis;
}

std::vector<Vec2> taper(double r0, double r1, int rings) {
    std::vector<Vec2> out;
    for (int i = 0; i < rings; ++i) {
        const double r = r0 + (r1 - r0) * i / (rings - 1);
        out.emplace_back(r, r);
    }
    return out;
}

}  // namespace

TriangleMesh make_humanoid_mesh(const HumanoidParams& p) {
    MeshBuilder b;
    const int seg = p.radial_segments;
    const int rings = p.limb_rings;

    // Torso: elliptic tube from pelvis to shoulders, wider laterally.
    std::vector<Vec3> torso_axis;
    std::vector<Vec2> torso_r;
    const int torso_rings = rings + 2;
    for (int i = 0; i < torso_rings; ++i) {
        const double s = static_cast<double>(i) / (torso_rings - 1);
        torso_axis.emplace_back(0.0, 0.0, 0.86 + s * (1.46 - 0.86));
        const double lateral = 0.15 + 0.04 * std::sin(kPi * (0.2 + 0.8 * s));
        const double sagittal = 0.10 + 0.02 * std::sin(kPi * s);
        torso_r.emplace_back(lateral, sagittal);
    }
    b.tube(torso_axis, torso_r, seg + 8);

    b.tube({{0, 0, 1.44}, {0, 0, 1.52}, {0, 0, 1.56}}, {{0.05, 0.05}, {0.05, 0.05}, {0.05, 0.05}}, seg / 2);
    b.ellipsoid({0.01, 0.0, 1.645}, {0.1, 0.085, 0.115}, seg, seg / 2);

    for (double side : {1.0, -1.0}) {
        b.tube(limb_axis({0.0, side * 0.21, 1.42}, {0.0, side * 0.25, 0.84}, side * p.arm_swing_rad, rings),
               taper(0.048, 0.035, rings), seg / 2 + 2);
        b.tube(limb_axis({0.0, side * 0.085, 0.90}, {0.0, side * 0.055, 0.0}, -side * p.leg_swing_rad, rings),
               taper(0.075, 0.035, rings), seg / 2 + 2);
    }
    return b.build();
}

}  // namespace ppaview

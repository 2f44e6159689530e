#include "ppaview/scenario.hpp"

#include <fstream>
#include <sstream>

namespace ppaview {

std::vector<TimedPose> generate_walk(const WalkSpec& walk) {
    if (walk.frames < 1) throw ConfigError("walk_frames must be at least 1");
    if (!(walk.dt > 0.0)) throw ConfigError("walk_dt_s must be positive");
    std::vector<TimedPose> out;
    double x = walk.start.x, y = walk.start.y, yaw = walk.start.yaw;
    for (int i = 0; i < walk.frames; ++i) {
        out.push_back({i * walk.dt, ActorPose2D(x, y, yaw)});
        x += walk.speed * walk.dt * std::cos(yaw);
        y += walk.speed * walk.dt * std::sin(yaw);
        yaw += walk.turn_rate * walk.dt;
    }
    return out;
}

void Scenario::validate() const {
    if (poses.empty()) throw ConfigError("scenario has no actor poses");
    for (std::size_t i = 1; i < poses.size(); ++i) {
        if (!(poses[i].t > poses[i - 1].t)) throw ConfigError("actor pose timestamps must strictly increase");
    }
    planner.validate();
    try {
        cuboid.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (noise_pos_std < 0.0 || noise_yaw_std < 0.0) throw ConfigError("noise std must be non-negative");
    if (merge_window < 1 || merge_window > 5) throw ConfigError("merge_window_frames must be in [1, 5]");
    if (!(voxel > 0.0)) throw ConfigError("voxel_m must be positive");
    if (!(prism_height > 0.0)) throw ConfigError("prism_height_m must be positive");
    if (gt_samples < 1) throw ConfigError("gt_samples must be positive");
    if (sphere.radii.empty()) throw ConfigError("sphere_radii_m is empty");
    for (double r : sphere.radii) {
        if (!(r > 0.0)) throw ConfigError("sphere radii must be positive");
    }
    if (sphere.polar_steps < 1 || sphere.azimuth_steps < 1) throw ConfigError("sphere steps must be positive");
    if (tour_samples < 0) throw ConfigError("tour_samples must be non-negative");
}

void Scenario::set_intrinsics(const CameraIntrinsics& intr) {
    intrinsics = intr;
    planner.fov = intr.field_of_view();
}

MeshRef Scenario::load_actor_mesh() const {
    if (mesh_path == "builtin:humanoid") return std::make_shared<const TriangleMesh>(make_humanoid_mesh());
    const std::filesystem::path p = std::filesystem::path(mesh_path).is_absolute() ? std::filesystem::path(mesh_path)
                                                                                   : base_dir / mesh_path;
    if (!std::filesystem::exists(p)) throw ConfigError("mesh file not found: " + p.string());
    try {
        return std::make_shared<const TriangleMesh>(load_mesh(p, mesh_normals));
    } catch (const MeshLoadError& e) {
        throw ConfigError(e.what());
    }
}

ActorSequence Scenario::build_sequence() const { return build_sequence(load_actor_mesh()); }

ActorSequence Scenario::build_sequence(const MeshRef& mesh) const {
    std::vector<ActorFrame> frames;
    for (const auto& p : poses) frames.push_back({p.t, p.pose, mesh});
    return ActorSequence(std::move(frames));
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<double> parse_numbers(const std::string& key, const std::string& value) {
    std::string v = value;
    for (char& c : v) {
        if (c == ',') c = ' ';
    }
    std::istringstream in(v);
    std::vector<double> out;
    std::string tok;
    while (in >> tok) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw ConfigError("key '" + key + "': '" + tok + "' is not a number");
        }
    }
    return out;
}

double one_number(const std::string& key, const std::string& value) {
    const auto v = parse_numbers(key, value);
    if (v.size() != 1) throw ConfigError("key '" + key + "' expects one number");
    return v[0];
}

int one_int(const std::string& key, const std::string& value) {
    const double v = one_number(key, value);
    if (v != std::floor(v)) throw ConfigError("key '" + key + "' expects an integer");
    return static_cast<int>(v);
}

bool one_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError("key '" + key + "' expects true or false");
}

}  // namespace

Scenario parse_scenario(std::istream& in, const std::filesystem::path& base_dir) {
    Scenario sc;
    sc.base_dir = base_dir;
    WalkSpec walk;
    bool walk_used = false;
    double width = 320, height = 240, fov = 90;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        auto num = [&] { return one_number(key, value); };
        auto integer = [&] { return one_int(key, value); };

        if (key == "mesh_path") sc.mesh_path = value;
        else if (key == "mesh_normals") {
            if (value == "outward") sc.mesh_normals = NormalOrientation::outward;
            else if (value == "as_stored") sc.mesh_normals = NormalOrientation::as_stored;
            else throw ConfigError("mesh_normals must be outward or as_stored");
        } else if (key == "actor_pose") {
            const auto v = parse_numbers(key, value);
            if (v.size() != 4) throw ConfigError("actor_pose expects: t_s x_m y_m yaw_rad");
            sc.poses.push_back({v[0], ActorPose2D(v[1], v[2], v[3])});
        } else if (key == "walk_frames") walk.frames = integer(), walk_used = true;
        else if (key == "walk_dt_s") walk.dt = num(), walk_used = true;
        else if (key == "walk_speed_mps") walk.speed = num(), walk_used = true;
        else if (key == "walk_turn_rate_radps") walk.turn_rate = num(), walk_used = true;
        else if (key == "walk_start") {
            const auto v = parse_numbers(key, value);
            if (v.size() != 3) throw ConfigError("walk_start expects: x_m y_m yaw_rad");
            walk.start = ActorPose2D(v[0], v[1], v[2]);
            walk_used = true;
        } else if (key == "cuboid_width_m") sc.cuboid.width = num();
        else if (key == "cuboid_depth_m") sc.cuboid.depth = num();
        else if (key == "cuboid_height_m") sc.cuboid.height = num();
        else if (key == "image_width_px") width = integer();
        else if (key == "image_height_px") height = integer();
        else if (key == "fov_horizontal_deg") fov = num();
        else if (key == "r_safe_m") sc.planner.r_safe = num();
        else if (key == "t_max_m") sc.planner.t_max = num();
        else if (key == "delta_t") sc.planner.delta_t = num();
        else if (key == "max_halvings") sc.planner.max_halvings = integer();
        else if (key == "enum_samples") sc.planner.enum_samples = integer();
        else if (key == "orientation_mode") {
            if (value == "look_at") sc.planner.orientation = OrientationMode::look_at;
            else if (value == "free") sc.planner.orientation = OrientationMode::free;
            else throw ConfigError("orientation_mode must be look_at or free");
        } else if (key == "camera_start_m") {
            const auto v = parse_numbers(key, value);
            if (v.size() != 3) throw ConfigError("camera_start_m expects: x y z");
            sc.camera_start = Vec3(v[0], v[1], v[2]);
        } else if (key == "noise_pos_std_m") sc.noise_pos_std = num();
        else if (key == "noise_yaw_std_rad") sc.noise_yaw_std = num();
        else if (key == "noisy_estimator") {
            if (value == "noisy") sc.noisy_estimator = EstimatorKind::noisy;
            else if (value == "kalman") sc.noisy_estimator = EstimatorKind::kalman;
            else throw ConfigError("noisy_estimator must be noisy or kalman");
        } else if (key == "kf_accel_noise") sc.kf_accel_noise = num();
        else if (key == "seed") {
            const double s = num();
            if (s < 0 || s != std::floor(s)) throw ConfigError("seed must be a non-negative integer");
            sc.seed = static_cast<std::uint64_t>(s);
        } else if (key == "merge_window_frames") sc.merge_window = integer();
        else if (key == "voxel_m") sc.voxel = num();
        else if (key == "merge_use_icp") sc.merge_use_icp = one_bool(key, value);
        else if (key == "icp_corr_dist_m") sc.icp.corr_dist = num();
        else if (key == "icp_max_iters") sc.icp.max_iters = integer();
        else if (key == "prism_height_m") sc.prism_height = num();
        else if (key == "gt_samples") sc.gt_samples = static_cast<std::size_t>(std::max(0, integer()));
        else if (key == "sphere_radii_m") sc.sphere.radii = parse_numbers(key, value);
        else if (key == "sphere_polar_steps") sc.sphere.polar_steps = integer();
        else if (key == "sphere_azimuth_steps") sc.sphere.azimuth_steps = integer();
        else if (key == "sphere_polar_min_deg") sc.sphere.polar_min_rad = deg_to_rad(num());
        else if (key == "sphere_polar_max_deg") sc.sphere.polar_max_rad = deg_to_rad(num());
        else if (key == "tour_c_threshold_per_m") sc.tour_c_threshold = num();
        else if (key == "tour_samples") sc.tour_samples = integer();
        else if (key == "tour_patches") {
            if (value == "cuboid") sc.tour_use_mesh = false;
            else if (value == "mesh") sc.tour_use_mesh = true;
            else throw ConfigError("tour_patches must be cuboid or mesh");
        } else throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    if (walk_used) {
        if (!sc.poses.empty()) throw ConfigError("use either actor_pose lines or walk_* keys, not both");
        sc.poses = generate_walk(walk);
    }
    try {
        sc.set_intrinsics(CameraIntrinsics(static_cast<int>(width), static_cast<int>(height), fov));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    sc.planner.cuboid = sc.cuboid;
    sc.validate();
    return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario " + path.string());
    try {
        return parse_scenario(in, path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

}  // namespace ppaview

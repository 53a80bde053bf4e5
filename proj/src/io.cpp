#include "nilbs/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "nilbs/errors.hpp"

namespace nilbs::io {

using nlohmann::json;

namespace {

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoFailure("cannot open " + path.string());
    }
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("malformed JSON in " + path.string() + ": " + e.what());
    }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoFailure("cannot open " + path.string() + " for writing");
    }
    out << text;
    if (!out) {
        throw IoFailure("failed writing " + path.string());
    }
}

void write_json(const std::filesystem::path& path, const json& j) {
    write_text(path, j.dump(2) + "\n");
}

template <typename T>
T field(const json& j, const char* key, const std::filesystem::path& path) {
    if (!j.contains(key)) {
        throw ConfigError(path.string() + ": missing key \"" + key + "\"");
    }
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(path.string() + ": bad value for \"" + key + "\": " + e.what());
    }
}

json vec2_json(Vec2 v) { return json::array({v.x, v.y}); }

Vec2 vec2_from(const json& j, const char* key, const std::filesystem::path& path) {
    const auto arr = field<std::vector<double>>(j, key, path);
    if (arr.size() != 2) {
        throw ConfigError(path.string() + ": \"" + std::string(key) + "\" must have 2 entries");
    }
    return {arr[0], arr[1]};
}

} // namespace

void save_rig(const std::filesystem::path& path, const Rig& rig) {
    json bones = json::array();
    for (int b = 0; b < rig.bone_count(); ++b) {
        const std::size_t i = static_cast<std::size_t>(b);
        bones.push_back({{"parent", rig.parent[i]},
                         {"rest_frame", rig.rest_frames[i].m},
                         {"pivot", vec2_json(rig.pivots[i])}});
    }
    write_json(path, json{{"bones", bones}});
}

Rig load_rig(const std::filesystem::path& path) {
    const json j = read_json(path);
    if (!j.contains("bones") || !j["bones"].is_array()) {
        throw ConfigError(path.string() + ": missing \"bones\" array");
    }
    Rig rig;
    for (const json& bone : j["bones"]) {
        rig.parent.push_back(field<int>(bone, "parent", path));
        const auto entries = field<std::vector<double>>(bone, "rest_frame", path);
        if (entries.size() != 16) {
            throw ConfigError(path.string() + ": rest_frame must have 16 entries");
        }
        Transform t;
        std::copy(entries.begin(), entries.end(), t.m.begin());
        rig.rest_frames.push_back(t);
        rig.pivots.push_back(vec2_from(bone, "pivot", path));
    }
    rig.validate();
    return rig;
}

void save_mesh(const std::filesystem::path& path, const SkinnedMesh& mesh) {
    json vertices = json::array();
    for (const Vec2& v : mesh.vertices) {
        vertices.push_back(vec2_json(v));
    }
    write_json(path, json{{"vertices", vertices}, {"weights", mesh.weights}});
}

SkinnedMesh load_mesh(const std::filesystem::path& path) {
    const json j = read_json(path);
    SkinnedMesh mesh;
    for (const json& v : field<json>(j, "vertices", path)) {
        const auto arr = v.get<std::vector<double>>();
        if (arr.size() != 2) {
            throw ConfigError(path.string() + ": vertices must be [x, y] pairs");
        }
        mesh.vertices.push_back({arr[0], arr[1]});
    }
    mesh.weights = field<std::vector<std::vector<double>>>(j, "weights", path);
    for (std::size_t n = 0; n < mesh.weights.size(); ++n) {
        auto& row = mesh.weights[n];
        double sum = 0.0;
        for (double w : row) {
            if (w < 0.0) {
                throw ConfigError(path.string() + ": negative weight in row " +
                                  std::to_string(n));
            }
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-6) {
            throw ConfigError(path.string() + ": weight row " + std::to_string(n) +
                              " sums to " + std::to_string(sum));
        }
        // repair serialization drift; machine-scale deviations stay untouched
        if (std::abs(sum - 1.0) > 1e-12) {
            for (double& w : row) {
                w /= sum;
            }
        }
    }
    return mesh;
}

void save_poses(const std::filesystem::path& path, std::span<const Pose> poses) {
    json arr = json::array();
    for (const Pose& pose : poses) {
        arr.push_back({{"theta", pose.theta},
                       {"root_translation", vec2_json(pose.root_translation)}});
    }
    write_json(path, arr);
}

std::vector<Pose> load_poses(const std::filesystem::path& path) {
    const json j = read_json(path);
    if (!j.is_array()) {
        throw ConfigError(path.string() + ": expected an array of poses");
    }
    std::vector<Pose> poses;
    for (const json& rec : j) {
        Pose pose;
        pose.theta = field<std::vector<double>>(rec, "theta", path);
        pose.root_translation = vec2_from(rec, "root_translation", path);
        poses.push_back(std::move(pose));
    }
    return poses;
}

void save_dataset(const std::filesystem::path& dir, const AnimationSet& set) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw IoFailure("cannot create directory " + dir.string() + ": " + ec.message());
    }
    save_rig(dir / "rig.json", set.rig);
    save_mesh(dir / "mesh.json", set.mesh);
    save_poses(dir / "poses.json", set.poses);
    write_json(dir / "meta.json", json{{"bbox_min", vec2_json(set.bbox_min)},
                                       {"bbox_max", vec2_json(set.bbox_max)},
                                       {"seed", set.seed},
                                       {"frames", set.poses.size()}});
}

AnimationSet load_dataset(const std::filesystem::path& dir) {
    AnimationSet set;
    set.rig = load_rig(dir / "rig.json");
    set.mesh = load_mesh(dir / "mesh.json");
    set.poses = load_poses(dir / "poses.json");
    const json meta = read_json(dir / "meta.json");
    set.bbox_min = vec2_from(meta, "bbox_min", dir / "meta.json");
    set.bbox_max = vec2_from(meta, "bbox_max", dir / "meta.json");
    set.seed = field<std::uint64_t>(meta, "seed", dir / "meta.json");
    const auto frames = field<std::size_t>(meta, "frames", dir / "meta.json");
    if (frames != set.poses.size()) {
        throw ConfigError(dir.string() + ": meta frame count disagrees with poses.json");
    }
    set.validate();
    return set;
}

void save_grid(const std::filesystem::path& path, const OccupancyGrid& grid) {
    write_json(path, json{{"bbox_min", vec2_json(grid.bbox_min)},
                          {"bbox_max", vec2_json(grid.bbox_max)},
                          {"resolution", {grid.nx, grid.ny}},
                          {"values", grid.values}});
}

OccupancyGrid load_grid(const std::filesystem::path& path) {
    const json j = read_json(path);
    OccupancyGrid grid;
    grid.bbox_min = vec2_from(j, "bbox_min", path);
    grid.bbox_max = vec2_from(j, "bbox_max", path);
    const auto res = field<std::vector<int>>(j, "resolution", path);
    if (res.size() != 2) {
        throw ConfigError(path.string() + ": resolution must have 2 entries");
    }
    grid.nx = res[0];
    grid.ny = res[1];
    grid.values = field<std::vector<double>>(j, "values", path);
    grid.validate();
    return grid;
}

void save_checkpoint(const std::filesystem::path& path, const WeightNetParams& params) {
    json layers = json::array();
    for (const DenseLayer& layer : params.layers) {
        layers.push_back({{"w", layer.w}, {"b", layer.b}});
    }
    write_json(path, json{{"layer_sizes", params.layer_sizes},
                          {"layers", layers},
                          {"seed", params.seed}});
}

WeightNetParams load_checkpoint(const std::filesystem::path& path) {
    const json j = read_json(path);
    WeightNetParams params;
    params.layer_sizes = field<std::vector<int>>(j, "layer_sizes", path);
    params.seed = field<std::uint64_t>(j, "seed", path);
    if (params.layer_sizes.size() < 2) {
        throw ConfigError(path.string() + ": need at least two layer sizes");
    }
    const json layers = field<json>(j, "layers", path);
    if (!layers.is_array() || layers.size() + 1 != params.layer_sizes.size()) {
        throw ConfigError(path.string() + ": layer count does not match layer_sizes");
    }
    for (std::size_t l = 0; l < layers.size(); ++l) {
        DenseLayer layer;
        layer.in = params.layer_sizes[l];
        layer.out = params.layer_sizes[l + 1];
        layer.w = field<std::vector<double>>(layers[l], "w", path);
        layer.b = field<std::vector<double>>(layers[l], "b", path);
        params.layers.push_back(std::move(layer));
    }
    try {
        params.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return params;
}

namespace {

std::string trim(const std::string& s) {
    const auto from = s.find_first_not_of(" \t\r");
    if (from == std::string::npos) {
        return "";
    }
    const auto to = s.find_last_not_of(" \t\r");
    return s.substr(from, to - from + 1);
}

template <typename T>
T parse_scalar(const std::string& value, const std::string& key) {
    std::istringstream in(value);
    T out;
    in >> out;
    if (!in || !(in >> std::ws).eof()) {
        throw ConfigError("config key \"" + key + "\" has bad value \"" + value + "\"");
    }
    return out;
}

std::vector<int> parse_int_list(const std::string& value, const std::string& key) {
    std::istringstream in(value);
    std::vector<int> out;
    int v = 0;
    while (in >> v) {
        out.push_back(v);
    }
    if (!in.eof() || out.empty()) {
        throw ConfigError("config key \"" + key + "\" has bad value \"" + value + "\"");
    }
    return out;
}

} // namespace

TrainConfig load_train_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoFailure("cannot open " + path.string());
    }
    TrainConfig config;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path.string() + ": expected \"key = value\", got \"" + line +
                              "\"");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "steps") {
            config.steps = parse_scalar<int>(value, key);
        } else if (key == "batch_poses") {
            config.batch_poses = parse_scalar<int>(value, key);
        } else if (key == "points_per_pose") {
            config.points_per_pose = parse_scalar<int>(value, key);
        } else if (key == "learning_rate") {
            config.learning_rate = parse_scalar<double>(value, key);
        } else if (key == "lambda_weights") {
            config.lambda_weights = parse_scalar<double>(value, key);
        } else if (key == "seed") {
            config.seed = parse_scalar<std::uint64_t>(value, key);
        } else if (key == "grid_resolution") {
            const auto res = parse_int_list(value, key);
            if (res.size() != 2) {
                throw ConfigError("grid_resolution needs exactly two values");
            }
            config.grid_nx = res[0];
            config.grid_ny = res[1];
        } else if (key == "adam_beta1") {
            config.adam_beta1 = parse_scalar<double>(value, key);
        } else if (key == "adam_beta2") {
            config.adam_beta2 = parse_scalar<double>(value, key);
        } else if (key == "adam_epsilon") {
            config.adam_epsilon = parse_scalar<double>(value, key);
        } else if (key == "hidden_sizes") {
            config.hidden_sizes = parse_int_list(value, key);
        } else if (key == "ablate_ghost") {
            config.ablate_ghost = parse_scalar<int>(value, key) != 0;
        } else {
            throw ConfigError(path.string() + ": unknown config key \"" + key + "\"");
        }
    }
    config.validate();
    return config;
}

void save_report_csv(const std::filesystem::path& path, const TrainReport& report) {
    std::ostringstream out;
    out << "step,loss_occ,loss_w,singular_count\n";
    char buffer[128];
    for (const StepRecord& rec : report.steps) {
        std::snprintf(buffer, sizeof(buffer), "%d,%.17g,%.17g,%llu\n", rec.step,
                      rec.loss_occ, rec.loss_w,
                      static_cast<unsigned long long>(rec.singular_count));
        out << buffer;
    }
    write_text(path, out.str());
}

void save_iou_json(const std::filesystem::path& path, std::span<const double> iou) {
    write_json(path, json(std::vector<double>(iou.begin(), iou.end())));
}

void write_pgm(const std::filesystem::path& path, const OccupancyGrid& grid) {
    std::ostringstream out;
    out << "P2\n" << grid.nx << " " << grid.ny << "\n255\n";
    for (int iy = grid.ny - 1; iy >= 0; --iy) {
        for (int ix = 0; ix < grid.nx; ++ix) {
            const double v = std::clamp(grid.at(ix, iy), 0.0, 1.0);
            out << static_cast<int>(std::lround(v * 255.0));
            out << (ix + 1 == grid.nx ? '\n' : ' ');
        }
    }
    write_text(path, out.str());
}

} // namespace nilbs::io

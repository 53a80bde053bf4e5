#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nilbs/deform.hpp"
#include "nilbs/errors.hpp"
#include "nilbs/gingerbread.hpp"
#include "nilbs/io.hpp"
#include "nilbs/occupancy.hpp"
#include "nilbs/trainer.hpp"

namespace {

using namespace nilbs;

namespace fs = std::filesystem;

int cmd_gen(const std::string& out_dir, int frames, std::uint64_t seed) {
    const AnimationSet set = make_animation_set(frames, seed);
    io::save_dataset(out_dir, set);
    std::printf("wrote %d-frame dataset to %s\n", set.frame_count(), out_dir.c_str());
    return 0;
}

int cmd_bake(const std::string& data_dir, int res, const std::string& out_file) {
    const AnimationSet set = io::load_dataset(data_dir);
    const OccupancyGrid grid =
        bake_grid(set.mesh.vertices, set.bbox_min, set.bbox_max, res, res);
    io::save_grid(out_file, grid);
    std::printf("baked %dx%d rest occupancy to %s\n", res, res, out_file.c_str());
    return 0;
}

int cmd_train(const std::string& data_dir, const std::string& grid_file,
              const std::string& config_file, const std::string& out_dir,
              bool ablate_ghost) {
    const AnimationSet set = io::load_dataset(data_dir);
    const OccupancyGrid grid = io::load_grid(grid_file);
    TrainConfig config = io::load_train_config(config_file);
    if (ablate_ghost) {
        config.ablate_ghost = true;
    }

    const TrainResult result = train(config, set, grid);

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) {
        throw IoFailure("cannot create directory " + out_dir + ": " + ec.message());
    }
    io::save_checkpoint(fs::path(out_dir) / "checkpoint.json", result.params);
    io::save_report_csv(fs::path(out_dir) / "report.csv", result.report);
    io::save_iou_json(fs::path(out_dir) / "iou.json", result.report.final_iou);

    double mean_iou = 0.0;
    for (double v : result.report.final_iou) {
        mean_iou += v;
    }
    mean_iou /= static_cast<double>(result.report.final_iou.size());
    std::printf("trained %d steps; mean IoU over %zu poses: %.4f\n", config.steps,
                result.report.final_iou.size(), mean_iou);
    return 0;
}

void check_checkpoint_matches(const WeightNetParams& params, const Rig& rig) {
    if (params.input_dim() != 3 * rig.bone_count() ||
        params.output_dim() != rig.bone_count() + 1) {
        throw ConfigError("checkpoint dimensions do not match the rig bone count");
    }
}

int cmd_eval(const std::string& checkpoint_file, const std::string& data_dir,
             const std::string& grid_file, int res, const std::string& out_file,
             bool ablate_ghost) {
    const AnimationSet set = io::load_dataset(data_dir);
    const OccupancyGrid grid = io::load_grid(grid_file);
    const WeightNetParams params = io::load_checkpoint(checkpoint_file);
    check_checkpoint_matches(params, set.rig);

    std::vector<double> iou;
    double mean = 0.0;
    for (int t = 0; t < set.frame_count(); ++t) {
        iou.push_back(evaluate_iou(params, set, grid, t, res, res, ablate_ghost));
        std::printf("pose %d: IoU %.4f\n", t, iou.back());
        mean += iou.back();
    }
    mean /= static_cast<double>(set.frame_count());
    std::printf("mean IoU: %.4f\n", mean);
    if (!out_file.empty()) {
        io::save_iou_json(out_file, iou);
    }
    return 0;
}

int cmd_render(const std::string& checkpoint_file, const std::string& data_dir,
               const std::string& grid_file, int pose_index, int res,
               const std::string& out_file, bool render_gt, bool ablate_ghost) {
    const AnimationSet set = io::load_dataset(data_dir);
    if (pose_index < 0 || pose_index >= set.frame_count()) {
        throw IndexOutOfRange("pose index " + std::to_string(pose_index) +
                              " outside dataset with " +
                              std::to_string(set.frame_count()) + " frames");
    }
    if (res < 2) {
        throw InvalidResolution("render resolution must be at least 2");
    }

    OccupancyGrid image;
    image.bbox_min = set.bbox_min;
    image.bbox_max = set.bbox_max;
    image.nx = res;
    image.ny = res;
    image.values.resize(static_cast<std::size_t>(res) * res);

    const PoseCache cache =
        make_pose_cache(set.rig, set.mesh, set.poses[static_cast<std::size_t>(pose_index)]);
    if (render_gt) {
        for (int iy = 0; iy < res; ++iy) {
            for (int ix = 0; ix < res; ++ix) {
                image.values[static_cast<std::size_t>(iy) * res + ix] =
                    point_in_polygon(cache.polygon, image.node_position(ix, iy));
            }
        }
    } else {
        const OccupancyGrid grid = io::load_grid(grid_file);
        const WeightNetParams params = io::load_checkpoint(checkpoint_file);
        check_checkpoint_matches(params, set.rig);
        const PosedOccupancyOptions options{!ablate_ghost};
        for (int iy = 0; iy < res; ++iy) {
            for (int ix = 0; ix < res; ++ix) {
                image.values[static_cast<std::size_t>(iy) * res + ix] = corrected_occupancy(
                    params, cache.frames, grid, image.node_position(ix, iy), options);
            }
        }
    }
    io::write_pgm(out_file, image);
    std::printf("rendered pose %d at %dx%d to %s\n", pose_index, res, res,
                out_file.c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"neural inverse linear blend skinning for 2D characters"};
    app.require_subcommand(1);

    std::string out_dir, data_dir, grid_file, config_file, checkpoint_file, out_file;
    int frames = 100;
    std::uint64_t seed = 1;
    int res = 128;
    int pose_index = 0;
    bool render_gt = false;
    bool ablate_ghost = false;

    auto* gen = app.add_subcommand("gen", "generate a gingerbread dataset");
    gen->add_option("--out", out_dir, "output dataset directory")->required();
    gen->add_option("--frames", frames, "animation frame count");
    gen->add_option("--seed", seed, "random seed");

    auto* bake = app.add_subcommand("bake", "bake the rest-pose occupancy grid");
    bake->add_option("--data", data_dir, "dataset directory")->required();
    bake->add_option("--res", res, "grid resolution per axis");
    bake->add_option("--out", out_file, "output grid file")->required();

    auto* train = app.add_subcommand("train", "train the weight field");
    train->add_option("--data", data_dir, "dataset directory")->required();
    train->add_option("--grid", grid_file, "baked rest grid")->required();
    train->add_option("--config", config_file, "key = value training config")->required();
    train->add_option("--out", out_dir, "output directory")->required();
    train->add_flag("--ablate-ghost", ablate_ghost,
                    "disable the background corrective factor");

    auto* eval = app.add_subcommand("eval", "per-pose IoU of a checkpoint");
    eval->add_option("--checkpoint", checkpoint_file, "trained checkpoint")->required();
    eval->add_option("--data", data_dir, "dataset directory")->required();
    eval->add_option("--grid", grid_file, "baked rest grid")->required();
    eval->add_option("--res", res, "evaluation resolution per axis");
    eval->add_option("--out", out_file, "optional IoU JSON output");
    eval->add_flag("--ablate-ghost", ablate_ghost,
                   "disable the background corrective factor");

    auto* render = app.add_subcommand("render", "render an occupancy image");
    render->add_option("--checkpoint", checkpoint_file, "trained checkpoint");
    render->add_option("--data", data_dir, "dataset directory")->required();
    render->add_option("--grid", grid_file, "baked rest grid");
    render->add_option("--pose", pose_index, "pose index")->required();
    render->add_option("--res", res, "image resolution per axis");
    render->add_option("--out", out_file, "output PGM file")->required();
    render->add_flag("--gt", render_gt, "render the ground truth instead");
    render->add_flag("--ablate-ghost", ablate_ghost,
                     "disable the background corrective factor");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            return cmd_gen(out_dir, frames, seed);
        }
        if (bake->parsed()) {
            return cmd_bake(data_dir, res, out_file);
        }
        if (train->parsed()) {
            return cmd_train(data_dir, grid_file, config_file, out_dir, ablate_ghost);
        }
        if (eval->parsed()) {
            return cmd_eval(checkpoint_file, data_dir, grid_file, res, out_file,
                            ablate_ghost);
        }
        if (render->parsed()) {
            if (!render_gt && (checkpoint_file.empty() || grid_file.empty())) {
                throw ConfigError("render needs --checkpoint and --grid unless --gt is set");
            }
            return cmd_render(checkpoint_file, data_dir, grid_file, pose_index, res,
                              out_file, render_gt, ablate_ghost);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}

#pragma once

#include <filesystem>
#include <span>
#include <string>

#include "nilbs/gingerbread.hpp"
#include "nilbs/occupancy.hpp"
#include "nilbs/trainer.hpp"
#include "nilbs/weight_net.hpp"

namespace nilbs::io {

// All structured data is JSON; images are ASCII PGM (P2). Readers throw
// IoFailure for filesystem problems and ConfigError for malformed content.

void save_rig(const std::filesystem::path& path, const Rig& rig);
Rig load_rig(const std::filesystem::path& path);

void save_mesh(const std::filesystem::path& path, const SkinnedMesh& mesh);
// Weight rows off the simplex by at most 1e-6 are renormalized; anything
// worse is rejected.
SkinnedMesh load_mesh(const std::filesystem::path& path);

void save_poses(const std::filesystem::path& path, std::span<const Pose> poses);
std::vector<Pose> load_poses(const std::filesystem::path& path);

void save_dataset(const std::filesystem::path& dir, const AnimationSet& set);
AnimationSet load_dataset(const std::filesystem::path& dir);

void save_grid(const std::filesystem::path& path, const OccupancyGrid& grid);
OccupancyGrid load_grid(const std::filesystem::path& path);

void save_checkpoint(const std::filesystem::path& path, const WeightNetParams& params);
WeightNetParams load_checkpoint(const std::filesystem::path& path);

// flat "key = value" lines; '#' starts a comment; unknown keys are rejected
TrainConfig load_train_config(const std::filesystem::path& path);

void save_report_csv(const std::filesystem::path& path, const TrainReport& report);
void save_iou_json(const std::filesystem::path& path, std::span<const double> iou);

// P2 header "P2\n<w> <h>\n255", rows written top to bottom, values scaled
// from [0,1] to 0..255.
void write_pgm(const std::filesystem::path& path, const OccupancyGrid& grid);

} // namespace nilbs::io

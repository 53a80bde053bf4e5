#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nilbs/deform.hpp"
#include "nilbs/gingerbread.hpp"
#include "nilbs/rng.hpp"

namespace nilbs {

struct TrainConfig {
    int steps = 12000;
    int batch_poses = 4;
    int points_per_pose = 128;
    double learning_rate = 1e-3;
    double lambda_weights = 1.0;
    std::uint64_t seed = 1;
    int grid_nx = 128;
    int grid_ny = 128;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    std::vector<int> hidden_sizes{64, 64, 64};
    bool ablate_ghost = false;

    void validate() const; // throws ConfigError
};

struct StepRecord {
    int step = 0;
    double loss_occ = 0.0;
    double loss_w = 0.0;
    std::uint64_t singular_count = 0;
};

struct TrainReport {
    std::vector<StepRecord> steps;
    std::vector<double> final_iou; // one entry per training pose
};

struct TrainResult {
    WeightNetParams params;
    TrainReport report;
};

// Per-pose quantities reused across samples: ghosted frames and the
// LBS-deformed polygon the ground truth is measured against.
struct PoseCache {
    GhostedFrames frames;
    std::vector<Vec2> polygon;
};

PoseCache make_pose_cache(const Rig& rig, const SkinnedMesh& mesh, const Pose& pose);

// Half the points are uniform over the bbox; the other half are Gaussian
// perturbations (sigma = 2% of the bbox diagonal) of points drawn uniformly
// by length from the polygon boundary. The uniform half comes first.
std::vector<Vec2> sample_points(Vec2 bbox_min, Vec2 bbox_max,
                                std::span<const Vec2> boundary, int n, Rng& rng);

struct SampleBatch {
    struct Entry {
        const PoseCache* cache = nullptr;
        std::vector<Vec2> points;
    };
    std::vector<Entry> entries;
};

// Mean absolute difference between the predicted and ground-truth occupancy,
// averaged per pose over its non-singular samples, then averaged over poses.
// Singular samples are skipped and counted.
double loss_occupancy(const WeightNetParams& params, const OccupancyGrid& grid,
                      const SampleBatch& batch, bool ablate_ghost,
                      std::uint64_t* singular_count);

// Same value, also accumulating d(loss)/d(params) scaled by `scale`.
double loss_occupancy_grad(const WeightNetParams& params, const OccupancyGrid& grid,
                           const SampleBatch& batch, bool ablate_ghost, double scale,
                           NetGrads& grads, std::uint64_t* singular_count);

// Mean cross-entropy between predicted weights at the rest encoding of each
// vertex and its painted weight row (padded with a zero background target).
double loss_weights(const WeightNetParams& params, const SkinnedMesh& mesh, const Rig& rig);

double loss_weights_grad(const WeightNetParams& params, const SkinnedMesh& mesh,
                         const Rig& rig, double scale, NetGrads& grads);

// Jointly minimizes the occupancy and weight losses with adaptive-moment
// updates. Deterministic per seed. Throws DivergedTraining when the loss
// becomes non-finite.
TrainResult train(const TrainConfig& config, const AnimationSet& animation,
                  const OccupancyGrid& rest_grid);

// IoU between the thresholded prediction (>= 0.5) and the ground truth on an
// inclusive node lattice over the animation bbox; 1 when both sets are empty.
double evaluate_iou(const WeightNetParams& params, const AnimationSet& animation,
                    const OccupancyGrid& rest_grid, int pose_index, int eval_nx,
                    int eval_ny, bool ablate_ghost = false);

// Intersection over union of two binary masks; 1 when both are empty.
double mask_iou(std::span<const char> a, std::span<const char> b);

} // namespace nilbs

#include "nilbs/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nilbs/errors.hpp"
#include "nilbs/occupancy.hpp"

namespace nilbs {

void TrainConfig::validate() const {
    if (steps < 1 || batch_poses < 1 || points_per_pose < 1) {
        throw ConfigError("steps, batch_poses and points_per_pose must be positive");
    }
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        throw ConfigError("learning_rate must be finite and non-negative");
    }
    if (!(lambda_weights >= 0.0) || !std::isfinite(lambda_weights)) {
        throw ConfigError("lambda_weights must be finite and non-negative");
    }
    if (grid_nx < 2 || grid_ny < 2) {
        throw ConfigError("grid resolution must be at least 2 per axis");
    }
    if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) ||
        !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
        throw ConfigError("moment decay factors must lie in [0, 1)");
    }
    if (!(adam_epsilon > 0.0)) {
        throw ConfigError("adam_epsilon must be positive");
    }
    if (hidden_sizes.empty()) {
        throw ConfigError("at least one hidden layer is required");
    }
    for (int h : hidden_sizes) {
        if (h < 1) {
            throw ConfigError("hidden layer sizes must be positive");
        }
    }
}

PoseCache make_pose_cache(const Rig& rig, const SkinnedMesh& mesh, const Pose& pose) {
    PoseCache cache;
    const std::vector<Transform> posed = pose_fn(rig, pose);
    cache.frames = augment_ghost(rig.rest_frames, posed);
    cache.polygon = skin_mesh_posed(mesh, rig.rest_frames, posed);
    return cache;
}

std::vector<Vec2> sample_points(Vec2 bbox_min, Vec2 bbox_max,
                                std::span<const Vec2> boundary, int n, Rng& rng) {
    std::vector<Vec2> points;
    points.reserve(static_cast<std::size_t>(n));
    const int n_uniform = n / 2;
    for (int i = 0; i < n_uniform; ++i) {
        points.push_back({rng.uniform(bbox_min.x, bbox_max.x),
                          rng.uniform(bbox_min.y, bbox_max.y)});
    }

    // cumulative edge lengths for a length-uniform boundary draw
    std::vector<double> cumulative(boundary.size() + 1, 0.0);
    for (std::size_t i = 0; i < boundary.size(); ++i) {
        const Vec2 a = boundary[i];
        const Vec2 b = boundary[(i + 1) % boundary.size()];
        cumulative[i + 1] = cumulative[i] + norm(b - a);
    }
    const double total = cumulative.back();
    const double sigma = 0.02 * norm(bbox_max - bbox_min);
    for (int i = n_uniform; i < n; ++i) {
        if (boundary.size() < 2 || total <= 0.0) {
            points.push_back({rng.uniform(bbox_min.x, bbox_max.x),
                              rng.uniform(bbox_min.y, bbox_max.y)});
            continue;
        }
        const double r = rng.uniform(0.0, total);
        const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), r);
        const std::size_t edge =
            std::min(boundary.size() - 1,
                     static_cast<std::size_t>(it - cumulative.begin()) - 1);
        const Vec2 a = boundary[edge];
        const Vec2 b = boundary[(edge + 1) % boundary.size()];
        const double len = cumulative[edge + 1] - cumulative[edge];
        const double t = len > 0.0 ? (r - cumulative[edge]) / len : 0.0;
        const Vec2 on_edge = a + t * (b - a);
        // perturbation truncated at 3 sigma so samples stay near the bbox
        const double dx = std::clamp(rng.normal(), -3.0, 3.0);
        const double dy = std::clamp(rng.normal(), -3.0, 3.0);
        points.push_back({on_edge.x + sigma * dx, on_edge.y + sigma * dy});
    }
    return points;
}

namespace {

struct PoseForward {
    std::vector<OccupancyWork> works;
    std::vector<double> gt;
    int valid = 0;
    double loss_sum = 0.0;
};

PoseForward forward_pose(const WeightNetParams& params, const OccupancyGrid& grid,
                         const SampleBatch::Entry& entry, bool ablate_ghost,
                         std::uint64_t* singular_count) {
    PoseForward fwd;
    fwd.works.resize(entry.points.size());
    fwd.gt.resize(entry.points.size());
    const PosedOccupancyOptions options{!ablate_ghost};
    for (std::size_t i = 0; i < entry.points.size(); ++i) {
        OccupancyWork& work = fwd.works[i];
        if (!eval_corrected(params, entry.cache->frames, grid, entry.points[i], options,
                            work)) {
            if (singular_count) {
                ++*singular_count;
            }
            continue;
        }
        fwd.gt[i] =
            static_cast<double>(point_in_polygon(entry.cache->polygon, entry.points[i]));
        fwd.loss_sum += std::abs(work.value - fwd.gt[i]);
        ++fwd.valid;
    }
    return fwd;
}

double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

} // namespace

double loss_occupancy(const WeightNetParams& params, const OccupancyGrid& grid,
                      const SampleBatch& batch, bool ablate_ghost,
                      std::uint64_t* singular_count) {
    if (batch.entries.empty()) {
        throw ConfigError("occupancy loss needs a nonempty batch");
    }
    double total = 0.0;
    for (const auto& entry : batch.entries) {
        const PoseForward fwd =
            forward_pose(params, grid, entry, ablate_ghost, singular_count);
        if (fwd.valid > 0) {
            total += fwd.loss_sum / fwd.valid;
        }
    }
    return total / static_cast<double>(batch.entries.size());
}

double loss_occupancy_grad(const WeightNetParams& params, const OccupancyGrid& grid,
                           const SampleBatch& batch, bool ablate_ghost, double scale,
                           NetGrads& grads, std::uint64_t* singular_count) {
    if (batch.entries.empty()) {
        throw ConfigError("occupancy loss needs a nonempty batch");
    }
    double total = 0.0;
    const double pose_norm = 1.0 / static_cast<double>(batch.entries.size());
    for (const auto& entry : batch.entries) {
        const PoseForward fwd =
            forward_pose(params, grid, entry, ablate_ghost, singular_count);
        if (fwd.valid == 0) {
            continue;
        }
        total += fwd.loss_sum / fwd.valid;
        const double norm = scale * pose_norm / fwd.valid;
        for (std::size_t i = 0; i < fwd.works.size(); ++i) {
            const OccupancyWork& work = fwd.works[i];
            if (work.singular) {
                continue;
            }
            const double upstream = norm * sign_of(work.value - fwd.gt[i]);
            if (upstream != 0.0) {
                backward_corrected(params, entry.cache->frames, upstream, work, grads);
            }
        }
    }
    return total * pose_norm;
}

namespace {

constexpr double kCrossEntropyEps = 1e-12;

std::vector<double> padded_target(const std::vector<double>& painted) {
    std::vector<double> target(painted.size() + 1, 0.0);
    double sum = 0.0;
    for (std::size_t b = 0; b < painted.size(); ++b) {
        target[b] = painted[b];
        sum += painted[b];
    }
    // background target stays zero: surface vertices belong to real bones
    if (std::abs(sum - 1.0) > 1e-6) {
        for (double& t : target) {
            t /= sum;
        }
    }
    return target;
}

} // namespace

double loss_weights(const WeightNetParams& params, const SkinnedMesh& mesh, const Rig& rig) {
    const std::vector<Transform> inv_rest = invert_all(rig.rest_frames);
    double total = 0.0;
    for (std::size_t n = 0; n < mesh.vertices.size(); ++n) {
        const std::vector<double> enc = encode_query_pre(inv_rest, mesh.vertices[n]);
        const std::vector<double> soft = softmax(mlp_forward(params, enc));
        const std::vector<double> target = padded_target(mesh.weights[n]);
        for (std::size_t c = 0; c < soft.size(); ++c) {
            if (target[c] != 0.0) {
                total -= target[c] * std::log(soft[c] + kCrossEntropyEps);
            }
        }
    }
    return total / static_cast<double>(mesh.vertices.size());
}

double loss_weights_grad(const WeightNetParams& params, const SkinnedMesh& mesh,
                         const Rig& rig, double scale, NetGrads& grads) {
    const std::vector<Transform> inv_rest = invert_all(rig.rest_frames);
    const double norm = 1.0 / static_cast<double>(mesh.vertices.size());
    double total = 0.0;
    ForwardTape tape;
    for (std::size_t n = 0; n < mesh.vertices.size(); ++n) {
        const std::vector<double> enc = encode_query_pre(inv_rest, mesh.vertices[n]);
        const std::vector<double> soft = softmax(mlp_forward(params, enc, &tape));
        const std::vector<double> target = padded_target(mesh.weights[n]);
        std::vector<double> soft_grad(soft.size(), 0.0);
        for (std::size_t c = 0; c < soft.size(); ++c) {
            if (target[c] != 0.0) {
                total -= target[c] * std::log(soft[c] + kCrossEntropyEps);
                soft_grad[c] = -scale * norm * target[c] / (soft[c] + kCrossEntropyEps);
            }
        }
        const std::vector<double> logit_grad = softmax_backward(soft, soft_grad);
        mlp_backward(params, tape, logit_grad, grads);
    }
    return total * norm;
}

namespace {

struct AdamState {
    NetGrads m;
    NetGrads v;
    int t = 0;
};

void adam_update(WeightNetParams& params, const NetGrads& grads, AdamState& state,
                 const TrainConfig& config) {
    ++state.t;
    const double bias1 = 1.0 - std::pow(config.adam_beta1, state.t);
    const double bias2 = 1.0 - std::pow(config.adam_beta2, state.t);
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        auto step = [&](std::vector<double>& p, const std::vector<double>& g,
                        std::vector<double>& m, std::vector<double>& v) {
            for (std::size_t i = 0; i < p.size(); ++i) {
                m[i] = config.adam_beta1 * m[i] + (1.0 - config.adam_beta1) * g[i];
                v[i] = config.adam_beta2 * v[i] + (1.0 - config.adam_beta2) * g[i] * g[i];
                const double m_hat = m[i] / bias1;
                const double v_hat = v[i] / bias2;
                p[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.adam_epsilon);
            }
        };
        step(params.layers[l].w, grads.layers[l].w, state.m.layers[l].w, state.v.layers[l].w);
        step(params.layers[l].b, grads.layers[l].b, state.m.layers[l].b, state.v.layers[l].b);
    }
}

} // namespace

TrainResult train(const TrainConfig& config, const AnimationSet& animation,
                  const OccupancyGrid& rest_grid) {
    config.validate();
    rest_grid.validate();

    const int bones = animation.rig.bone_count();
    std::vector<int> sizes;
    sizes.push_back(3 * bones);
    sizes.insert(sizes.end(), config.hidden_sizes.begin(), config.hidden_sizes.end());
    sizes.push_back(bones + 1);

    TrainResult result;
    result.params = WeightNetParams::init(sizes, config.seed);

    std::vector<PoseCache> caches;
    caches.reserve(animation.poses.size());
    for (const Pose& pose : animation.poses) {
        caches.push_back(make_pose_cache(animation.rig, animation.mesh, pose));
    }

    Rng rng(config.seed ^ 0x9e3779b97f4a7c15ull);
    NetGrads grads = NetGrads::zeros_like(result.params);
    AdamState adam{NetGrads::zeros_like(result.params), NetGrads::zeros_like(result.params)};
    result.report.steps.reserve(static_cast<std::size_t>(config.steps));

    const int pose_count = animation.frame_count();
    for (int step = 1; step <= config.steps; ++step) {
        grads.zero();
        std::uint64_t singular = 0;

        SampleBatch batch;
        batch.entries.resize(static_cast<std::size_t>(config.batch_poses));
        for (auto& entry : batch.entries) {
            const int id = rng.uniform_int(0, pose_count - 1);
            entry.cache = &caches[static_cast<std::size_t>(id)];
            entry.points = sample_points(animation.bbox_min, animation.bbox_max,
                                         entry.cache->polygon, config.points_per_pose, rng);
        }

        const double occ = loss_occupancy_grad(result.params, rest_grid, batch,
                                               config.ablate_ghost, 1.0, grads, &singular);
        const double wts = loss_weights_grad(result.params, animation.mesh, animation.rig,
                                             config.lambda_weights, grads);
        if (!std::isfinite(occ) || !std::isfinite(wts)) {
            throw DivergedTraining("loss became non-finite at step " + std::to_string(step));
        }

        adam_update(result.params, grads, adam, config);
        result.report.steps.push_back({step, occ, wts, singular});
    }

    result.report.final_iou.reserve(animation.poses.size());
    for (int t = 0; t < pose_count; ++t) {
        result.report.final_iou.push_back(evaluate_iou(result.params, animation, rest_grid,
                                                       t, config.grid_nx, config.grid_ny,
                                                       config.ablate_ghost));
    }
    return result;
}

double mask_iou(std::span<const char> a, std::span<const char> b) {
    if (a.size() != b.size()) {
        throw ConfigError("mask sizes differ");
    }
    std::size_t inter = 0;
    std::size_t uni = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const bool in_a = a[i] != 0;
        const bool in_b = b[i] != 0;
        inter += (in_a && in_b) ? 1 : 0;
        uni += (in_a || in_b) ? 1 : 0;
    }
    if (uni == 0) {
        return 1.0;
    }
    return static_cast<double>(inter) / static_cast<double>(uni);
}

double evaluate_iou(const WeightNetParams& params, const AnimationSet& animation,
                    const OccupancyGrid& rest_grid, int pose_index, int eval_nx,
                    int eval_ny, bool ablate_ghost) {
    if (eval_nx < 2 || eval_ny < 2) {
        throw InvalidResolution("evaluation resolution must be at least 2 per axis");
    }
    if (pose_index < 0 || pose_index >= animation.frame_count()) {
        throw IndexOutOfRange("pose index " + std::to_string(pose_index) +
                              " outside dataset");
    }
    const PoseCache cache = make_pose_cache(animation.rig, animation.mesh,
                                            animation.poses[static_cast<std::size_t>(pose_index)]);
    const PosedOccupancyOptions options{!ablate_ghost};
    const std::size_t total =
        static_cast<std::size_t>(eval_nx) * static_cast<std::size_t>(eval_ny);
    std::vector<char> pred(total, 0);
    std::vector<char> truth(total, 0);
    const double sx = (animation.bbox_max.x - animation.bbox_min.x) / (eval_nx - 1);
    const double sy = (animation.bbox_max.y - animation.bbox_min.y) / (eval_ny - 1);
    std::size_t idx = 0;
    for (int iy = 0; iy < eval_ny; ++iy) {
        for (int ix = 0; ix < eval_nx; ++ix, ++idx) {
            const Vec2 p{animation.bbox_min.x + ix * sx, animation.bbox_min.y + iy * sy};
            const double value =
                corrected_occupancy(params, cache.frames, rest_grid, p, options);
            pred[idx] = value >= 0.5 ? 1 : 0;
            truth[idx] = point_in_polygon(cache.polygon, p) ? 1 : 0;
        }
    }
    return mask_iou(pred, truth);
}

} // namespace nilbs

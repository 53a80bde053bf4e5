#include "nilbs/deform.hpp"

#include <cmath>

#include "nilbs/errors.hpp"

namespace nilbs {

GhostedFrames augment_ghost(std::span<const Transform> rest,
                            std::span<const Transform> posed) {
    if (rest.empty() || rest.size() != posed.size()) {
        throw ConfigError("ghost augmentation needs nonempty frame lists of equal length");
    }
    GhostedFrames gf;
    gf.real_bones = static_cast<int>(rest.size());
    gf.rest.assign(rest.begin(), rest.end());
    gf.posed.assign(posed.begin(), posed.end());
    gf.rest.push_back(rest[0]);
    gf.posed.push_back(posed[0]);
    gf.skin = skinning_transforms(gf.rest, gf.posed);
    gf.inv_posed = invert_all(posed);
    return gf;
}

Vec2 forward_map(const WeightNetParams& params, std::span<const Transform> rest_frames,
                 std::span<const Transform> posed_frames, Vec2 rest_point) {
    const GhostedFrames gf = augment_ghost(rest_frames, posed_frames);
    // weights come from the rest encoding of the point
    const std::vector<double> w = weights_at(params, rest_frames, rest_point);
    const Transform blended = blend_matrices(w, gf.skin);
    return blended.apply_point(rest_point);
}

Vec2 inverse_map(const WeightNetParams& params, const GhostedFrames& frames,
                 Vec2 posed_point) {
    const std::vector<double> enc = encode_query_pre(frames.inv_posed, posed_point);
    const std::vector<double> w = softmax(mlp_forward(params, enc));
    const Transform blended = blend_matrices(w, frames.skin);
    Transform inv;
    if (!try_invert(blended, inv)) {
        throw SingularBlend("blended skinning matrix is singular");
    }
    return inv.apply_point(posed_point);
}

bool eval_corrected(const WeightNetParams& params, const GhostedFrames& frames,
                    const OccupancyGrid& grid, Vec2 posed_point,
                    const PosedOccupancyOptions& options, OccupancyWork& work) {
    work.ghost_factor = options.ghost_factor;
    work.singular = false;
    work.value = 0.0;

    const std::vector<double> enc = encode_query_pre(frames.inv_posed, posed_point);
    const std::vector<double> logits = mlp_forward(params, enc, &work.tape);
    work.soft = softmax(logits);

    const Transform blended = blend_matrices(work.soft, frames.skin);
    if (!try_invert(blended, work.inv_blend)) {
        work.singular = true;
        return false;
    }

    work.rest_h = work.inv_blend.apply(embed(posed_point));
    work.rest_point = {work.rest_h.x / work.rest_h.w, work.rest_h.y / work.rest_h.w};
    work.cache = query_grid_grad(grid, work.rest_point);

    const double ghost = work.soft.back();
    const double factor = options.ghost_factor ? (1.0 - ghost) : 1.0;
    work.value = factor * work.cache.value;
    return true;
}

void backward_corrected(const WeightNetParams& params, const GhostedFrames& frames,
                        double upstream, const OccupancyWork& work, NetGrads& grads) {
    if (work.singular) {
        return;
    }
    const std::size_t channels = work.soft.size();
    const std::size_t ghost = channels - 1;
    const double factor = work.ghost_factor ? (1.0 - work.soft[ghost]) : 1.0;

    // d(value)/d(rest_point), then pulled back per channel through
    // d(M^-1) = -M^-1 dM M^-1 and the homogeneous divide.
    const double gx = factor * work.cache.ddx;
    const double gy = factor * work.cache.ddy;

    std::vector<double> soft_grad(channels, 0.0);
    for (std::size_t c = 0; c < channels; ++c) {
        const Vec4 moved = frames.skin[c].apply(work.rest_h);
        const Vec4 u = work.inv_blend.apply(moved);
        const double dx = -(u.x - work.rest_point.x * u.w) / work.rest_h.w;
        const double dy = -(u.y - work.rest_point.y * u.w) / work.rest_h.w;
        soft_grad[c] = gx * dx + gy * dy;
    }
    if (work.ghost_factor) {
        soft_grad[ghost] -= work.cache.value;
    }
    for (double& g : soft_grad) {
        g *= upstream;
    }

    const std::vector<double> logit_grad = softmax_backward(work.soft, soft_grad);
    mlp_backward(params, work.tape, logit_grad, grads);
}

double corrected_occupancy(const WeightNetParams& params, const GhostedFrames& frames,
                           const OccupancyGrid& grid, Vec2 posed_point,
                           const PosedOccupancyOptions& options, SingularStats* stats) {
    OccupancyWork work;
    if (!eval_corrected(params, frames, grid, posed_point, options, work)) {
        if (stats) {
            stats->count.fetch_add(1, std::memory_order_relaxed);
        }
        return 0.0;
    }
    return work.value;
}

} // namespace nilbs

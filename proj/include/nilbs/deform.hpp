#pragma once

#include <atomic>
#include <cstdint>
#include <span>

#include "nilbs/lbs.hpp"
#include "nilbs/occupancy.hpp"
#include "nilbs/weight_net.hpp"

namespace nilbs {

// Bone frames plus a background ("ghost") channel whose rest and posed
// frames are copies of the root's. Per-channel skinning transforms and the
// posed-frame inverses of the real bones are cached for repeated queries.
struct GhostedFrames {
    std::vector<Transform> rest;      // B + 1
    std::vector<Transform> posed;     // B + 1
    std::vector<Transform> skin;      // B + 1, posed_c * rest_c^{-1}
    std::vector<Transform> inv_posed; // B, encoding uses real bones only

    int real_bones = 0;
    int channels() const { return real_bones + 1; }
};

GhostedFrames augment_ghost(std::span<const Transform> rest,
                            std::span<const Transform> posed);

// Deforms a rest-space point: blends per-channel transforms with weights
// predicted at the rest encoding of the point.
Vec2 forward_map(const WeightNetParams& params, std::span<const Transform> rest_frames,
                 std::span<const Transform> posed_frames, Vec2 rest_point);

// Closed-form pullback of a deformed-space point: weights are predicted at
// the posed encoding and the blended matrix is inverted.
// Throws SingularBlend when the blend collapses.
Vec2 inverse_map(const WeightNetParams& params, const GhostedFrames& frames,
                 Vec2 posed_point);

struct SingularStats {
    std::atomic<std::uint64_t> count{0};
};

struct PosedOccupancyOptions {
    // multiply the cache lookup by (1 - ghost weight); disabled for ablations
    bool ghost_factor = true;
};

// Everything one posed-space occupancy evaluation produces, retained so a
// backward pass can run after the loss decides its upstream gradient.
struct OccupancyWork {
    ForwardTape tape;
    std::vector<double> soft; // B+1 channel weights
    Transform inv_blend;
    Vec4 rest_h;      // inverse blend applied to the homogeneous query
    Vec2 rest_point;  // after the homogeneous divide
    GridSample cache; // bilinear cache sample at rest_point
    double value = 0.0;
    bool singular = false;
    bool ghost_factor = true;
};

// Forward evaluation; returns false (and zeroes work.value) on a singular
// blend. Never throws for singularity.
bool eval_corrected(const WeightNetParams& params, const GhostedFrames& frames,
                    const OccupancyGrid& grid, Vec2 posed_point,
                    const PosedOccupancyOptions& options, OccupancyWork& work);

// Accumulates upstream * d(value)/d(params) into grads. The gradient flows
// through the ghost factor, the softmax weights inside the blended matrix,
// the matrix inverse (d(M^-1) = -M^-1 dM M^-1), and the bilinear cache.
void backward_corrected(const WeightNetParams& params, const GhostedFrames& frames,
                        double upstream, const OccupancyWork& work, NetGrads& grads);

// Query-side corrected occupancy in [0,1]: a singular blend yields 0 and
// bumps stats when provided.
double corrected_occupancy(const WeightNetParams& params, const GhostedFrames& frames,
                           const OccupancyGrid& grid, Vec2 posed_point,
                           const PosedOccupancyOptions& options = {},
                           SingularStats* stats = nullptr);

} // namespace nilbs

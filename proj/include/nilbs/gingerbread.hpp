#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "nilbs/lbs.hpp"
#include "nilbs/rig.hpp"

namespace nilbs {

// A character, its animation, and the box containing every posed shape.
struct AnimationSet {
    Rig rig;
    SkinnedMesh mesh;
    std::vector<Pose> poses;
    Vec2 bbox_min;
    Vec2 bbox_max;
    std::uint64_t seed = 0;

    int frame_count() const { return static_cast<int>(poses.size()); }
    // mesh/rig consistency, bbox containment of every posed shape, and the
    // 0.15 rad cap on consecutive joint-angle steps
    void validate() const; // throws ConfigError
};

// Bone indices of the procedural character.
enum GingerbreadBone : int {
    kBoneRoot = 0,
    kBoneHead = 1,
    kBoneLeftArm = 2,
    kBoneRightArm = 3,
    kBoneLeftLeg = 4,
    kBoneRightLeg = 5,
};

// Closed ~64-vertex gingerbread silhouette with a 6-bone rig. Vertex weights
// fall off with inverse-square distance to each bone segment (clamped
// support) and are normalized; limb tips end up fully one-hot.
std::pair<Rig, SkinnedMesh> build_gingerbread();

// Per-bone sinusoid parameters of one sampled animation. Amplitudes are
// capped so consecutive frames never step a joint by more than 0.15 rad.
struct AnimationParams {
    std::vector<double> amplitude;
    std::vector<double> phase;
    std::vector<int> frequency;
    double root_radius_x = 0.0;
    double root_radius_y = 0.0;
    double root_phase = 0.0;
    int t_count = 0;
};

AnimationParams sample_animation_params(const Rig& rig, int t_count, std::uint64_t seed);

// theta_b(t) = A_b sin(2 pi f_b t / T + phi_b); the root also travels a small
// ellipse that passes through the origin at t = 0.
Pose animation_pose(const AnimationParams& params, int t);

std::vector<Pose> sample_animation(const Rig& rig, int t_count, std::uint64_t seed);

// Character + animation + padded bbox in one call.
AnimationSet make_animation_set(int t_count, std::uint64_t seed);

// Occupancy of the deformed character: winding test against the posed polygon.
int gt_occupancy(const SkinnedMesh& mesh, const Rig& rig, const Pose& pose, Vec2 p);

} // namespace nilbs

#pragma once

#include <vector>

#include "nilbs/transform.hpp"

namespace nilbs {

// Bone hierarchy with world-space rest frames. Bone 0 is the root (parent
// sentinel -1); every other bone's parent chain must reach the root without
// cycles. Pivots are the joint rotation centers in rest world coordinates.
struct Rig {
    std::vector<int> parent;
    std::vector<Transform> rest_frames;
    std::vector<Vec2> pivots;

    int bone_count() const { return static_cast<int>(parent.size()); }
    void validate() const; // throws ConfigError
};

// One rotation angle per bone about its pivot, plus a root translation.
struct Pose {
    std::vector<double> theta;
    Vec2 root_translation{0.0, 0.0};

    static Pose rest(int bone_count) {
        return Pose{std::vector<double>(static_cast<std::size_t>(bone_count), 0.0), {0.0, 0.0}};
    }
};

// Forward kinematics: the world frame of every bone under the pose, chaining
// parent rotations root-to-leaf. The zero pose reproduces rest_frames exactly.
std::vector<Transform> pose_fn(const Rig& rig, const Pose& pose);

} // namespace nilbs

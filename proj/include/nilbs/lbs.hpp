#pragma once

#include <span>
#include <vector>

#include "nilbs/rig.hpp"

namespace nilbs {

// Closed 2D polygon (counterclockwise, simple at rest) with one skinning
// weight row per vertex. Vertices are homogeneous points (x, y, 0, 1)
// stored by their xy part; every weight row lies on the simplex.
struct SkinnedMesh {
    std::vector<Vec2> vertices;
    std::vector<std::vector<double>> weights;

    int vertex_count() const { return static_cast<int>(vertices.size()); }
    int bone_count() const {
        return weights.empty() ? 0 : static_cast<int>(weights.front().size());
    }
    // row shape, simplex property, and rest-pose polygon simplicity
    void validate(int rig_bones) const; // throws ConfigError
};

// Entrywise convex combination sum_b w[b] * frames[b].
Transform blend_matrices(std::span<const double> weight_row,
                         std::span<const Transform> frames);

// Per-bone skinning transforms posed_b * rest_b^{-1}.
std::vector<Transform> skinning_transforms(std::span<const Transform> rest,
                                           std::span<const Transform> posed);

// Deforms one vertex through the blended matrix.
Vec4 skin_vertex(const Vec4& v, std::span<const double> weight_row,
                 std::span<const Transform> rest, std::span<const Transform> posed);

std::vector<Vec2> skin_mesh(const SkinnedMesh& mesh, const Rig& rig, const Pose& pose);

// Same deformation with the forward kinematics result already at hand.
std::vector<Vec2> skin_mesh_posed(const SkinnedMesh& mesh,
                                  std::span<const Transform> rest,
                                  std::span<const Transform> posed);

} // namespace nilbs

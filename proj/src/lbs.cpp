#include "nilbs/lbs.hpp"

#include <cmath>
#include <string>

#include "nilbs/errors.hpp"
#include "nilbs/occupancy.hpp"

namespace nilbs {

void SkinnedMesh::validate(int rig_bones) const {
    if (vertices.size() < 3) {
        throw ConfigError("mesh needs at least 3 vertices");
    }
    if (weights.size() != vertices.size()) {
        throw ConfigError("mesh has " + std::to_string(vertices.size()) + " vertices but " +
                          std::to_string(weights.size()) + " weight rows");
    }
    for (std::size_t n = 0; n < weights.size(); ++n) {
        const auto& row = weights[n];
        if (static_cast<int>(row.size()) != rig_bones) {
            throw ConfigError("weight row " + std::to_string(n) + " has width " +
                              std::to_string(row.size()) + ", expected " +
                              std::to_string(rig_bones));
        }
        double sum = 0.0;
        for (double w : row) {
            if (w < 0.0) {
                throw ConfigError("negative skinning weight in row " + std::to_string(n));
            }
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-9) {
            throw ConfigError("weight row " + std::to_string(n) + " sums to " +
                              std::to_string(sum));
        }
    }
    if (!is_simple_polygon(vertices)) {
        throw ConfigError("rest-pose polygon is self-intersecting");
    }
}

Transform blend_matrices(std::span<const double> weight_row,
                         std::span<const Transform> frames) {
    if (weight_row.size() != frames.size()) {
        throw ConfigError("weight row width does not match frame count");
    }
    Transform blended;
    for (std::size_t b = 0; b < frames.size(); ++b) {
        const double w = weight_row[b];
        for (std::size_t i = 0; i < 16; ++i) {
            blended.m[i] += w * frames[b].m[i];
        }
    }
    return blended;
}

std::vector<Transform> skinning_transforms(std::span<const Transform> rest,
                                           std::span<const Transform> posed) {
    if (rest.size() != posed.size()) {
        throw ConfigError("rest/posed frame lists differ in length");
    }
    std::vector<Transform> out(rest.size());
    for (std::size_t b = 0; b < rest.size(); ++b) {
        out[b] = compose(posed[b], invert(rest[b]));
    }
    return out;
}

Vec4 skin_vertex(const Vec4& v, std::span<const double> weight_row,
                 std::span<const Transform> rest, std::span<const Transform> posed) {
    const std::vector<Transform> skin = skinning_transforms(rest, posed);
    return blend_matrices(weight_row, skin).apply(v);
}

std::vector<Vec2> skin_mesh(const SkinnedMesh& mesh, const Rig& rig, const Pose& pose) {
    if (mesh.bone_count() != rig.bone_count()) {
        throw ConfigError("mesh weight width does not match rig bone count");
    }
    const std::vector<Transform> posed = pose_fn(rig, pose);
    return skin_mesh_posed(mesh, rig.rest_frames, posed);
}

std::vector<Vec2> skin_mesh_posed(const SkinnedMesh& mesh,
                                  std::span<const Transform> rest,
                                  std::span<const Transform> posed) {
    const std::vector<Transform> skin = skinning_transforms(rest, posed);
    std::vector<Vec2> out(mesh.vertices.size());
    for (std::size_t n = 0; n < mesh.vertices.size(); ++n) {
        const Vec4 moved = blend_matrices(mesh.weights[n], skin).apply(embed(mesh.vertices[n]));
        out[n] = {moved.x / moved.w, moved.y / moved.w};
    }
    return out;
}

} // namespace nilbs

#include "nilbs/rig.hpp"

#include <string>

#include "nilbs/errors.hpp"

namespace nilbs {

void Rig::validate() const {
    const int nb = bone_count();
    if (nb < 1) {
        throw ConfigError("rig must have at least one bone");
    }
    if (rest_frames.size() != parent.size() || pivots.size() != parent.size()) {
        throw ConfigError("rig arrays disagree on bone count");
    }
    if (parent[0] != -1) {
        throw ConfigError("bone 0 must be the root (parent -1)");
    }
    for (int b = 1; b < nb; ++b) {
        const int p = parent[static_cast<std::size_t>(b)];
        if (p < 0 || p >= nb || p == b) {
            throw ConfigError("bone " + std::to_string(b) + " has invalid parent " +
                              std::to_string(p));
        }
        // walk up; more than nb steps means a cycle
        int cur = b;
        int steps = 0;
        while (cur != 0) {
            cur = parent[static_cast<std::size_t>(cur)];
            if (cur < 0 || ++steps > nb) {
                throw ConfigError("bone " + std::to_string(b) + " does not reach the root");
            }
        }
    }
    for (int b = 0; b < nb; ++b) {
        invert(rest_frames[static_cast<std::size_t>(b)]); // throws if not invertible
    }
}

std::vector<Transform> pose_fn(const Rig& rig, const Pose& pose) {
    const int nb = rig.bone_count();
    if (static_cast<int>(pose.theta.size()) != nb) {
        throw ConfigError("pose length does not match rig bone count");
    }

    // World-space pose delta per bone: rotate about the rest pivot, carried
    // through the parent chain; the root additionally translates. Bones may
    // be listed in any order, so the chain is resolved with memoization.
    std::vector<Transform> chain(static_cast<std::size_t>(nb));
    std::vector<char> done(static_cast<std::size_t>(nb), 0);
    auto resolve = [&](auto&& self, int b) -> const Transform& {
        const std::size_t i = static_cast<std::size_t>(b);
        if (!done[i]) {
            Transform delta = Transform::rotation_z_about(pose.theta[i], rig.pivots[i]);
            if (b == 0) {
                chain[i] = compose(
                    Transform::translation(pose.root_translation.x, pose.root_translation.y),
                    delta);
            } else {
                chain[i] = compose(self(self, rig.parent[i]), delta);
            }
            done[i] = 1;
        }
        return chain[i];
    };
    for (int b = 0; b < nb; ++b) {
        resolve(resolve, b);
    }

    std::vector<Transform> posed(static_cast<std::size_t>(nb));
    for (int b = 0; b < nb; ++b) {
        const std::size_t i = static_cast<std::size_t>(b);
        posed[i] = compose(chain[i], rig.rest_frames[i]);
    }
    return posed;
}

} // namespace nilbs

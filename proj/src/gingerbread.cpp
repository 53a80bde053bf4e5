#include "nilbs/gingerbread.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "nilbs/errors.hpp"
#include "nilbs/occupancy.hpp"
#include "nilbs/rng.hpp"

namespace nilbs {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kMaxJointStep = 0.15; // rad, between consecutive frames

// Character proportions (rest pose, roughly unit height torso+head).
constexpr double kHeadCx = 0.0, kHeadCy = 0.76, kHeadR = 0.26;
constexpr double kNeckHalfWidth = 0.13, kNeckY = 0.46;
constexpr Vec2 kShoulderJoint{0.24, 0.28}; // right side; left mirrors
constexpr Vec2 kHandTip{0.80, -0.02};
constexpr double kArmHalfWidth = 0.10;
constexpr Vec2 kHipJoint{0.16, -0.40};
constexpr Vec2 kFootTip{0.34, -1.00};
constexpr double kLegHalfWidth = 0.11;

Vec2 scaled_dir(Vec2 from, Vec2 to) {
    const Vec2 d = to - from;
    const double len = norm(d);
    return {d.x / len, d.y / len};
}

void append_arc(std::vector<Vec2>& out, Vec2 center, double radius, double a0, double a1,
                int segments) {
    // excludes the start angle, includes the end angle
    for (int i = 1; i <= segments; ++i) {
        const double a = a0 + (a1 - a0) * i / segments;
        out.push_back({center.x + radius * std::cos(a), center.y + radius * std::sin(a)});
    }
}

std::vector<Vec2> gingerbread_outline() {
    // Left half of the outline from just past the head apex down to just
    // before the crotch; the right half is its mirror reversed.
    std::vector<Vec2> left;

    // head: sweep the left side of the circle down to the neck join at 240deg
    append_arc(left, {kHeadCx, kHeadCy}, kHeadR, kPi / 2.0, 4.0 * kPi / 3.0, 8);
    left.push_back({-kNeckHalfWidth, kNeckY});
    left.push_back({-0.25, 0.44}); // shoulder corner

    // left arm: out along the upper edge, around the hand, back underneath
    const Vec2 shoulder{-kShoulderJoint.x, kShoulderJoint.y};
    const Vec2 hand{-kHandTip.x, kHandTip.y};
    const Vec2 au = scaled_dir(shoulder, hand);
    const Vec2 an{au.y, -au.x}; // upper-side normal
    left.push_back(shoulder + kArmHalfWidth * an);
    left.push_back(hand + kArmHalfWidth * an);
    const double hand_a0 = std::atan2(an.y, an.x);
    append_arc(left, hand, kArmHalfWidth, hand_a0, hand_a0 + kPi, 6);
    left.push_back(shoulder - kArmHalfWidth * an); // armpit

    // torso left flank
    left.push_back({-0.29, 0.02});
    left.push_back({-0.31, -0.20});
    left.push_back({-0.30, -0.36}); // hip corner

    // left leg: outer edge, around the foot, up the inner edge
    const Vec2 hip{-kHipJoint.x, kHipJoint.y};
    const Vec2 foot{-kFootTip.x, kFootTip.y};
    const Vec2 lu = scaled_dir(hip, foot);
    const Vec2 ln{lu.y, -lu.x}; // outer-side normal
    left.push_back(foot + kLegHalfWidth * ln);
    const double foot_a0 = std::atan2(ln.y, ln.x);
    append_arc(left, foot, kLegHalfWidth, foot_a0, foot_a0 + kPi, 6);
    left.push_back(hip - kLegHalfWidth * ln); // inner thigh

    std::vector<Vec2> poly;
    poly.push_back({0.0, kHeadCy + kHeadR}); // head apex
    poly.insert(poly.end(), left.begin(), left.end());
    poly.push_back({0.0, -0.38}); // crotch
    for (auto it = left.rbegin(); it != left.rend(); ++it) {
        poly.push_back({-it->x, it->y});
    }
    return poly;
}

struct BoneSegment {
    Vec2 a;
    Vec2 b;
};

double point_segment_distance(Vec2 p, const BoneSegment& s) {
    const Vec2 d = s.b - s.a;
    const double len2 = dot(d, d);
    double t = len2 > 0.0 ? dot(p - s.a, d) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const Vec2 nearest = s.a + t * d;
    return norm(p - nearest);
}

} // namespace

std::pair<Rig, SkinnedMesh> build_gingerbread() {
    const std::vector<BoneSegment> segments = {
        {{0.0, -0.38}, {0.0, 0.40}},                            // root / torso
        {{0.0, 0.50}, {0.0, 0.96}},                             // head
        {{-kShoulderJoint.x, kShoulderJoint.y}, {-0.78, -0.03}}, // left arm
        {{kShoulderJoint.x, kShoulderJoint.y}, {0.78, -0.03}},   // right arm
        {{-kHipJoint.x, kHipJoint.y}, {-0.33, -0.97}},           // left leg
        {{kHipJoint.x, kHipJoint.y}, {0.33, -0.97}},             // right leg
    };
    const std::vector<Vec2> pivots = {
        {0.0, 0.0},  {0.0, 0.48}, {-kShoulderJoint.x, kShoulderJoint.y},
        kShoulderJoint, {-kHipJoint.x, kHipJoint.y}, kHipJoint,
    };

    Rig rig;
    rig.parent = {-1, 0, 0, 0, 0, 0};
    rig.pivots = pivots;
    rig.rest_frames.reserve(segments.size());
    for (std::size_t b = 0; b < segments.size(); ++b) {
        // frame origin at the joint, x axis along the bone
        const Vec2 d = segments[b].b - segments[b].a;
        const double angle = std::atan2(d.y, d.x);
        rig.rest_frames.push_back(
            compose(Transform::translation(pivots[b].x, pivots[b].y),
                    Transform::rotation_z(angle)));
    }

    SkinnedMesh mesh;
    mesh.vertices = gingerbread_outline();

    // Squared-exponential falloff with clamped support. The falloff is kept
    // sharp so that rows are near one-hot away from joints; vertices beyond
    // the support of every bone but one end up exactly one-hot.
    constexpr double kSupport = 0.4;
    constexpr double kFalloffScale = 0.06;
    mesh.weights.reserve(mesh.vertices.size());
    for (const Vec2& v : mesh.vertices) {
        std::vector<double> row(segments.size(), 0.0);
        double sum = 0.0;
        for (std::size_t b = 0; b < segments.size(); ++b) {
            const double d = point_segment_distance(v, segments[b]);
            const double u = d / kFalloffScale;
            const double w = d <= kSupport ? std::exp(-u * u) : 0.0;
            row[b] = w;
            sum += w;
        }
        for (double& w : row) {
            w /= sum;
        }
        mesh.weights.push_back(std::move(row));
    }
    return {rig, mesh};
}

AnimationParams sample_animation_params(const Rig& rig, int t_count, std::uint64_t seed) {
    if (t_count < 1) {
        throw ConfigError("animation needs at least one frame");
    }
    const int nb = rig.bone_count();
    Rng rng(seed);
    AnimationParams params;
    params.t_count = t_count;
    params.amplitude.resize(static_cast<std::size_t>(nb));
    params.phase.resize(static_cast<std::size_t>(nb));
    params.frequency.resize(static_cast<std::size_t>(nb));

    // per-bone swing budget; the root barely rocks, limbs swing widest
    std::vector<double> budget(static_cast<std::size_t>(nb), kPi / 3.0);
    if (nb == 6) {
        budget = {0.12, 0.35, kPi / 3.0, kPi / 3.0, 0.55, 0.55};
    }
    for (int b = 0; b < nb; ++b) {
        const std::size_t i = static_cast<std::size_t>(b);
        params.frequency[i] = rng.uniform_int(1, 3);
        // largest per-frame step of A sin(2 pi f t / T + phi) is
        // 2 A sin(pi f / T); keep it under the smoothness cap with margin
        const double step_cap =
            0.95 * kMaxJointStep / (2.0 * std::sin(kPi * params.frequency[i] / t_count));
        const double cap = std::min(budget[i], step_cap);
        params.amplitude[i] = rng.uniform(0.6, 1.0) * cap;
        params.phase[i] = rng.uniform(0.0, 2.0 * kPi);
    }
    params.root_radius_x = rng.uniform(0.03, 0.08);
    params.root_radius_y = rng.uniform(0.03, 0.08);
    params.root_phase = rng.uniform(0.0, 2.0 * kPi);
    return params;
}

Pose animation_pose(const AnimationParams& params, int t) {
    const int nb = static_cast<int>(params.amplitude.size());
    Pose pose = Pose::rest(nb);
    const double alpha = 2.0 * kPi * t / params.t_count;
    for (int b = 0; b < nb; ++b) {
        const std::size_t i = static_cast<std::size_t>(b);
        pose.theta[i] =
            params.amplitude[i] * std::sin(alpha * params.frequency[i] + params.phase[i]);
    }
    // ellipse through the origin at t = 0 for any phase
    pose.root_translation = {
        params.root_radius_x * (std::cos(alpha + params.root_phase) - std::cos(params.root_phase)),
        params.root_radius_y * (std::sin(alpha + params.root_phase) - std::sin(params.root_phase)),
    };
    return pose;
}

std::vector<Pose> sample_animation(const Rig& rig, int t_count, std::uint64_t seed) {
    const AnimationParams params = sample_animation_params(rig, t_count, seed);
    std::vector<Pose> poses;
    poses.reserve(static_cast<std::size_t>(t_count));
    for (int t = 0; t < t_count; ++t) {
        poses.push_back(animation_pose(params, t));
    }
    return poses;
}

AnimationSet make_animation_set(int t_count, std::uint64_t seed) {
    AnimationSet set;
    auto [rig, mesh] = build_gingerbread();
    set.rig = std::move(rig);
    set.mesh = std::move(mesh);
    set.seed = seed;
    set.poses = sample_animation(set.rig, t_count, seed);

    double min_x = 1e300, min_y = 1e300, max_x = -1e300, max_y = -1e300;
    for (const Pose& pose : set.poses) {
        for (const Vec2& v : skin_mesh(set.mesh, set.rig, pose)) {
            min_x = std::min(min_x, v.x);
            min_y = std::min(min_y, v.y);
            max_x = std::max(max_x, v.x);
            max_y = std::max(max_y, v.y);
        }
    }
    // 20% padding: grow each axis by a tenth of its extent on both sides
    const double pad_x = 0.1 * (max_x - min_x);
    const double pad_y = 0.1 * (max_y - min_y);
    set.bbox_min = {min_x - pad_x, min_y - pad_y};
    set.bbox_max = {max_x + pad_x, max_y + pad_y};
    return set;
}

void AnimationSet::validate() const {
    rig.validate();
    mesh.validate(rig.bone_count());
    if (poses.empty()) {
        throw ConfigError("animation set has no poses");
    }
    if (!(bbox_max.x > bbox_min.x) || !(bbox_max.y > bbox_min.y)) {
        throw ConfigError("animation bbox is empty");
    }
    for (std::size_t t = 0; t < poses.size(); ++t) {
        if (static_cast<int>(poses[t].theta.size()) != rig.bone_count()) {
            throw ConfigError("pose " + std::to_string(t) + " does not match rig");
        }
        for (const Vec2& v : skin_mesh(mesh, rig, poses[t])) {
            if (v.x < bbox_min.x || v.x > bbox_max.x || v.y < bbox_min.y ||
                v.y > bbox_max.y) {
                throw ConfigError("pose " + std::to_string(t) + " escapes the bbox");
            }
        }
        if (t > 0) {
            for (std::size_t b = 0; b < poses[t].theta.size(); ++b) {
                if (std::abs(poses[t].theta[b] - poses[t - 1].theta[b]) >
                    kMaxJointStep + 1e-12) {
                    throw ConfigError("joint step exceeds smoothness cap at frame " +
                                      std::to_string(t));
                }
            }
        }
    }
}

int gt_occupancy(const SkinnedMesh& mesh, const Rig& rig, const Pose& pose, Vec2 p) {
    const std::vector<Vec2> deformed = skin_mesh(mesh, rig, pose);
    return point_in_polygon(deformed, p);
}

} // namespace nilbs

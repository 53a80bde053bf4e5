#include <doctest.h>

#include "nilbs/errors.hpp"
#include "nilbs/gingerbread.hpp"
#include "nilbs/lbs.hpp"
#include "test_support.hpp"

using namespace nilbs;

TEST_CASE("one-hot weights select a frame exactly") {
    Rng rng(2);
    std::vector<Transform> frames{test::random_affine(rng), test::random_affine(rng),
                                  test::random_affine(rng)};
    const std::vector<double> weights{0.0, 1.0, 0.0};
    CHECK(max_abs_diff(blend_matrices(weights, frames), frames[1]) == 0.0);
}

TEST_CASE("blending identical frames returns that frame") {
    Rng rng(3);
    const Transform t = test::random_affine(rng);
    const std::vector<Transform> frames{t, t, t, t};
    const std::vector<double> weights = test::random_simplex(rng, 4);
    CHECK(max_abs_diff(blend_matrices(weights, frames), t) < 1e-12);
}

TEST_CASE("half-half blend of identity and translation") {
    const std::vector<Transform> frames{Transform::identity(),
                                        Transform::translation(2.0, 0.0)};
    const std::vector<double> weights{0.5, 0.5};
    CHECK(max_abs_diff(blend_matrices(weights, frames),
                       Transform::translation(1.0, 0.0)) < 1e-15);
}

TEST_CASE("skinning at rest leaves a vertex unchanged") {
    Rng rng(5);
    std::vector<Transform> frames{test::random_affine(rng), test::random_affine(rng)};
    const std::vector<double> weights{0.25, 0.75};
    const Vec4 v = embed({0.4, -0.2});
    const Vec4 moved = skin_vertex(v, weights, frames, frames);
    CHECK(std::abs(moved.x - v.x) < 1e-12);
    CHECK(std::abs(moved.y - v.y) < 1e-12);
    CHECK(std::abs(moved.w - v.w) < 1e-12);
}

TEST_CASE("single-bone translation moves the vertex") {
    const std::vector<Transform> rest{Transform::identity()};
    const std::vector<Transform> posed{Transform::translation(1.0, 0.0)};
    const std::vector<double> weights{1.0};
    const Vec4 moved = skin_vertex(embed({0.0, 0.0}), weights, rest, posed);
    CHECK(std::abs(moved.x - 1.0) < 1e-15);
    CHECK(std::abs(moved.y) < 1e-15);
}

TEST_CASE("encode and decode through an offset bone frame") {
    // rest frame translated so the vertex sits at its origin; the posed
    // rotation then leaves the origin image in place
    const std::vector<Transform> rest{Transform::translation(1.0, 0.0)};
    const std::vector<Transform> posed{Transform::rotation_z(M_PI / 2.0)};
    const std::vector<double> weights{1.0};
    const Vec4 moved = skin_vertex(embed({1.0, 0.0}), weights, rest, posed);
    CHECK(std::abs(moved.x) < 1e-15);
    CHECK(std::abs(moved.y) < 1e-15);
    CHECK(std::abs(moved.w - 1.0) < 1e-15);
}

TEST_CASE("zero pose and root translation behave rigidly on the mesh") {
    auto [rig, mesh] = build_gingerbread();

    const std::vector<Vec2> at_rest = skin_mesh(mesh, rig, Pose::rest(rig.bone_count()));
    for (std::size_t n = 0; n < mesh.vertices.size(); ++n) {
        CHECK(std::abs(at_rest[n].x - mesh.vertices[n].x) < 1e-12);
        CHECK(std::abs(at_rest[n].y - mesh.vertices[n].y) < 1e-12);
    }

    Pose shifted = Pose::rest(rig.bone_count());
    shifted.root_translation = {3.0, 0.0};
    const std::vector<Vec2> moved = skin_mesh(mesh, rig, shifted);
    for (std::size_t n = 0; n < mesh.vertices.size(); ++n) {
        CHECK(std::abs(moved[n].x - mesh.vertices[n].x - 3.0) < 1e-9);
        CHECK(std::abs(moved[n].y - mesh.vertices[n].y) < 1e-9);
    }
}

TEST_CASE("per-bone summation and blended-matrix skinning agree") {
    Rng rng(17);
    for (int trial = 0; trial < 30; ++trial) {
        const int bones = rng.uniform_int(2, 5);
        std::vector<Transform> rest, posed;
        for (int b = 0; b < bones; ++b) {
            rest.push_back(test::random_rigid(rng));
            posed.push_back(test::random_rigid(rng));
        }
        for (int v = 0; v < 10; ++v) {
            const Vec4 p = embed({rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)});
            const std::vector<double> w = test::random_simplex(rng, bones);
            const Vec4 blended = skin_vertex(p, w, rest, posed);
            const Vec4 summed = test::skin_vertex_sum(p, w, rest, posed);
            CHECK(std::abs(blended.x - summed.x) < 1e-12);
            CHECK(std::abs(blended.y - summed.y) < 1e-12);
            CHECK(std::abs(blended.z - summed.z) < 1e-12);
            CHECK(std::abs(blended.w - summed.w) < 1e-12);
        }
    }
}

TEST_CASE("a bent arm rotates arm vertices and keeps the torso fixed") {
    auto [rig, mesh] = build_gingerbread();
    Pose pose = Pose::rest(rig.bone_count());
    pose.theta[kBoneLeftArm] = M_PI / 4.0;
    const std::vector<Vec2> deformed = skin_mesh(mesh, rig, pose);

    const Transform swing = Transform::rotation_z_about(M_PI / 4.0, rig.pivots[kBoneLeftArm]);
    for (std::size_t n = 0; n < mesh.vertices.size(); ++n) {
        const double w_arm = mesh.weights[n][kBoneLeftArm];
        if (w_arm == 1.0) {
            const Vec2 expected = swing.apply_point(mesh.vertices[n]);
            CHECK(std::abs(deformed[n].x - expected.x) < 1e-6);
            CHECK(std::abs(deformed[n].y - expected.y) < 1e-6);
        } else if (w_arm < 1e-12) {
            CHECK(std::abs(deformed[n].x - mesh.vertices[n].x) < 1e-9);
            CHECK(std::abs(deformed[n].y - mesh.vertices[n].y) < 1e-9);
        }
    }
}

TEST_CASE("a common rigid motion of every bone moves vertices rigidly") {
    auto [rig, mesh] = build_gingerbread();
    Rng rng(29);
    const Transform motion = test::random_rigid(rng);
    std::vector<Transform> posed;
    for (const Transform& bar : rig.rest_frames) {
        posed.push_back(compose(motion, bar));
    }
    const std::vector<Vec2> moved = skin_mesh_posed(mesh, rig.rest_frames, posed);
    for (std::size_t n = 0; n < mesh.vertices.size(); ++n) {
        const Vec2 expected = motion.apply_point(mesh.vertices[n]);
        CHECK(std::abs(moved[n].x - expected.x) < 1e-9);
        CHECK(std::abs(moved[n].y - expected.y) < 1e-9);
    }
}

TEST_CASE("mesh validation enforces the simplex and polygon invariants") {
    auto [rig, mesh] = build_gingerbread();
    mesh.validate(rig.bone_count());

    SkinnedMesh negative = mesh;
    negative.weights[0][0] = -0.1;
    negative.weights[0][1] += 0.1;
    CHECK_THROWS_AS(negative.validate(rig.bone_count()), ConfigError);

    SkinnedMesh off_simplex = mesh;
    off_simplex.weights[2][0] += 1e-3;
    CHECK_THROWS_AS(off_simplex.validate(rig.bone_count()), ConfigError);

    SkinnedMesh crossing;
    crossing.vertices = {{0, 0}, {1, 1}, {1, 0}, {0, 1}};
    crossing.weights.assign(4, std::vector<double>(rig.bone_count(), 1.0 / rig.bone_count()));
    CHECK_THROWS_AS(crossing.validate(rig.bone_count()), ConfigError);
}

#include <doctest.h>

#include "nilbs/errors.hpp"
#include "nilbs/transform.hpp"
#include "test_support.hpp"

using namespace nilbs;

TEST_CASE("compose with identity returns the other operand") {
    Rng rng(7);
    const Transform t = test::random_affine(rng);
    CHECK(max_abs_diff(compose(Transform::identity(), t), t) == 0.0);
    CHECK(max_abs_diff(compose(t, Transform::identity()), t) == 0.0);
}

TEST_CASE("translations compose additively") {
    const Transform t = compose(Transform::translation(1.0, 2.0),
                                Transform::translation(3.0, 4.0));
    CHECK(max_abs_diff(t, Transform::translation(4.0, 6.0)) < 1e-15);
}

TEST_CASE("rotations compose additively") {
    const Transform t = compose(Transform::rotation_z(M_PI / 2.0),
                                Transform::rotation_z(M_PI / 2.0));
    CHECK(max_abs_diff(t, Transform::rotation_z(M_PI)) < 1e-15);
}

TEST_CASE("composition is associative") {
    Rng rng(11);
    for (int i = 0; i < 50; ++i) {
        const Transform a = test::random_affine(rng);
        const Transform b = test::random_affine(rng);
        const Transform c = test::random_affine(rng);
        CHECK(max_abs_diff(compose(compose(a, b), c), compose(a, compose(b, c))) < 1e-12);
    }
}

TEST_CASE("invert of identity and translations") {
    CHECK(max_abs_diff(invert(Transform::identity()), Transform::identity()) == 0.0);
    CHECK(max_abs_diff(invert(Transform::translation(1.0, 2.0)),
                       Transform::translation(-1.0, -2.0)) < 1e-15);
}

TEST_CASE("invert rejects singular transforms") {
    const Transform zero{};
    CHECK_THROWS_AS(invert(zero), SingularTransform);
    Transform out;
    CHECK_FALSE(try_invert(zero, out));
}

TEST_CASE("compose with inverse gives identity") {
    Rng rng(23);
    for (int i = 0; i < 100; ++i) {
        const Transform t = test::random_affine(rng);
        CHECK(max_abs_diff(compose(t, invert(t)), Transform::identity()) < 1e-9);
        CHECK(max_abs_diff(compose(invert(t), t), Transform::identity()) < 1e-9);
    }
}

TEST_CASE("affine transforms preserve the homogeneous coordinate") {
    Rng rng(3);
    for (int i = 0; i < 50; ++i) {
        const Transform t = test::random_affine(rng);
        CHECK(t.last_row_affine());
        const Vec4 moved = t.apply(embed({rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)}));
        CHECK(moved.w == 1.0);
    }
}

TEST_CASE("rotation about a pivot leaves the pivot fixed") {
    const Vec2 pivot{0.3, -1.2};
    const Transform t = Transform::rotation_z_about(2.1, pivot);
    const Vec2 moved = t.apply_point(pivot);
    CHECK(std::abs(moved.x - pivot.x) < 1e-15);
    CHECK(std::abs(moved.y - pivot.y) < 1e-15);
}

#include "nilbs/transform.hpp"

#include <algorithm>
#include <cmath>

namespace nilbs {

Transform Transform::identity() {
    Transform t;
    t.at(0, 0) = 1.0;
    t.at(1, 1) = 1.0;
    t.at(2, 2) = 1.0;
    t.at(3, 3) = 1.0;
    return t;
}

Transform Transform::translation(double x, double y) {
    Transform t = identity();
    t.at(0, 3) = x;
    t.at(1, 3) = y;
    return t;
}

Transform Transform::rotation_z(double angle) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    Transform t = identity();
    t.at(0, 0) = c;
    t.at(0, 1) = -s;
    t.at(1, 0) = s;
    t.at(1, 1) = c;
    return t;
}

Transform Transform::rotation_z_about(double angle, Vec2 pivot) {
    return compose(translation(pivot.x, pivot.y),
                   compose(rotation_z(angle), translation(-pivot.x, -pivot.y)));
}

Vec4 Transform::apply(const Vec4& p) const {
    Vec4 r;
    r.x = at(0, 0) * p.x + at(0, 1) * p.y + at(0, 2) * p.z + at(0, 3) * p.w;
    r.y = at(1, 0) * p.x + at(1, 1) * p.y + at(1, 2) * p.z + at(1, 3) * p.w;
    r.z = at(2, 0) * p.x + at(2, 1) * p.y + at(2, 2) * p.z + at(2, 3) * p.w;
    r.w = at(3, 0) * p.x + at(3, 1) * p.y + at(3, 2) * p.z + at(3, 3) * p.w;
    return r;
}

Vec2 Transform::apply_point(Vec2 p) const {
    const Vec4 r = apply(embed(p));
    return {r.x / r.w, r.y / r.w};
}

bool Transform::last_row_affine() const {
    return at(3, 0) == 0.0 && at(3, 1) == 0.0 && at(3, 2) == 0.0 && at(3, 3) == 1.0;
}

Transform compose(const Transform& a, const Transform& b) {
    Transform r;
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            double acc = 0.0;
            for (int k = 0; k < 4; ++k) {
                acc += a.at(i, k) * b.at(k, j);
            }
            r.at(i, j) = acc;
        }
    }
    return r;
}

namespace {

// Cofactor row expansion; also the building block for the adjugate inverse.
double det3(double a, double b, double c, double d, double e, double f, double g,
            double h, double i) {
    return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g);
}

} // namespace

double Transform::det() const {
    const auto& v = m;
    return v[0] * det3(v[5], v[6], v[7], v[9], v[10], v[11], v[13], v[14], v[15]) -
           v[1] * det3(v[4], v[6], v[7], v[8], v[10], v[11], v[12], v[14], v[15]) +
           v[2] * det3(v[4], v[5], v[7], v[8], v[9], v[11], v[12], v[13], v[15]) -
           v[3] * det3(v[4], v[5], v[6], v[8], v[9], v[10], v[12], v[13], v[14]);
}

Transform invert(const Transform& t) {
    Transform r;
    if (!try_invert(t, r)) {
        throw SingularTransform("transform determinant below singularity threshold");
    }
    return r;
}

bool try_invert(const Transform& t, Transform& out) {
    const auto& v = t.m;
    std::array<double, 16> inv;

    inv[0] = v[5] * v[10] * v[15] - v[5] * v[11] * v[14] - v[9] * v[6] * v[15] +
             v[9] * v[7] * v[14] + v[13] * v[6] * v[11] - v[13] * v[7] * v[10];
    inv[4] = -v[4] * v[10] * v[15] + v[4] * v[11] * v[14] + v[8] * v[6] * v[15] -
             v[8] * v[7] * v[14] - v[12] * v[6] * v[11] + v[12] * v[7] * v[10];
    inv[8] = v[4] * v[9] * v[15] - v[4] * v[11] * v[13] - v[8] * v[5] * v[15] +
             v[8] * v[7] * v[13] + v[12] * v[5] * v[11] - v[12] * v[7] * v[9];
    inv[12] = -v[4] * v[9] * v[14] + v[4] * v[10] * v[13] + v[8] * v[5] * v[14] -
              v[8] * v[6] * v[13] - v[12] * v[5] * v[10] + v[12] * v[6] * v[9];
    inv[1] = -v[1] * v[10] * v[15] + v[1] * v[11] * v[14] + v[9] * v[2] * v[15] -
             v[9] * v[3] * v[14] - v[13] * v[2] * v[11] + v[13] * v[3] * v[10];
    inv[5] = v[0] * v[10] * v[15] - v[0] * v[11] * v[14] - v[8] * v[2] * v[15] +
             v[8] * v[3] * v[14] + v[12] * v[2] * v[11] - v[12] * v[3] * v[10];
    inv[9] = -v[0] * v[9] * v[15] + v[0] * v[11] * v[13] + v[8] * v[1] * v[15] -
             v[8] * v[3] * v[13] - v[12] * v[1] * v[11] + v[12] * v[3] * v[9];
    inv[13] = v[0] * v[9] * v[14] - v[0] * v[10] * v[13] - v[8] * v[1] * v[14] +
              v[8] * v[2] * v[13] + v[12] * v[1] * v[10] - v[12] * v[2] * v[9];
    inv[2] = v[1] * v[6] * v[15] - v[1] * v[7] * v[14] - v[5] * v[2] * v[15] +
             v[5] * v[3] * v[14] + v[13] * v[2] * v[7] - v[13] * v[3] * v[6];
    inv[6] = -v[0] * v[6] * v[15] + v[0] * v[7] * v[14] + v[4] * v[2] * v[15] -
             v[4] * v[3] * v[14] - v[12] * v[2] * v[7] + v[12] * v[3] * v[6];
    inv[10] = v[0] * v[5] * v[15] - v[0] * v[7] * v[13] - v[4] * v[1] * v[15] +
              v[4] * v[3] * v[13] + v[12] * v[1] * v[7] - v[12] * v[3] * v[5];
    inv[14] = -v[0] * v[5] * v[14] + v[0] * v[6] * v[13] + v[4] * v[1] * v[14] -
              v[4] * v[2] * v[13] - v[12] * v[1] * v[6] + v[12] * v[2] * v[5];
    inv[3] = -v[1] * v[6] * v[11] + v[1] * v[7] * v[10] + v[5] * v[2] * v[11] -
             v[5] * v[3] * v[10] - v[9] * v[2] * v[7] + v[9] * v[3] * v[6];
    inv[7] = v[0] * v[6] * v[11] - v[0] * v[7] * v[10] - v[4] * v[2] * v[11] +
             v[4] * v[3] * v[10] + v[8] * v[2] * v[7] - v[8] * v[3] * v[6];
    inv[11] = -v[0] * v[5] * v[11] + v[0] * v[7] * v[9] + v[4] * v[1] * v[11] -
              v[4] * v[3] * v[9] - v[8] * v[1] * v[7] + v[8] * v[3] * v[5];
    inv[15] = v[0] * v[5] * v[10] - v[0] * v[6] * v[9] - v[4] * v[1] * v[10] +
              v[4] * v[2] * v[9] + v[8] * v[1] * v[6] - v[8] * v[2] * v[5];

    const double det = v[0] * inv[0] + v[1] * inv[4] + v[2] * inv[8] + v[3] * inv[12];
    if (std::abs(det) < kSingularDetEps) {
        return false;
    }

    const double inv_det = 1.0 / det;
    for (int i = 0; i < 16; ++i) {
        out.m[static_cast<std::size_t>(i)] = inv[static_cast<std::size_t>(i)] * inv_det;
    }
    return true;
}

double max_abs_diff(const Transform& a, const Transform& b) {
    double worst = 0.0;
    for (int i = 0; i < 16; ++i) {
        worst = std::max(worst, std::abs(a.m[static_cast<std::size_t>(i)] -
                                         b.m[static_cast<std::size_t>(i)]));
    }
    return worst;
}

} // namespace nilbs

#pragma once

#include <array>
#include <cmath>

#include "nilbs/errors.hpp"

namespace nilbs {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 v) { return std::sqrt(dot(v, v)); }

struct Vec4 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    double w = 0.0;
};

// 2D points ride in homogeneous coordinates as (x, y, 0, 1).
inline Vec4 embed(Vec2 p) { return {p.x, p.y, 0.0, 1.0}; }

// Transforms with |det| below this threshold are treated as singular.
inline constexpr double kSingularDetEps = 1e-12;

// 4x4 homogeneous transform, row-major storage. Rigid/affine transforms
// carry the exact last row [0,0,0,1]; blended combinations may scale the
// w row slightly, which apply_point resolves with a homogeneous divide.
struct Transform {
    std::array<double, 16> m{};

    double& at(int r, int c) { return m[static_cast<std::size_t>(r) * 4 + c]; }
    double at(int r, int c) const { return m[static_cast<std::size_t>(r) * 4 + c]; }

    static Transform identity();
    static Transform translation(double x, double y);
    static Transform rotation_z(double angle);
    // rotation about a pivot point in the xy plane
    static Transform rotation_z_about(double angle, Vec2 pivot);

    Vec4 apply(const Vec4& p) const;
    // applies to (x, y, 0, 1) and divides by the resulting w
    Vec2 apply_point(Vec2 p) const;

    double det() const;
    // last row is exactly [0,0,0,1]
    bool last_row_affine() const;
};

inline bool operator==(const Transform& a, const Transform& b) { return a.m == b.m; }

// result applied to p equals a applied to (b applied to p)
Transform compose(const Transform& a, const Transform& b);

// throws SingularTransform when |det| < kSingularDetEps
Transform invert(const Transform& t);

// non-throwing variant; returns false when the transform is singular
bool try_invert(const Transform& t, Transform& out);

double max_abs_diff(const Transform& a, const Transform& b);

} // namespace nilbs

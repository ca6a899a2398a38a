#pragma once

#include <array>
#include <cmath>

namespace stickytail {

using Vec2 = std::array<double, 2>;
using Mat2 = std::array<std::array<double, 2>, 2>;

constexpr Mat2 identity2() { return {{{1.0, 0.0}, {0.0, 1.0}}}; }

constexpr double dot(const Vec2& a, const Vec2& b) { return a[0] * b[0] + a[1] * b[1]; }

constexpr Vec2 mul(const Mat2& m, const Vec2& v) {
    return {m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]};
}

constexpr double det(const Mat2& m) { return m[0][0] * m[1][1] - m[0][1] * m[1][0]; }

// <v, M v>
constexpr double quad_form(const Mat2& m, const Vec2& v) { return dot(v, mul(m, v)); }

constexpr Mat2 transpose(const Mat2& m) { return {{{m[0][0], m[1][0]}, {m[0][1], m[1][1]}}}; }

// Conjugation by the coordinate swap permutation.
constexpr Mat2 swapped(const Mat2& m) { return {{{m[1][1], m[1][0]}, {m[0][1], m[0][0]}}}; }
constexpr Vec2 swapped(const Vec2& v) { return {v[1], v[0]}; }

// Lower Cholesky factor of a symmetric positive definite 2x2 matrix.
inline Mat2 cholesky(const Mat2& s) {
    const double l00 = std::sqrt(s[0][0]);
    const double l10 = s[1][0] / l00;
    const double l11 = std::sqrt(s[1][1] - l10 * l10);
    return {{{l00, 0.0}, {l10, l11}}};
}

}  // namespace stickytail

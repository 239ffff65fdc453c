#pragma once

#include <array>
#include <cmath>

namespace afvm {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    constexpr Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
    constexpr Vec2& operator*=(double s) { x *= s; y *= s; return *this; }

    friend constexpr Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
    friend constexpr Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
    friend constexpr Vec2 operator-(const Vec2& a) { return {-a.x, -a.y}; }
    friend constexpr Vec2 operator*(Vec2 a, double s) { return a *= s; }
    friend constexpr Vec2 operator*(double s, Vec2 a) { return a *= s; }
    friend constexpr bool operator==(const Vec2&, const Vec2&) = default;
};

constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) { return std::hypot(a.x, a.y); }
constexpr Vec2 midpoint(const Vec2& a, const Vec2& b) { return {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)}; }

/// Signed area of the triangle (a, b, c); positive for counterclockwise order.
constexpr double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
    return 0.5 * cross(b - a, c - a);
}

/// Dense 2x2 matrix, row major.
struct Mat2 {
    double a11 = 0.0, a12 = 0.0, a21 = 0.0, a22 = 0.0;

    static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    static constexpr Mat2 diagonal(double d1, double d2) { return {d1, 0.0, 0.0, d2}; }

    constexpr Vec2 operator*(const Vec2& v) const { return {a11 * v.x + a12 * v.y, a21 * v.x + a22 * v.y}; }
    constexpr Mat2& operator+=(const Mat2& o) { a11 += o.a11; a12 += o.a12; a21 += o.a21; a22 += o.a22; return *this; }
    constexpr Mat2& operator*=(double s) { a11 *= s; a12 *= s; a21 *= s; a22 *= s; return *this; }
    friend constexpr Mat2 operator+(Mat2 a, const Mat2& b) { return a += b; }
    friend constexpr Mat2 operator-(Mat2 a, const Mat2& b) { return a += Mat2{-b.a11, -b.a12, -b.a21, -b.a22}; }
    friend constexpr Mat2 operator*(double s, Mat2 a) { return a *= s; }
    friend constexpr Mat2 operator*(Mat2 a, double s) { return a *= s; }
    friend constexpr bool operator==(const Mat2&, const Mat2&) = default;

    /// Frobenius inner product A:B.
    constexpr double contract(const Mat2& o) const { return a11 * o.a11 + a12 * o.a12 + a21 * o.a21 + a22 * o.a22; }
};

/// Eigenvalues of the symmetric part of `m`, ascending.
inline std::array<double, 2> symmetric_eigenvalues(const Mat2& m) {
    const double off = 0.5 * (m.a12 + m.a21);
    const double mean = 0.5 * (m.a11 + m.a22);
    const double radius = std::hypot(0.5 * (m.a11 - m.a22), off);
    return {mean - radius, mean + radius};
}

} // namespace afvm

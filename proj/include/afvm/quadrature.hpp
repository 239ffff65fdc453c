#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "afvm/geometry.hpp"

namespace afvm {

struct TriangleQuadraturePoint {
    std::array<double, 3> barycentric;
    double weight; ///< weights sum to 1 (fraction of the triangle area)
};

struct SegmentQuadraturePoint {
    double t;      ///< parameter in [0, 1]
    double weight; ///< weights sum to 1
};

/// Triangle rule exact up to `degree` ∈ {1, 2, 5} (centroid, 3-point, 7-point).
std::span<const TriangleQuadraturePoint> triangle_rule(int degree);
/// Gauss-Legendre rule with `npoints` ∈ {1, 2, 3}, exact up to degree 2·npoints−1.
std::span<const SegmentQuadraturePoint> gauss_rule(int npoints);

inline Vec2 map_barycentric(const std::array<Vec2, 3>& tri, const std::array<double, 3>& lambda) {
    return tri[0] * lambda[0] + tri[1] * lambda[1] + tri[2] * lambda[2];
}

using PointFunction = std::function<double(const Vec2&)>;

double integrate_triangle(const PointFunction& f, const std::array<Vec2, 3>& tri, int degree);
double integrate_segment(const PointFunction& f, const Vec2& a, const Vec2& b, int npoints);

double integral_mean_triangle(const PointFunction& f, const std::array<Vec2, 3>& tri, int degree);
double integral_mean_segment(const PointFunction& f, const Vec2& a, const Vec2& b, int npoints);

} // namespace afvm

#include "afvm/quadrature.hpp"

#include <cmath>
#include <string>

#include "afvm/errors.hpp"

namespace afvm {

namespace {

const std::array<TriangleQuadraturePoint, 1> kCentroid{{{{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}, 1.0}}};

const std::array<TriangleQuadraturePoint, 3> kThreePoint{{
    {{2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0}, 1.0 / 3.0},
    {{1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0}, 1.0 / 3.0},
    {{1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0}, 1.0 / 3.0},
}};

// Radon's 7-point rule, degree 5
const std::array<TriangleQuadraturePoint, 7> kSevenPoint = [] {
    const double s = std::sqrt(15.0);
    const double a1 = (6.0 - s) / 21.0, b1 = (9.0 + 2.0 * s) / 21.0, w1 = (155.0 - s) / 1200.0;
    const double a2 = (6.0 + s) / 21.0, b2 = (9.0 - 2.0 * s) / 21.0, w2 = (155.0 + s) / 1200.0;
    return std::array<TriangleQuadraturePoint, 7>{{
        {{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}, 9.0 / 40.0},
        {{b1, a1, a1}, w1},
        {{a1, b1, a1}, w1},
        {{a1, a1, b1}, w1},
        {{b2, a2, a2}, w2},
        {{a2, b2, a2}, w2},
        {{a2, a2, b2}, w2},
    }};
}();

const std::array<SegmentQuadraturePoint, 1> kGauss1{{{0.5, 1.0}}};
const std::array<SegmentQuadraturePoint, 2> kGauss2 = [] {
    const double d = 0.5 / std::sqrt(3.0);
    return std::array<SegmentQuadraturePoint, 2>{{{0.5 - d, 0.5}, {0.5 + d, 0.5}}};
}();
const std::array<SegmentQuadraturePoint, 3> kGauss3 = [] {
    const double d = 0.5 * std::sqrt(0.6);
    return std::array<SegmentQuadraturePoint, 3>{{{0.5 - d, 5.0 / 18.0}, {0.5, 4.0 / 9.0}, {0.5 + d, 5.0 / 18.0}}};
}();

} // namespace

std::span<const TriangleQuadraturePoint> triangle_rule(int degree) {
    switch (degree) {
    case 1: return kCentroid;
    case 2: return kThreePoint;
    case 5: return kSevenPoint;
    default: throw UnsupportedDegree("triangle quadrature degree " + std::to_string(degree) + " not in {1, 2, 5}");
    }
}

std::span<const SegmentQuadraturePoint> gauss_rule(int npoints) {
    switch (npoints) {
    case 1: return kGauss1;
    case 2: return kGauss2;
    case 3: return kGauss3;
    default: throw UnsupportedDegree("Gauss rule with " + std::to_string(npoints) + " points not in {1, 2, 3}");
    }
}

double integrate_triangle(const PointFunction& f, const std::array<Vec2, 3>& tri, int degree) {
    const double area = std::abs(signed_area(tri[0], tri[1], tri[2]));
    double sum = 0.0;
    for (const auto& q : triangle_rule(degree)) sum += q.weight * f(map_barycentric(tri, q.barycentric));
    return area * sum;
}

double integrate_segment(const PointFunction& f, const Vec2& a, const Vec2& b, int npoints) {
    const Vec2 d = b - a;
    double sum = 0.0;
    for (const auto& q : gauss_rule(npoints)) sum += q.weight * f(a + d * q.t);
    return norm(d) * sum;
}

double integral_mean_triangle(const PointFunction& f, const std::array<Vec2, 3>& tri, int degree) {
    double sum = 0.0;
    for (const auto& q : triangle_rule(degree)) sum += q.weight * f(map_barycentric(tri, q.barycentric));
    return sum;
}

double integral_mean_segment(const PointFunction& f, const Vec2& a, const Vec2& b, int npoints) {
    double sum = 0.0;
    for (const auto& q : gauss_rule(npoints)) sum += q.weight * f(a + (b - a) * q.t);
    return sum;
}

} // namespace afvm

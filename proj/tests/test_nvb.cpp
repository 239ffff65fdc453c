#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "afvm/errors.hpp"
#include "afvm/nvb.hpp"
#include "afvm/problems.hpp"
#include "support.hpp"

using namespace afvm;

namespace {

double max_edge_length(const Triangulation& m) {
    double h = 0.0;
    for (std::size_t e = 0; e < m.num_elements(); ++e) h = std::max(h, element_geometry(m, static_cast<ElementId>(e)).diam);
    return h;
}

bool inside_triangle(const std::array<Vec2, 3>& t, const Vec2& p, double tol) {
    for (int k = 0; k < 3; ++k)
        if (signed_area(t[static_cast<std::size_t>(k)], t[static_cast<std::size_t>((k + 1) % 3)], p) < -tol) return false;
    return true;
}

// Conformity oracle independent of the edge table: every undirected vertex
// pair is used by at most two elements, and pairs used once lie on the
// boundary of the square (−1,1)².
void check_conforming_square(const Triangulation& m) {
    std::map<std::pair<VertexId, VertexId>, int> count;
    for (const auto& t : m.elements())
        for (int k = 0; k < 3; ++k) {
            VertexId a = t[static_cast<std::size_t>(k)], b = t[static_cast<std::size_t>((k + 1) % 3)];
            if (a > b) std::swap(a, b);
            ++count[{a, b}];
        }
    for (const auto& [pair, n] : count) {
        REQUIRE(n <= 2);
        if (n == 1) {
            const Vec2 mid = midpoint(m.vertex(pair.first), m.vertex(pair.second));
            CHECK(std::max(std::abs(mid.x), std::abs(mid.y)) == doctest::Approx(1.0));
        }
    }
    // no vertex lies in the interior of another element's edge
    for (std::size_t e = 0; e < m.num_elements(); ++e)
        CHECK(m.area(static_cast<ElementId>(e)) > 0.0);
}

} // namespace

TEST_SUITE("nvb_refine") {

TEST_CASE("empty marking leaves the mesh unchanged") {
    const Triangulation m = problem_square_smooth().initial_mesh;
    const RefinementResult r = refine(m, std::vector<ElementId>{});
    CHECK(r.new_mesh.num_elements() == m.num_elements());
    CHECK(r.refined_set.empty());
}

TEST_CASE("marking one triangle of the diagonal-split square bisects both") {
    const RefinementResult r = refine(afvm::test::two_triangle_square(), std::vector<ElementId>{0});
    CHECK(r.new_mesh.num_elements() == 4);
    CHECK(r.refined_set == ElementSet{0, 1});
}

TEST_CASE("a triangle with all edges refined gets four children") {
    const RefinementResult r = refine_uniform(afvm::test::unit_triangle());
    CHECK(r.new_mesh.num_elements() == 4);
    for (ElementId parent : r.parent_of) CHECK(parent == 0);
}

TEST_CASE("uniform refinement of the square") {
    Triangulation m = afvm::test::two_triangle_square();
    const RefinementResult first = refine_uniform(m);
    CHECK(first.new_mesh.num_elements() == 8);
    m = first.new_mesh;
    double h = max_edge_length(m);
    for (int step = 0; step < 4; ++step) {
        const RefinementResult r = refine_uniform(m);
        CHECK(r.new_mesh.num_elements() == 4 * m.num_elements());
        const double h_new = max_edge_length(r.new_mesh);
        CHECK(std::abs(h_new - 0.5 * h) <= 1e-12 * h);
        m = r.new_mesh;
        h = h_new;
    }
}

TEST_CASE("invalid marks are rejected") {
    const Triangulation m = afvm::test::unit_triangle();
    CHECK_THROWS_AS(refine(m, std::vector<ElementId>{1}), InvalidMark);
    CHECK_THROWS_AS(refine(m, std::vector<ElementId>{-1}), InvalidMark);
}

TEST_CASE("random refinements stay conforming and nested") {
    std::mt19937_64 rng(2024);
    std::bernoulli_distribution coin(0.15);
    Triangulation m = problem_square_smooth().initial_mesh;
    int trials = 0;
    while (trials < 1000) {
        std::vector<ElementId> marked;
        for (std::size_t e = 0; e < m.num_elements(); ++e)
            if (coin(rng)) marked.push_back(static_cast<ElementId>(e));
        if (marked.empty()) marked.push_back(static_cast<ElementId>(rng() % m.num_elements()));
        const RefinementResult r = refine(m, marked);
        ++trials;

        CHECK(r.new_mesh.num_elements() > m.num_elements());
        CHECK(std::includes(r.refined_set.begin(), r.refined_set.end(), marked.begin(), marked.end()));

        std::vector<double> child_area(m.num_elements(), 0.0);
        std::vector<int> children(m.num_elements(), 0);
        for (std::size_t c = 0; c < r.new_mesh.num_elements(); ++c) {
            const ElementId parent = r.parent_of[c];
            const ElementId child = static_cast<ElementId>(c);
            child_area[static_cast<std::size_t>(parent)] += r.new_mesh.area(child);
            ++children[static_cast<std::size_t>(parent)];
            CHECK(r.new_mesh.region_tag(child) == m.region_tag(parent));
            for (const Vec2& p : r.new_mesh.corners(child)) CHECK(inside_triangle(m.corners(parent), p, 1e-12));
            const bool bisected = std::binary_search(r.refined_set.begin(), r.refined_set.end(), parent);
            if (bisected) {
                CHECK(r.new_mesh.generation(child) >= m.generation(parent) + 1);
                CHECK(r.new_mesh.generation(child) <= m.generation(parent) + 2);
            } else {
                CHECK(r.new_mesh.generation(child) == m.generation(parent));
            }
        }
        for (std::size_t p = 0; p < m.num_elements(); ++p) {
            CHECK(std::abs(child_area[p] - m.area(static_cast<ElementId>(p))) <= 1e-12 * m.area(static_cast<ElementId>(p)));
            const bool bisected = std::binary_search(r.refined_set.begin(), r.refined_set.end(), static_cast<ElementId>(p));
            if (bisected) {
                CHECK(children[p] >= 2);
            } else {
                CHECK(children[p] == 1);
            }
        }
        check_conforming_square(r.new_mesh);

        // restart from the initial mesh now and then to keep sizes small
        m = r.new_mesh.num_elements() > 3000 ? problem_square_smooth().initial_mesh : r.new_mesh;
    }
}

TEST_CASE("minimum angle stays above half the initial minimum") {
    for (const ProblemSpec& p : {problem_square_smooth(), problem_lshape_singular()}) {
        std::mt19937_64 rng(99);
        Triangulation m = p.initial_mesh;
        const double alpha0 = min_angle(m);
        for (int level = 0; level < 12; ++level) {
            m = afvm::test::random_refine(m, 1, 0.25, rng);
            CHECK(min_angle(m) >= 0.5 * alpha0);
        }
    }
}

} // TEST_SUITE

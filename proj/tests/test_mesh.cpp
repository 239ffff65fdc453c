#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <nlohmann/json.hpp>

#include "afvm/errors.hpp"
#include "afvm/mesh.hpp"
#include "afvm/problems.hpp"
#include "support.hpp"

using namespace afvm;
using afvm::test::two_triangle_square;
using afvm::test::unit_triangle;

TEST_SUITE("mesh_core") {

TEST_CASE("single triangle has three boundary edges") {
    const Triangulation m = unit_triangle();
    CHECK(m.num_boundary_edges() == 3);
    CHECK(m.num_interior_edges() == 0);
}

TEST_CASE("two-triangle square has one interior and four boundary edges") {
    const Triangulation m = two_triangle_square();
    CHECK(m.num_interior_edges() == 1);
    CHECK(m.num_boundary_edges() == 4);
}

TEST_CASE("duplicated element is rejected") {
    CHECK_THROWS_AS(build_triangulation({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}, {0, 1, 2}}), NonConforming);
}

TEST_CASE("edge with three incident elements is rejected") {
    CHECK_THROWS_AS(build_triangulation({{0, 0}, {1, 0}, {0, 1}, {0, -1}, {1, 1}}, {{0, 1, 2}, {1, 0, 3}, {0, 1, 4}}),
                    NonConforming);
}

TEST_CASE("degenerate and out-of-range elements are rejected") {
    CHECK_THROWS_AS(build_triangulation({{0, 0}, {1, 0}, {2, 0}}, {{0, 1, 2}}), DegenerateElement);
    CHECK_THROWS_AS(build_triangulation({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 3}}), IndexOutOfRange);
}

TEST_CASE("clockwise input is normalized to counterclockwise") {
    const Triangulation m = build_triangulation({{0, 0}, {1, 0}, {0, 1}}, {{0, 2, 1}});
    const auto c = m.corners(0);
    CHECK(signed_area(c[0], c[1], c[2]) == doctest::Approx(0.5));
}

TEST_CASE("element geometry of the unit right triangle") {
    const ElementGeometry g = element_geometry(unit_triangle(), 0);
    CHECK(g.area == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(g.h == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
    CHECK(g.diam == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK(g.diam * g.diam / g.area == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(g.centroid.x == doctest::Approx(1.0 / 3.0));
    CHECK(g.centroid.y == doctest::Approx(1.0 / 3.0));
    for (int k = 0; k < 3; ++k) {
        CHECK(norm(g.edge_unit_normals[static_cast<std::size_t>(k)]) == doctest::Approx(1.0));
        // outward: pointing away from the centroid
        const auto c = unit_triangle().corners(0);
        const Vec2 mid = midpoint(c[static_cast<std::size_t>(k)], c[static_cast<std::size_t>((k + 1) % 3)]);
        CHECK(dot(g.edge_unit_normals[static_cast<std::size_t>(k)], mid - g.centroid) > 0.0);
    }
}

TEST_CASE("element geometry scales with the triangle") {
    const Triangulation m = build_triangulation({{0, 0}, {2, 0}, {0, 2}}, {{0, 1, 2}});
    const ElementGeometry g = element_geometry(m, 0);
    CHECK(g.area == doctest::Approx(2.0));
    CHECK(g.h == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("patch") {
    const Triangulation m = two_triangle_square();
    CHECK(patch(m, std::vector<ElementId>{}).empty());
    CHECK(patch(m, std::vector<ElementId>{0}) == ElementSet{0, 1});
    CHECK(patch(m, std::vector<ElementId>{0, 1}) == ElementSet{0, 1});

    // a patch contains exactly the elements sharing a vertex with the input
    const Triangulation fine = afvm::test::refine_uniformly(problem_square_smooth().initial_mesh, 2);
    const ElementSet p = patch(fine, std::vector<ElementId>{7});
    const auto seed = fine.element(7);
    for (std::size_t e = 0; e < fine.num_elements(); ++e) {
        const auto t = fine.element(static_cast<ElementId>(e));
        const bool touches = std::any_of(t.begin(), t.end(), [&](VertexId v) {
            return std::find(seed.begin(), seed.end(), v) != seed.end();
        });
        CHECK(std::binary_search(p.begin(), p.end(), static_cast<ElementId>(e)) == touches);
    }
}

TEST_CASE("shape regularity") {
    CHECK(shape_regularity(two_triangle_square()) == doctest::Approx(4.0));
    const Triangulation eq = build_triangulation({{0, 0}, {1, 0}, {0.5, std::sqrt(3.0) / 2.0}}, {{0, 1, 2}});
    CHECK(shape_regularity(eq) == doctest::Approx(4.0 / std::sqrt(3.0)).epsilon(1e-12));
    CHECK(min_angle(eq) == doctest::Approx(std::numbers::pi / 3.0));
}

TEST_CASE("shape regularity stays bounded under NVB") {
    std::mt19937_64 rng(11);
    Triangulation m = problem_lshape_singular().initial_mesh;
    const double sigma0 = shape_regularity(m);
    for (int level = 0; level < 10; ++level) {
        m = afvm::test::random_refine(m, 1, 0.3, rng);
        CHECK(shape_regularity(m) <= 2.0 * sigma0);
    }
}

TEST_CASE("areas partition the domain and the edge table is consistent") {
    for (const ProblemSpec& p : {problem_square_smooth(), problem_lshape_singular()}) {
        std::mt19937_64 rng(3);
        const Triangulation m = afvm::test::random_refine(p.initial_mesh, 6, 0.3, rng);
        const double expected = p.label == "square-smooth" ? 4.0 : 3.0;
        CHECK(std::abs(m.total_area() - expected) <= 1e-12 * expected);
        for (std::size_t id = 0; id < m.num_edges(); ++id) {
            const Edge& edge = m.edge(static_cast<EdgeId>(id));
            for (int s = 0; s < (edge.is_boundary() ? 1 : 2); ++s) {
                const ElementId e = edge.elements[static_cast<std::size_t>(s)];
                CHECK(m.element_edge(e, edge.local[static_cast<std::size_t>(s)]) == static_cast<EdgeId>(id));
            }
        }
    }
}

TEST_CASE("boundary vertices of the criss-cross square") {
    const Triangulation m = afvm::test::criss_cross_square();
    for (VertexId v = 0; v < 4; ++v) CHECK(m.is_boundary_vertex(v));
    CHECK_FALSE(m.is_boundary_vertex(4));
}

TEST_CASE("default reference edge is the longest edge") {
    const Triangulation m = build_triangulation({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}});
    // local edge 1 joins (1,0) and (0,1)
    CHECK(m.ref_edge(0) == 1);
}

TEST_CASE("mesh JSON round trip") {
    const Triangulation m = problem_lshape_singular().initial_mesh;
    const Triangulation back = mesh_from_json(mesh_to_json(m));
    REQUIRE(back.num_elements() == m.num_elements());
    for (std::size_t e = 0; e < m.num_elements(); ++e) {
        CHECK(back.element(static_cast<ElementId>(e)) == m.element(static_cast<ElementId>(e)));
        CHECK(back.ref_edge(static_cast<ElementId>(e)) == m.ref_edge(static_cast<ElementId>(e)));
    }
    CHECK_THROWS_AS(mesh_from_json(nlohmann::json::parse(R"({"vertices": [[0,0,1]], "elements": []})")), ParseError);
}

} // TEST_SUITE

#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "afvm/geometry.hpp"

namespace afvm {

using VertexId = int;
using ElementId = int;
using EdgeId = int;
using ElementSet = std::vector<ElementId>; ///< sorted, unique element ids

/// Undirected edge with its (one or two) incident elements.
///
/// `elements[1] == -1` marks a boundary edge. `local[k]` is the local edge
/// index of the edge inside `elements[k]`.
struct Edge {
    VertexId v0 = -1;
    VertexId v1 = -1;
    std::array<ElementId, 2> elements{-1, -1};
    std::array<int, 2> local{-1, -1};

    bool is_boundary() const { return elements[1] < 0; }
};

struct ElementGeometry {
    double area = 0.0;
    double h = 0.0;    ///< |T|^{1/2}
    double diam = 0.0; ///< longest edge
    std::array<double, 3> edge_lengths{};
    std::array<Vec2, 3> edge_unit_normals{}; ///< outward, edge k joins vertex k and k+1
    Vec2 centroid;
};

/// Conforming triangulation of a polygonal domain.
///
/// Elements are stored counterclockwise. Local edge k joins local vertices
/// k and (k+1)%3. `ref_edge(e)` is the local index of the newest-vertex
/// bisection reference edge. Immutable after construction.
class Triangulation {
public:
    Triangulation() = default;

    std::size_t num_vertices() const { return vertices_.size(); }
    std::size_t num_elements() const { return elements_.size(); }
    std::size_t num_edges() const { return edges_.size(); }

    std::span<const Vec2> vertices() const { return vertices_; }
    std::span<const std::array<VertexId, 3>> elements() const { return elements_; }
    std::span<const Edge> edges() const { return edges_; }

    const Vec2& vertex(VertexId v) const { return vertices_[static_cast<std::size_t>(v)]; }
    const std::array<VertexId, 3>& element(ElementId e) const { return elements_[static_cast<std::size_t>(e)]; }
    const Edge& edge(EdgeId id) const { return edges_[static_cast<std::size_t>(id)]; }
    std::array<Vec2, 3> corners(ElementId e) const;

    int ref_edge(ElementId e) const { return ref_edges_[static_cast<std::size_t>(e)]; }
    int region_tag(ElementId e) const { return region_tags_[static_cast<std::size_t>(e)]; }
    int generation(ElementId e) const { return generations_[static_cast<std::size_t>(e)]; }
    std::span<const int> ref_edges() const { return ref_edges_; }
    std::span<const int> region_tags() const { return region_tags_; }
    std::span<const int> generations() const { return generations_; }

    /// Edge id of local edge k of element e.
    EdgeId element_edge(ElementId e, int k) const { return element_edges_[static_cast<std::size_t>(e)][static_cast<std::size_t>(k)]; }
    /// Element across local edge k of e, or -1 on the boundary.
    ElementId neighbor(ElementId e, int k) const;

    bool is_boundary_vertex(VertexId v) const { return boundary_vertex_[static_cast<std::size_t>(v)] != 0; }
    std::size_t num_boundary_edges() const;
    std::size_t num_interior_edges() const { return num_edges() - num_boundary_edges(); }

    /// Constant gradients of the three nodal hat functions on e.
    std::array<Vec2, 3> hat_gradients(ElementId e) const;
    double area(ElementId e) const;
    double total_area() const;

    friend Triangulation build_triangulation(std::vector<Vec2>, std::vector<std::array<VertexId, 3>>,
                                             std::vector<int>, std::vector<int>, std::vector<int>);

private:
    std::vector<Vec2> vertices_;
    std::vector<std::array<VertexId, 3>> elements_;
    std::vector<int> ref_edges_;
    std::vector<int> region_tags_;
    std::vector<int> generations_;
    std::vector<Edge> edges_;
    std::vector<std::array<EdgeId, 3>> element_edges_;
    std::vector<char> boundary_vertex_;
};

/// Validates the input, normalizes orientation to CCW and derives topology.
///
/// Empty `ref_edges` selects the longest edge of each element (ties broken by
/// the lowest opposite-vertex index). Empty `region_tags` / `generations`
/// default to zero.
///
/// Throws IndexOutOfRange, DegenerateElement or NonConforming.
Triangulation build_triangulation(std::vector<Vec2> vertices, std::vector<std::array<VertexId, 3>> elements,
                                  std::vector<int> ref_edges = {}, std::vector<int> region_tags = {},
                                  std::vector<int> generations = {});

/// Local index of the longest edge, ties broken by lowest opposite-vertex index.
int longest_edge_index(std::span<const Vec2> vertices, const std::array<VertexId, 3>& element);

ElementGeometry element_geometry(const Triangulation& mesh, ElementId e);

/// All elements sharing at least one point with an element of `elements`.
ElementSet patch(const Triangulation& mesh, std::span<const ElementId> elements);

/// max_T diam(T)^2 / |T|.
double shape_regularity(const Triangulation& mesh);

/// Smallest interior angle over all elements, in radians.
double min_angle(const Triangulation& mesh);

/// Largest h_T = |T|^{1/2}.
double max_mesh_size(const Triangulation& mesh);

Triangulation mesh_from_json(const nlohmann::json& j);
nlohmann::json mesh_to_json(const Triangulation& mesh);

} // namespace afvm

#pragma once

#include <span>
#include <vector>

#include "afvm/mesh.hpp"

namespace afvm {

/// Straight piece of a control-volume boundary inside one element.
///
/// Joins an edge midpoint and the element centroid; `unit_normal` points out
/// of the box of `node`.
struct FluxSegment {
    Vec2 start;
    Vec2 end;
    ElementId owner_element = -1;
    VertexId node = -1;
    Vec2 unit_normal;
    double length = 0.0;
};

/// Barycentric dual mesh: one box V_i per vertex a_i.
///
/// Segments are stored per (element, local vertex) pair: element e, local
/// vertex k owns segments 6e+2k (midpoint of edge k -> centroid) and 6e+2k+1
/// (centroid -> midpoint of edge k+2).
class DualMesh {
public:
    std::span<const double> box_areas() const { return box_areas_; }
    double box_area(VertexId v) const { return box_areas_[static_cast<std::size_t>(v)]; }
    bool node_is_interior(VertexId v) const { return interior_[static_cast<std::size_t>(v)] != 0; }
    std::size_t num_nodes() const { return box_areas_.size(); }

    std::span<const FluxSegment> segments() const { return segments_; }
    /// Segments bounding the box of `v`.
    std::vector<FluxSegment> node_segments(VertexId v) const;
    /// Polygon V_i ∩ T as (vertex, edge midpoint, centroid, edge midpoint), CCW.
    std::array<Vec2, 4> box_piece(const Triangulation& mesh, ElementId e, int local_vertex) const;

    friend DualMesh build_dual(const Triangulation& mesh);

private:
    std::vector<double> box_areas_;
    std::vector<char> interior_;
    std::vector<FluxSegment> segments_;
    std::vector<int> node_offsets_;
    std::vector<int> node_segment_ids_;
};

DualMesh build_dual(const Triangulation& mesh);

/// Shoelace area of a simple polygon given in CCW order.
double polygon_area(std::span<const Vec2> polygon);

/// Function constant on each box: the dual interpolant I* v of nodal values.
class BoxFunction {
public:
    explicit BoxFunction(std::vector<double> values) : values_(std::move(values)) {}

    double value(VertexId v) const { return values_[static_cast<std::size_t>(v)]; }
    std::span<const double> values() const { return values_; }

    /// Value at x inside element e: the box of the local vertex with the
    /// largest barycentric coordinate contains x.
    double evaluate(const Triangulation& mesh, ElementId e, const Vec2& x) const;
    /// ∫_T I*v dx computed from the box-piece polygons.
    double integral_over_element(const Triangulation& mesh, const DualMesh& dual, ElementId e) const;
    /// ∫_F I*v ds; the edge midpoint splits F between the boxes of its endpoints.
    double integral_over_edge(const Triangulation& mesh, EdgeId id) const;

private:
    std::vector<double> values_;
};

/// I* v := Σ v(a_i) χ_i. Throws DimensionMismatch on a length mismatch.
BoxFunction interpolate_dual(const Triangulation& mesh, std::span<const double> nodal_values);

} // namespace afvm

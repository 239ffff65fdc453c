#include "afvm/dual_mesh.hpp"

#include <string>

#include "afvm/errors.hpp"

namespace afvm {

namespace {

FluxSegment make_segment(const Vec2& from, const Vec2& to, ElementId e, VertexId node) {
    FluxSegment s;
    s.start = from;
    s.end = to;
    s.owner_element = e;
    s.node = node;
    const Vec2 d = to - from;
    s.length = norm(d);
    // the box piece is traversed counterclockwise, so the outward normal is d rotated by -90°
    s.unit_normal = Vec2{d.y, -d.x} * (1.0 / s.length);
    return s;
}

} // namespace

double polygon_area(std::span<const Vec2> polygon) {
    if (polygon.size() < 3) return 0.0;
    // relative to the first vertex, so small polygons far from the origin keep their precision
    double twice = 0.0;
    for (std::size_t i = 1; i + 1 < polygon.size(); ++i) twice += cross(polygon[i] - polygon[0], polygon[i + 1] - polygon[0]);
    return 0.5 * twice;
}

std::array<Vec2, 4> DualMesh::box_piece(const Triangulation& mesh, ElementId e, int local_vertex) const {
    const auto p = mesh.corners(e);
    const auto k = static_cast<std::size_t>(local_vertex);
    const Vec2 centroid = (p[0] + p[1] + p[2]) * (1.0 / 3.0);
    return {p[k], midpoint(p[k], p[(k + 1) % 3]), centroid, midpoint(p[(k + 2) % 3], p[k])};
}

std::vector<FluxSegment> DualMesh::node_segments(VertexId v) const {
    std::vector<FluxSegment> out;
    const auto i = static_cast<std::size_t>(v);
    for (int s = node_offsets_[i]; s < node_offsets_[i + 1]; ++s)
        out.push_back(segments_[static_cast<std::size_t>(node_segment_ids_[static_cast<std::size_t>(s)])]);
    return out;
}

DualMesh build_dual(const Triangulation& mesh) {
    DualMesh dual;
    const std::size_t nv = mesh.num_vertices();
    dual.box_areas_.assign(nv, 0.0);
    dual.interior_.assign(nv, 0);
    for (std::size_t v = 0; v < nv; ++v) dual.interior_[v] = mesh.is_boundary_vertex(static_cast<VertexId>(v)) ? 0 : 1;

    dual.segments_.reserve(6 * mesh.num_elements());
    std::vector<int> count(nv + 1, 0);
    for (std::size_t idx = 0; idx < mesh.num_elements(); ++idx) {
        const auto e = static_cast<ElementId>(idx);
        const auto& t = mesh.element(e);
        for (int k = 0; k < 3; ++k) {
            const auto piece = dual.box_piece(mesh, e, k);
            const VertexId node = t[static_cast<std::size_t>(k)];
            dual.box_areas_[static_cast<std::size_t>(node)] += polygon_area(piece);
            dual.segments_.push_back(make_segment(piece[1], piece[2], e, node));
            dual.segments_.push_back(make_segment(piece[2], piece[3], e, node));
            count[static_cast<std::size_t>(node) + 1] += 2;
        }
    }
    for (std::size_t v = 0; v < nv; ++v) count[v + 1] += count[v];
    dual.node_offsets_ = count;
    dual.node_segment_ids_.assign(dual.segments_.size(), 0);
    std::vector<int> fill(count.begin(), count.end() - 1);
    for (std::size_t s = 0; s < dual.segments_.size(); ++s) {
        const auto node = static_cast<std::size_t>(dual.segments_[s].node);
        dual.node_segment_ids_[static_cast<std::size_t>(fill[node]++)] = static_cast<int>(s);
    }
    return dual;
}

double BoxFunction::evaluate(const Triangulation& mesh, ElementId e, const Vec2& x) const {
    const auto p = mesh.corners(e);
    const double total = signed_area(p[0], p[1], p[2]);
    std::size_t best = 0;
    double best_lambda = -1.0;
    for (std::size_t k = 0; k < 3; ++k) {
        const double lambda = signed_area(x, p[(k + 1) % 3], p[(k + 2) % 3]) / total;
        if (lambda > best_lambda) {
            best_lambda = lambda;
            best = k;
        }
    }
    return value(mesh.element(e)[best]);
}

double BoxFunction::integral_over_element(const Triangulation& mesh, const DualMesh& dual, ElementId e) const {
    double sum = 0.0;
    const auto& t = mesh.element(e);
    for (int k = 0; k < 3; ++k) sum += value(t[static_cast<std::size_t>(k)]) * polygon_area(dual.box_piece(mesh, e, k));
    return sum;
}

double BoxFunction::integral_over_edge(const Triangulation& mesh, EdgeId id) const {
    const Edge& ed = mesh.edge(id);
    const Vec2 a = mesh.vertex(ed.v0);
    const Vec2 b = mesh.vertex(ed.v1);
    const Vec2 m = midpoint(a, b);
    return value(ed.v0) * norm(m - a) + value(ed.v1) * norm(b - m);
}

BoxFunction interpolate_dual(const Triangulation& mesh, std::span<const double> nodal_values) {
    if (nodal_values.size() != mesh.num_vertices())
        throw DimensionMismatch("interpolate_dual: " + std::to_string(nodal_values.size()) + " values for " +
                                std::to_string(mesh.num_vertices()) + " nodes");
    return BoxFunction(std::vector<double>(nodal_values.begin(), nodal_values.end()));
}

} // namespace afvm

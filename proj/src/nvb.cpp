#include "afvm/nvb.hpp"

#include <array>
#include <deque>
#include <string>

#include "afvm/errors.hpp"

namespace afvm {

namespace {

// Element in reference-first ordering: local edge 0 is the reference edge.
using Tri = std::array<VertexId, 3>;

struct Builder {
    std::vector<std::array<VertexId, 3>> elements;
    std::vector<int> region_tags;
    std::vector<int> generations;
    std::vector<ElementId> parent_of;

    void emit(const Tri& t, int region, int generation, ElementId parent) {
        elements.push_back(t);
        region_tags.push_back(region);
        generations.push_back(generation);
        parent_of.push_back(parent);
    }
};

// Children of [a, b, c] bisected at (a, b) with midpoint m. Both children
// keep local edge 0 opposite the new vertex m.
std::array<Tri, 2> bisect(const Tri& t, VertexId m) {
    return {Tri{t[2], t[0], m}, Tri{t[1], t[2], m}};
}

RefinementResult refine_marked_edges(const Triangulation& mesh, std::vector<char> edge_marked) {
    const std::size_t ne = mesh.num_elements();

    // closure: any element with a marked edge must have its reference edge marked
    std::deque<ElementId> work;
    for (std::size_t e = 0; e < ne; ++e) work.push_back(static_cast<ElementId>(e));
    while (!work.empty()) {
        const ElementId e = work.front();
        work.pop_front();
        const EdgeId ref = mesh.element_edge(e, mesh.ref_edge(e));
        if (edge_marked[static_cast<std::size_t>(ref)]) continue;
        bool any = false;
        for (int k = 0; k < 3; ++k) any = any || edge_marked[static_cast<std::size_t>(mesh.element_edge(e, k))];
        if (!any) continue;
        edge_marked[static_cast<std::size_t>(ref)] = 1;
        const ElementId other = mesh.neighbor(e, mesh.ref_edge(e));
        if (other >= 0) work.push_back(other);
    }

    std::vector<Vec2> vertices(mesh.vertices().begin(), mesh.vertices().end());
    std::vector<VertexId> midpoint_of(mesh.num_edges(), -1);
    for (std::size_t id = 0; id < mesh.num_edges(); ++id) {
        if (!edge_marked[id]) continue;
        const Edge& ed = mesh.edge(static_cast<EdgeId>(id));
        midpoint_of[id] = static_cast<VertexId>(vertices.size());
        vertices.push_back(midpoint(mesh.vertex(ed.v0), mesh.vertex(ed.v1)));
    }

    Builder out;
    out.elements.reserve(ne * 2);
    RefinementResult result;
    for (std::size_t idx = 0; idx < ne; ++idx) {
        const auto e = static_cast<ElementId>(idx);
        const auto& raw = mesh.element(e);
        const int r = mesh.ref_edge(e);
        const int region = mesh.region_tag(e);
        const int gen = mesh.generation(e);
        const Tri t{raw[static_cast<std::size_t>(r)], raw[static_cast<std::size_t>((r + 1) % 3)],
                    raw[static_cast<std::size_t>((r + 2) % 3)]};
        const VertexId m_ref = midpoint_of[static_cast<std::size_t>(mesh.element_edge(e, r))];
        if (m_ref < 0) {
            out.emit(t, region, gen, e);
            continue;
        }
        result.refined_set.push_back(e);
        // in reference-first order, edge (c, a) is old local r+2 and (b, c) is old local r+1
        const VertexId m_left = midpoint_of[static_cast<std::size_t>(mesh.element_edge(e, (r + 2) % 3))];
        const VertexId m_right = midpoint_of[static_cast<std::size_t>(mesh.element_edge(e, (r + 1) % 3))];
        const auto [left, right] = bisect(t, m_ref);
        if (m_left >= 0) {
            for (const Tri& c : bisect(left, m_left)) out.emit(c, region, gen + 2, e);
        } else {
            out.emit(left, region, gen + 1, e);
        }
        if (m_right >= 0) {
            for (const Tri& c : bisect(right, m_right)) out.emit(c, region, gen + 2, e);
        } else {
            out.emit(right, region, gen + 1, e);
        }
    }

    std::vector<int> refs(out.elements.size(), 0);
    result.new_mesh = build_triangulation(std::move(vertices), std::move(out.elements), std::move(refs),
                                          std::move(out.region_tags), std::move(out.generations));
    result.parent_of = std::move(out.parent_of);
    return result;
}

} // namespace

RefinementResult refine(const Triangulation& mesh, std::span<const ElementId> marked) {
    std::vector<char> edge_marked(mesh.num_edges(), 0);
    for (ElementId e : marked) {
        if (e < 0 || static_cast<std::size_t>(e) >= mesh.num_elements())
            throw InvalidMark("marked element " + std::to_string(e) + " out of range");
        edge_marked[static_cast<std::size_t>(mesh.element_edge(e, mesh.ref_edge(e)))] = 1;
    }
    return refine_marked_edges(mesh, std::move(edge_marked));
}

RefinementResult refine_uniform(const Triangulation& mesh) {
    return refine_marked_edges(mesh, std::vector<char>(mesh.num_edges(), 1));
}

} // namespace afvm

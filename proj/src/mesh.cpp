#include "afvm/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <tuple>

#include <nlohmann/json.hpp>

#include "afvm/errors.hpp"

namespace afvm {

namespace {

constexpr double kDegeneracyTolerance = 1e-14;

struct HalfEdge {
    VertexId lo;
    VertexId hi;
    ElementId element;
    int local;
    bool forward; // traversed lo -> hi inside `element`
};

} // namespace

std::array<Vec2, 3> Triangulation::corners(ElementId e) const {
    const auto& t = element(e);
    return {vertex(t[0]), vertex(t[1]), vertex(t[2])};
}

ElementId Triangulation::neighbor(ElementId e, int k) const {
    const Edge& ed = edge(element_edge(e, k));
    if (ed.is_boundary()) return -1;
    return ed.elements[0] == e ? ed.elements[1] : ed.elements[0];
}

std::size_t Triangulation::num_boundary_edges() const {
    return static_cast<std::size_t>(std::count_if(edges_.begin(), edges_.end(), [](const Edge& ed) { return ed.is_boundary(); }));
}

std::array<Vec2, 3> Triangulation::hat_gradients(ElementId e) const {
    const auto p = corners(e);
    const double twice_area = cross(p[1] - p[0], p[2] - p[0]);
    std::array<Vec2, 3> g;
    for (int i = 0; i < 3; ++i) {
        // gradient of the hat at vertex i is the inward normal of the opposite edge scaled by its length
        const Vec2 d = p[(i + 2) % 3] - p[(i + 1) % 3];
        g[static_cast<std::size_t>(i)] = Vec2{-d.y, d.x} * (1.0 / twice_area);
    }
    return g;
}

double Triangulation::area(ElementId e) const {
    const auto p = corners(e);
    return signed_area(p[0], p[1], p[2]);
}

double Triangulation::total_area() const {
    double sum = 0.0;
    for (std::size_t e = 0; e < num_elements(); ++e) sum += area(static_cast<ElementId>(e));
    return sum;
}

int longest_edge_index(std::span<const Vec2> vertices, const std::array<VertexId, 3>& element) {
    int best = 0;
    double best_len = -1.0;
    for (int k = 0; k < 3; ++k) {
        const Vec2 a = vertices[static_cast<std::size_t>(element[static_cast<std::size_t>(k)])];
        const Vec2 b = vertices[static_cast<std::size_t>(element[static_cast<std::size_t>((k + 1) % 3)])];
        const double len = norm(b - a);
        const VertexId opposite = element[static_cast<std::size_t>((k + 2) % 3)];
        const VertexId best_opposite = element[static_cast<std::size_t>((best + 2) % 3)];
        if (len > best_len || (len == best_len && opposite < best_opposite)) {
            best = k;
            best_len = len;
        }
    }
    return best;
}

Triangulation build_triangulation(std::vector<Vec2> vertices, std::vector<std::array<VertexId, 3>> elements,
                                  std::vector<int> ref_edges, std::vector<int> region_tags,
                                  std::vector<int> generations) {
    if (vertices.size() < 3) throw IndexOutOfRange("triangulation needs at least 3 vertices");
    if (elements.empty()) throw IndexOutOfRange("triangulation needs at least 1 element");
    const std::size_t ne = elements.size();
    const auto nv = static_cast<VertexId>(vertices.size());

    auto check_size = [ne](const std::vector<int>& v, const char* what) {
        if (!v.empty() && v.size() != ne)
            throw IndexOutOfRange(std::string(what) + " has " + std::to_string(v.size()) + " entries, expected " +
                                  std::to_string(ne));
    };
    check_size(ref_edges, "ref_edges");
    check_size(region_tags, "region_tags");
    check_size(generations, "generations");
    if (region_tags.empty()) region_tags.assign(ne, 0);
    if (generations.empty()) generations.assign(ne, 0);

    const bool derive_ref = ref_edges.empty();
    if (derive_ref) ref_edges.assign(ne, 0);

    for (std::size_t e = 0; e < ne; ++e) {
        auto& t = elements[e];
        for (VertexId v : t)
            if (v < 0 || v >= nv)
                throw IndexOutOfRange("element " + std::to_string(e) + " references vertex " + std::to_string(v));
        if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2])
            throw DegenerateElement("element " + std::to_string(e) + " repeats a vertex");
        int& ref = ref_edges[e];
        if (ref < 0 || ref > 2) throw IndexOutOfRange("ref_edge of element " + std::to_string(e) + " not in 0..2");

        const Vec2 a = vertices[static_cast<std::size_t>(t[0])];
        const Vec2 b = vertices[static_cast<std::size_t>(t[1])];
        const Vec2 c = vertices[static_cast<std::size_t>(t[2])];
        double area = signed_area(a, b, c);
        const double longest = std::max({norm(b - a), norm(c - b), norm(a - c)});
        if (std::abs(area) <= kDegeneracyTolerance * longest * longest)
            throw DegenerateElement("element " + std::to_string(e) + " has (near) zero area");
        if (area < 0.0) {
            // swapping local vertices 1 and 2 maps local edges 0 <-> 2
            std::swap(t[1], t[2]);
            ref = 2 - ref;
        }
        if (derive_ref) ref = longest_edge_index(vertices, t);
    }

    std::vector<HalfEdge> half;
    half.reserve(3 * ne);
    for (std::size_t e = 0; e < ne; ++e) {
        const auto& t = elements[e];
        for (int k = 0; k < 3; ++k) {
            const VertexId a = t[static_cast<std::size_t>(k)];
            const VertexId b = t[static_cast<std::size_t>((k + 1) % 3)];
            half.push_back({std::min(a, b), std::max(a, b), static_cast<ElementId>(e), k, a < b});
        }
    }
    std::sort(half.begin(), half.end(), [](const HalfEdge& l, const HalfEdge& r) {
        return std::tie(l.lo, l.hi, l.element, l.local) < std::tie(r.lo, r.hi, r.element, r.local);
    });

    Triangulation mesh;
    mesh.element_edges_.assign(ne, {-1, -1, -1});
    mesh.boundary_vertex_.assign(vertices.size(), 0);
    for (std::size_t i = 0; i < half.size();) {
        std::size_t j = i;
        while (j < half.size() && half[j].lo == half[i].lo && half[j].hi == half[i].hi) ++j;
        const std::size_t count = j - i;
        if (count > 2)
            throw NonConforming("edge (" + std::to_string(half[i].lo) + "," + std::to_string(half[i].hi) + ") has " +
                                std::to_string(count) + " incident elements");
        if (count == 2 && half[i].forward == half[i + 1].forward)
            throw NonConforming("elements " + std::to_string(half[i].element) + " and " +
                                std::to_string(half[i + 1].element) + " overlap along edge (" +
                                std::to_string(half[i].lo) + "," + std::to_string(half[i].hi) + ")");
        Edge ed;
        ed.v0 = half[i].lo;
        ed.v1 = half[i].hi;
        for (std::size_t k = 0; k < count; ++k) {
            ed.elements[k] = half[i + k].element;
            ed.local[k] = half[i + k].local;
        }
        const auto id = static_cast<EdgeId>(mesh.edges_.size());
        for (std::size_t k = 0; k < count; ++k)
            mesh.element_edges_[static_cast<std::size_t>(half[i + k].element)][static_cast<std::size_t>(half[i + k].local)] = id;
        if (count == 1) {
            mesh.boundary_vertex_[static_cast<std::size_t>(ed.v0)] = 1;
            mesh.boundary_vertex_[static_cast<std::size_t>(ed.v1)] = 1;
        }
        mesh.edges_.push_back(ed);
        i = j;
    }

    mesh.vertices_ = std::move(vertices);
    mesh.elements_ = std::move(elements);
    mesh.ref_edges_ = std::move(ref_edges);
    mesh.region_tags_ = std::move(region_tags);
    mesh.generations_ = std::move(generations);
    return mesh;
}

ElementGeometry element_geometry(const Triangulation& mesh, ElementId e) {
    if (e < 0 || static_cast<std::size_t>(e) >= mesh.num_elements())
        throw IndexOutOfRange("element id " + std::to_string(e) + " out of range");
    const auto p = mesh.corners(e);
    ElementGeometry g;
    g.area = signed_area(p[0], p[1], p[2]);
    g.h = std::sqrt(g.area);
    for (std::size_t k = 0; k < 3; ++k) {
        const Vec2 d = p[(k + 1) % 3] - p[k];
        const double len = norm(d);
        g.edge_lengths[k] = len;
        g.edge_unit_normals[k] = Vec2{d.y, -d.x} * (1.0 / len);
        g.diam = std::max(g.diam, len);
    }
    g.centroid = (p[0] + p[1] + p[2]) * (1.0 / 3.0);
    return g;
}

ElementSet patch(const Triangulation& mesh, std::span<const ElementId> elements) {
    std::vector<char> touched(mesh.num_vertices(), 0);
    for (ElementId e : elements) {
        if (e < 0 || static_cast<std::size_t>(e) >= mesh.num_elements())
            throw IndexOutOfRange("element id " + std::to_string(e) + " out of range");
        for (VertexId v : mesh.element(e)) touched[static_cast<std::size_t>(v)] = 1;
    }
    ElementSet out;
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const auto& t = mesh.element(static_cast<ElementId>(e));
        if (touched[static_cast<std::size_t>(t[0])] || touched[static_cast<std::size_t>(t[1])] ||
            touched[static_cast<std::size_t>(t[2])])
            out.push_back(static_cast<ElementId>(e));
    }
    return out;
}

double shape_regularity(const Triangulation& mesh) {
    double sigma = 0.0;
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const auto g = element_geometry(mesh, static_cast<ElementId>(e));
        sigma = std::max(sigma, g.diam * g.diam / g.area);
    }
    return sigma;
}

double min_angle(const Triangulation& mesh) {
    double smallest = std::numbers::pi;
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const auto p = mesh.corners(static_cast<ElementId>(e));
        for (std::size_t k = 0; k < 3; ++k) {
            const Vec2 u = p[(k + 1) % 3] - p[k];
            const Vec2 w = p[(k + 2) % 3] - p[k];
            smallest = std::min(smallest, std::atan2(std::abs(cross(u, w)), dot(u, w)));
        }
    }
    return smallest;
}

double max_mesh_size(const Triangulation& mesh) {
    double h = 0.0;
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) h = std::max(h, std::sqrt(mesh.area(static_cast<ElementId>(e))));
    return h;
}

Triangulation mesh_from_json(const nlohmann::json& j) {
    try {
        std::vector<Vec2> vertices;
        for (const auto& v : j.at("vertices")) {
            if (v.size() != 2) throw ParseError("mesh vertex must be [x, y]");
            vertices.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
        }
        std::vector<std::array<VertexId, 3>> elements;
        for (const auto& t : j.at("elements")) {
            if (t.size() != 3) throw ParseError("mesh element must be [i, j, k]");
            elements.push_back({t.at(0).get<VertexId>(), t.at(1).get<VertexId>(), t.at(2).get<VertexId>()});
        }
        std::vector<int> ref_edges = j.value("ref_edges", std::vector<int>{});
        std::vector<int> region_tags = j.value("region_tags", std::vector<int>{});
        return build_triangulation(std::move(vertices), std::move(elements), std::move(ref_edges), std::move(region_tags));
    } catch (const nlohmann::json::exception& ex) {
        throw ParseError(std::string("invalid mesh JSON: ") + ex.what());
    }
}

nlohmann::json mesh_to_json(const Triangulation& mesh) {
    nlohmann::json j;
    j["vertices"] = nlohmann::json::array();
    for (const Vec2& p : mesh.vertices()) j["vertices"].push_back({p.x, p.y});
    j["elements"] = nlohmann::json::array();
    for (const auto& t : mesh.elements()) j["elements"].push_back({t[0], t[1], t[2]});
    j["ref_edges"] = std::vector<int>(mesh.ref_edges().begin(), mesh.ref_edges().end());
    j["region_tags"] = std::vector<int>(mesh.region_tags().begin(), mesh.region_tags().end());
    return j;
}

} // namespace afvm

#pragma once

#include <span>
#include <vector>

#include "afvm/mesh.hpp"

namespace afvm {

struct RefinementResult {
    Triangulation new_mesh;
    std::vector<ElementId> parent_of; ///< per new element: id of its parent in the old mesh
    ElementSet refined_set;           ///< old elements that were bisected (superset of the marks)
};

/// Newest-vertex bisection of the marked elements plus conforming closure.
///
/// Each marked element is bisected once across its reference edge. Elements
/// whose edges received a midpoint are bisected until no hanging node
/// remains; depending on the marked edges an element yields 2, 3 or 4
/// children. Throws InvalidMark for ids out of range.
RefinementResult refine(const Triangulation& mesh, std::span<const ElementId> marked);

/// Bisects all three edges of every element (four children each).
RefinementResult refine_uniform(const Triangulation& mesh);

} // namespace afvm

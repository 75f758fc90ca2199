#pragma once

#include <string>
#include <vector>

#include "vin/types.hpp"

namespace vin {

struct IcsParams {
    double c_gamma = 1.0;
    double m_p = 0.1;
    // declared alongside c_gamma upstream but unused by the procedure;
    // kept so configs round-trip
    double c_alpha = 1.0;
};

struct IcsChange {
    enum class Kind { box_override, box_swap, point_relabel };
    Kind kind;
    // box_override: box a relabeled from -> to
    // box_swap: labels of boxes a and b exchanged
    // point_relabel: point a relabeled from -> to by box b
    std::size_t a = 0;
    std::size_t b = 0;
    int from = 0;
    int to = 0;

    std::string to_string() const;
};

struct IcsResult {
    std::vector<BoundingBox7> boxes; // sorted descending by score, ties by instance id
    PointCloud cloud;
    std::vector<IcsChange> log;
};

// Two-phase label repair: boxes relabeled from point evidence, then
// low-confidence points relabeled from box evidence.
IcsResult ics(const std::vector<BoundingBox7>& boxes, const PointCloud& cloud,
              const ClassTaxonomy& taxonomy, const IcsParams& params);

} // namespace vin

#pragma once

#include <cstdint>
#include <vector>

#include "vin/types.hpp"

namespace vin {

struct PanopticCloud {
    std::vector<int> sem_label;
    std::vector<std::uint32_t> instance; // 0 for stuff and unassigned points
    std::size_t size() const { return sem_label.size(); }
};

struct PanopticOptions {
    // When false, a point takes the instance of any containing box
    // regardless of class agreement (ablation mode).
    bool require_class_match = true;
};

// Assign box instance ids to the points inside them. Candidate boxes
// must contain the point (and match its class unless disabled); the
// highest-score candidate wins, ties by smallest instance id. Stuff
// points and thing points outside all candidate boxes keep instance 0.
PanopticCloud assign_instances(const std::vector<BoundingBox7>& boxes,
                               const PointCloud& cloud, const ClassTaxonomy& taxonomy,
                               const PanopticOptions& opts = {});

} // namespace vin

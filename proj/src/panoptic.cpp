#include "vin/panoptic.hpp"

#include <set>
#include <stdexcept>

namespace vin {

PanopticCloud assign_instances(const std::vector<BoundingBox7>& boxes,
                               const PointCloud& cloud, const ClassTaxonomy& taxonomy,
                               const PanopticOptions& opts) {
    if (!cloud.has_labels())
        throw std::invalid_argument("assign_instances: cloud needs semantic labels");
    std::set<std::uint32_t> ids;
    for (const BoundingBox7& b : boxes) {
        if (!ids.insert(b.instance_id).second)
            throw std::invalid_argument("assign_instances: duplicate box instance id");
    }

    PanopticCloud out;
    out.sem_label = cloud.sem_label;
    out.instance.assign(cloud.size(), 0);

    for (std::size_t p = 0; p < cloud.size(); ++p) {
        int label = cloud.sem_label[p];
        if (label == kIgnoreClass || !taxonomy.is_thing(label)) continue;
        const BoundingBox7* best = nullptr;
        for (const BoundingBox7& b : boxes) {
            if (opts.require_class_match && b.class_id != label) continue;
            if (!box_contains(b, cloud.points[p])) continue;
            if (!best || b.score > best->score ||
                (b.score == best->score && b.instance_id < best->instance_id))
                best = &b;
        }
        if (best) out.instance[p] = best->instance_id;
    }
    return out;
}

} // namespace vin

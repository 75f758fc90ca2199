#include "vin/types.hpp"

#include <cmath>

namespace vin {

bool box_contains(const BoundingBox7& box, const Point& p) {
    double dx = p.x - box.cx;
    double dy = p.y - box.cy;
    double dz = p.z - box.cz;
    double c = std::cos(box.yaw);
    double s = std::sin(box.yaw);
    // rotate into the box frame (inverse rotation by -yaw)
    double bx = c * dx + s * dy;
    double by = -s * dx + c * dy;
    return std::abs(bx) <= 0.5 * box.l && std::abs(by) <= 0.5 * box.w &&
           std::abs(dz) <= 0.5 * box.h;
}

} // namespace vin

#include "vin/grid.hpp"

#include <algorithm>
#include <cmath>

namespace vin {

namespace {

std::array<long long, 3> raw_index(const GridSpec& spec, const Point& p) {
    return {
        static_cast<long long>(std::floor((p.z - spec.z0) / spec.vz)),
        static_cast<long long>(std::floor((p.y - spec.y0) / spec.vy)),
        static_cast<long long>(std::floor((p.x - spec.x0) / spec.vx)),
    };
}

} // namespace

std::optional<VoxelIndex> grid_index_of(const GridSpec& spec, const Point& p) {
    auto [i, j, k] = raw_index(spec, p);
    if (i < 0 || i >= spec.D || j < 0 || j >= spec.H || k < 0 || k >= spec.W)
        return std::nullopt;
    return VoxelIndex{static_cast<int>(i), static_cast<int>(j), static_cast<int>(k)};
}

Point voxel_center(const GridSpec& spec, const VoxelIndex& idx) {
    if (idx.i < 0 || idx.i >= spec.D || idx.j < 0 || idx.j >= spec.H ||
        idx.k < 0 || idx.k >= spec.W)
        throw std::out_of_range("voxel index out of range");
    Point c;
    c.x = spec.x0 + (idx.k + 0.5) * spec.vx;
    c.y = spec.y0 + (idx.j + 0.5) * spec.vy;
    c.z = spec.z0 + (idx.i + 0.5) * spec.vz;
    return c;
}

VoxelIndex nearest_voxel(const GridSpec& spec, const Point& p) {
    auto [i, j, k] = raw_index(spec, p);
    auto clamp = [](long long v, int dim) {
        return static_cast<int>(std::clamp<long long>(v, 0, dim - 1));
    };
    return VoxelIndex{clamp(i, spec.D), clamp(j, spec.H), clamp(k, spec.W)};
}

FeatureMap featurize(const GridSpec& spec, const PointCloud& cloud) {
    spec.validate();
    FeatureMap map;
    map.spec = spec;
    map.C = kFeatureChannels;
    map.data.assign(static_cast<std::size_t>(kFeatureChannels) * spec.num_voxels(), 0.0f);

    const std::size_t nvox = spec.num_voxels();
    struct Acc {
        std::int64_t count = 0;
        double sum_intensity = 0.0;
        double sum_dx = 0.0, sum_dy = 0.0, sum_dz = 0.0;
        double max_z = 0.0, min_z = 0.0;
        double sum_range = 0.0;
    };
    std::vector<Acc> acc(nvox);

    const double gcx = spec.x0 + 0.5 * spec.W * spec.vx;
    const double gcy = spec.y0 + 0.5 * spec.H * spec.vy;
    const double gcz = spec.z0 + 0.5 * spec.D * spec.vz;

    for (const Point& p : cloud.points) {
        auto idx = grid_index_of(spec, p);
        if (!idx) continue;
        std::size_t flat =
            (static_cast<std::size_t>(idx->i) * spec.H + idx->j) * spec.W + idx->k;
        Point c = voxel_center(spec, *idx);
        Acc& a = acc[flat];
        if (a.count == 0) {
            a.max_z = p.z;
            a.min_z = p.z;
        } else {
            a.max_z = std::max(a.max_z, p.z);
            a.min_z = std::min(a.min_z, p.z);
        }
        ++a.count;
        a.sum_intensity += p.intensity;
        a.sum_dx += (p.x - c.x) / spec.vx;
        a.sum_dy += (p.y - c.y) / spec.vy;
        a.sum_dz += (p.z - c.z) / spec.vz;
        double dx = p.x - gcx, dy = p.y - gcy, dz = p.z - gcz;
        a.sum_range += std::sqrt(dx * dx + dy * dy + dz * dz) / 10.0;
    }

    for (std::size_t v = 0; v < nvox; ++v) {
        const Acc& a = acc[v];
        if (a.count == 0) continue;
        double n = static_cast<double>(a.count);
        float* ch = map.data.data();
        ch[0 * nvox + v] = static_cast<float>(std::log1p(n));
        ch[1 * nvox + v] = static_cast<float>(a.sum_intensity / n);
        ch[2 * nvox + v] = static_cast<float>(a.sum_dx / n);
        ch[3 * nvox + v] = static_cast<float>(a.sum_dy / n);
        ch[4 * nvox + v] = static_cast<float>(a.sum_dz / n);
        ch[5 * nvox + v] = static_cast<float>(a.max_z);
        ch[6 * nvox + v] = static_cast<float>(a.min_z);
        ch[7 * nvox + v] = static_cast<float>(a.max_z - a.min_z);
        ch[8 * nvox + v] = static_cast<float>(a.sum_range / n);
        ch[9 * nvox + v] = 1.0f;
    }
    return map;
}

} // namespace vin

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "vin/types.hpp"

namespace vin {

// Index order is (i,j,k) = (z,y,x): D indexes z, H indexes y, W indexes x.
struct VoxelIndex {
    int i = 0; // z
    int j = 0; // y
    int k = 0; // x
    bool operator==(const VoxelIndex&) const = default;
};

struct GridSpec {
    double x0 = 0.0, y0 = 0.0, z0 = 0.0;
    double vx = 0.1, vy = 0.1, vz = 0.1;
    int D = 1, H = 1, W = 1;

    void validate() const {
        if (vx <= 0.0 || vy <= 0.0 || vz <= 0.0)
            throw std::invalid_argument("voxel sizes must be positive");
        if (D <= 0 || H <= 0 || W <= 0)
            throw std::invalid_argument("grid dims must be positive");
    }

    std::size_t num_voxels() const {
        return static_cast<std::size_t>(D) * H * W;
    }
};

struct FeatureMap {
    GridSpec spec;
    int C = 0;
    std::vector<float> data; // C x D x H x W, row-major

    std::size_t offset(int c, const VoxelIndex& v) const {
        return ((static_cast<std::size_t>(c) * spec.D + v.i) * spec.H + v.j) * spec.W + v.k;
    }
    float at(int c, const VoxelIndex& v) const { return data[offset(c, v)]; }
    float& at(int c, const VoxelIndex& v) { return data[offset(c, v)]; }
};

inline constexpr int kFeatureChannels = 10;

// Floor convention; boundary coordinates land in the upper cell.
std::optional<VoxelIndex> grid_index_of(const GridSpec& spec, const Point& p);

Point voxel_center(const GridSpec& spec, const VoxelIndex& idx);

// Per-axis clamp of the unclipped floor index; equals grid_index_of for
// in-grid points, otherwise the voxel with minimal center distance.
VoxelIndex nearest_voxel(const GridSpec& spec, const Point& p);

// Hand-crafted per-voxel statistics standing in for a learned backbone.
// Channels: [log(1+count), mean intensity, mean dx, mean dy, mean dz
// (offsets from voxel center in voxel-size units), max z, min z, z span,
// mean range from grid center (meters/10), occupancy flag].
FeatureMap featurize(const GridSpec& spec, const PointCloud& cloud);

} // namespace vin

#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "vin/grid.hpp"
#include "vin/head.hpp"
#include "vin/types.hpp"

namespace vin {

class IoError : public std::runtime_error {
public:
    IoError(const std::string& what, std::uint64_t byte_offset)
        : std::runtime_error(what + " (byte offset " + std::to_string(byte_offset) + ")"),
          offset(byte_offset) {}
    explicit IoError(const std::string& what) : std::runtime_error(what), offset(0) {}
    std::uint64_t offset;
};

// Binary cloud file: magic "VINP", u32le count N, then N records of
// 4 f32le (x, y, z, intensity). Total size 8 + 16N bytes.
void write_cloud(const std::filesystem::path& path, const PointCloud& cloud);
PointCloud read_cloud(const std::filesystem::path& path);

// Binary label file: magic "VINL", u32le count N, then N records of
// (u16le class_id, f32le score, u32le instance_id). class_id 0xFFFF
// encodes ignore. Total size 8 + 10N bytes.
struct LabelData {
    std::vector<int> sem_label;
    std::vector<double> sem_score;
    std::vector<std::uint32_t> instance;
    std::size_t size() const { return sem_label.size(); }
};
void write_labels(const std::filesystem::path& path, const LabelData& labels);
LabelData read_labels(const std::filesystem::path& path);

LabelData labels_of(const PointCloud& cloud);
void apply_labels(PointCloud& cloud, const LabelData& labels);

// JSON text formats; doubles round-trip exactly.
void write_boxes(const std::filesystem::path& path, const std::vector<BoundingBox7>& boxes);
std::vector<BoundingBox7> read_boxes(const std::filesystem::path& path);

void write_params(const std::filesystem::path& path, const HeadParams& params);
HeadParams read_params(const std::filesystem::path& path);

} // namespace vin

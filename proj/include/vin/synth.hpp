#pragma once

#include <cstdint>
#include <vector>

#include "vin/types.hpp"

namespace vin {

// Default six-class taxonomy used by the synthetic benchmark.
ClassTaxonomy default_taxonomy();

struct ObjectClassConfig {
    int class_id = 0;
    int min_count = 1;
    int max_count = 4;
    double min_l = 3.0, max_l = 5.0;
    double min_w = 1.5, max_w = 2.2;
    double min_h = 1.2, max_h = 2.0;
    double intensity = 0.8;       // base surface intensity
    int points_per_object = 400;
};

struct SceneConfig {
    double extent_x = 20.0;
    double extent_y = 20.0;
    double extent_z = 4.0;
    ClassTaxonomy taxonomy = default_taxonomy();
    std::vector<ObjectClassConfig> objects;
    int ground_class = 3;
    int wall_class = 4;
    int vegetation_class = 5;
    int ground_points = 30000;
    int wall_points = 8000;
    int vegetation_blobs = 5;
    int vegetation_points_per_blob = 1000;
    double ground_intensity = 0.10;
    double wall_intensity = 0.30;
    double vegetation_intensity = 0.95;
    double intensity_noise = 0.015;
    double sigma = 0.02; // sensor noise, meters
    std::uint64_t seed = 0;

    void validate() const;
};

SceneConfig default_scene_config();

struct Scene {
    PointCloud cloud;                 // gt labels, scores 1, instance ids
    std::vector<BoundingBox7> boxes;  // gt boxes, score 1
};

// Deterministic given (config, seed). Thing boxes are placed by
// rejection sampling so their BEV rectangles never overlap; object
// points are sampled on box surfaces, perturbed by sigma and clamped
// back inside the closed box. Stuff points falling inside a box are
// discarded.
Scene generate_scene(const SceneConfig& cfg);

struct PerturbConfig {
    double center_sigma = 0.1;
    double size_sigma = 0.05;  // relative
    double yaw_sigma = 0.05;
    double score_beta_a = 8.0;
    double score_beta_b = 2.0;
    double p_flip = 0.0;       // probability of flipping to another thing class
    double drop_rate = 0.0;
    double dup_rate = 0.0;
};

// Simulated detector output for ICS and panoptic experiments.
std::vector<BoundingBox7> perturb_detections(const std::vector<BoundingBox7>& gt,
                                             const ClassTaxonomy& taxonomy,
                                             const PerturbConfig& cfg, std::uint64_t seed);

// Weak-supervision mask: ceil(f*N) uniformly sampled point indices.
std::vector<std::uint8_t> mask_labels(const PointCloud& cloud, double fraction,
                                      std::uint64_t seed);

} // namespace vin

#include "vin/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "vin/rng.hpp"

namespace vin {

ClassTaxonomy default_taxonomy() {
    return ClassTaxonomy({
        {"car", ClassKind::thing},
        {"pedestrian", ClassKind::thing},
        {"truck", ClassKind::thing},
        {"ground", ClassKind::stuff},
        {"manmade", ClassKind::stuff},
        {"vegetation", ClassKind::stuff},
    });
}

void SceneConfig::validate() const {
    if (extent_x <= 0.0 || extent_y <= 0.0 || extent_z <= 0.0)
        throw std::invalid_argument("scene extents must be positive");
    if (ground_points <= 0 || wall_points <= 0)
        throw std::invalid_argument("stuff point counts must be positive");
    for (const ObjectClassConfig& o : objects) {
        if (!taxonomy.valid_id(o.class_id) || !taxonomy.is_thing(o.class_id))
            throw std::invalid_argument("object class must be a thing class");
        if (o.min_count < 0 || o.max_count < o.min_count)
            throw std::invalid_argument("bad object count range");
    }
}

SceneConfig default_scene_config() {
    SceneConfig cfg;
    cfg.objects = {
        {.class_id = 0, .min_count = 2, .max_count = 4,
         .min_l = 3.5, .max_l = 5.0, .min_w = 1.6, .max_w = 2.1,
         .min_h = 1.3, .max_h = 1.8, .intensity = 0.75, .points_per_object = 400},
        {.class_id = 1, .min_count = 3, .max_count = 6,
         .min_l = 0.5, .max_l = 0.8, .min_w = 0.5, .max_w = 0.8,
         .min_h = 1.5, .max_h = 1.9, .intensity = 0.45, .points_per_object = 300},
        {.class_id = 2, .min_count = 1, .max_count = 3,
         .min_l = 6.0, .max_l = 9.0, .min_w = 2.2, .max_w = 2.8,
         .min_h = 2.5, .max_h = 3.4, .intensity = 0.60, .points_per_object = 600},
    };
    return cfg;
}

namespace {

struct BevRect {
    double cx, cy, hx, hy, yaw;
};

BevRect bev_of(const BoundingBox7& b) {
    return {b.cx, b.cy, 0.5 * b.l, 0.5 * b.w, b.yaw};
}

// separating-axis test for two oriented rectangles
bool bev_overlap(const BevRect& a, const BevRect& b) {
    auto axes_of = [](const BevRect& r) {
        double c = std::cos(r.yaw), s = std::sin(r.yaw);
        return std::array<std::array<double, 2>, 2>{{{c, s}, {-s, c}}};
    };
    auto corners_of = [](const BevRect& r) {
        double c = std::cos(r.yaw), s = std::sin(r.yaw);
        std::array<std::array<double, 2>, 4> out;
        int idx = 0;
        for (double sx : {-1.0, 1.0})
            for (double sy : {-1.0, 1.0}) {
                double lx = sx * r.hx, ly = sy * r.hy;
                out[idx++] = {r.cx + c * lx - s * ly, r.cy + s * lx + c * ly};
            }
        return out;
    };
    auto ca = corners_of(a);
    auto cb = corners_of(b);
    for (const BevRect* r : {&a, &b}) {
        for (const auto& axis : axes_of(*r)) {
            auto project = [&](const auto& corners) {
                double lo = 1e300, hi = -1e300;
                for (const auto& p : corners) {
                    double d = p[0] * axis[0] + p[1] * axis[1];
                    lo = std::min(lo, d);
                    hi = std::max(hi, d);
                }
                return std::pair{lo, hi};
            };
            auto [alo, ahi] = project(ca);
            auto [blo, bhi] = project(cb);
            if (ahi < blo || bhi < alo) return false;
        }
    }
    return true;
}

void add_point(PointCloud& cloud, Point p, int label, double score, std::uint32_t inst) {
    cloud.points.push_back(p);
    cloud.sem_label.push_back(label);
    cloud.sem_score.push_back(score);
    cloud.instance.push_back(inst);
}

bool inside_any(const std::vector<BoundingBox7>& boxes, const Point& p) {
    for (const BoundingBox7& b : boxes)
        if (box_contains(b, p)) return true;
    return false;
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

} // namespace

Scene generate_scene(const SceneConfig& cfg) {
    cfg.validate();
    Scene scene;

    // box placement
    Rng box_rng(cfg.seed, 0);
    std::uint32_t next_id = 1;
    for (const ObjectClassConfig& oc : cfg.objects) {
        int count = oc.min_count +
                    static_cast<int>(box_rng.uniform_int(
                        static_cast<std::uint64_t>(oc.max_count - oc.min_count + 1)));
        for (int n = 0; n < count; ++n) {
            bool placed = false;
            for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
                BoundingBox7 b;
                b.l = box_rng.uniform(oc.min_l, oc.max_l);
                b.w = box_rng.uniform(oc.min_w, oc.max_w);
                b.h = box_rng.uniform(oc.min_h, oc.max_h);
                double margin = 0.5 * std::hypot(b.l, b.w) + 0.5;
                if (2.0 * margin >= cfg.extent_x || 2.0 * margin >= cfg.extent_y) break;
                b.cx = box_rng.uniform(margin, cfg.extent_x - margin);
                b.cy = box_rng.uniform(margin, cfg.extent_y - margin);
                b.cz = 0.5 * b.h;
                b.yaw = box_rng.uniform(-std::numbers::pi, std::numbers::pi);
                b.class_id = oc.class_id;
                b.score = 1.0;
                b.instance_id = next_id;
                bool overlap = false;
                for (const BoundingBox7& other : scene.boxes)
                    if (bev_overlap(bev_of(b), bev_of(other))) { overlap = true; break; }
                if (!overlap) {
                    scene.boxes.push_back(b);
                    ++next_id;
                    placed = true;
                }
            }
        }
    }

    // object surface points
    Rng obj_rng(cfg.seed, 1);
    for (const BoundingBox7& b : scene.boxes) {
        const ObjectClassConfig* oc = nullptr;
        for (const ObjectClassConfig& o : cfg.objects)
            if (o.class_id == b.class_id) oc = &o;
        double c = std::cos(b.yaw), s = std::sin(b.yaw);
        double areas[3] = {b.l * b.w, b.l * b.h, b.w * b.h}; // z, y, x face pairs
        double area_sum = 2.0 * (areas[0] + areas[1] + areas[2]);
        for (int n = 0; n < oc->points_per_object; ++n) {
            double u = obj_rng.uniform(0.0, area_sum);
            double sign = u < areas[0] + areas[1] + areas[2] ? 1.0 : -1.0;
            double v = std::fmod(u, areas[0] + areas[1] + areas[2]);
            double lx, ly, lz;
            if (v < areas[0]) { // top/bottom
                lx = obj_rng.uniform(-0.5 * b.l, 0.5 * b.l);
                ly = obj_rng.uniform(-0.5 * b.w, 0.5 * b.w);
                lz = sign * 0.5 * b.h;
            } else if (v < areas[0] + areas[1]) { // sides along l
                lx = obj_rng.uniform(-0.5 * b.l, 0.5 * b.l);
                ly = sign * 0.5 * b.w;
                lz = obj_rng.uniform(-0.5 * b.h, 0.5 * b.h);
            } else { // ends
                lx = sign * 0.5 * b.l;
                ly = obj_rng.uniform(-0.5 * b.w, 0.5 * b.w);
                lz = obj_rng.uniform(-0.5 * b.h, 0.5 * b.h);
            }
            lx += obj_rng.normal(0.0, cfg.sigma);
            ly += obj_rng.normal(0.0, cfg.sigma);
            lz += obj_rng.normal(0.0, cfg.sigma);
            // keep the point inside the closed box, a hair off the exact
            // face so world-frame rounding cannot push it out
            const double shrink = 1.0 - 1e-12;
            lx = std::clamp(lx, -0.5 * b.l * shrink, 0.5 * b.l * shrink);
            ly = std::clamp(ly, -0.5 * b.w * shrink, 0.5 * b.w * shrink);
            lz = std::clamp(lz, -0.5 * b.h * shrink, 0.5 * b.h * shrink);
            Point p;
            p.x = b.cx + c * lx - s * ly;
            p.y = b.cy + s * lx + c * ly;
            p.z = b.cz + lz;
            p.intensity = clamp01(oc->intensity + obj_rng.normal(0.0, cfg.intensity_noise));
            add_point(scene.cloud, p, b.class_id, 1.0, b.instance_id);
        }
    }

    // ground plane
    Rng ground_rng(cfg.seed, 2);
    for (int n = 0; n < cfg.ground_points; ++n) {
        Point p;
        p.x = ground_rng.uniform(0.0, cfg.extent_x);
        p.y = ground_rng.uniform(0.0, cfg.extent_y);
        p.z = ground_rng.normal(0.0, 0.02);
        p.intensity = clamp01(cfg.ground_intensity + ground_rng.normal(0.0, cfg.intensity_noise));
        if (inside_any(scene.boxes, p)) continue;
        add_point(scene.cloud, p, cfg.ground_class, 1.0, 0);
    }

    // walls at the extent borders
    Rng wall_rng(cfg.seed, 3);
    double wall_h = std::min(3.0, cfg.extent_z);
    for (int n = 0; n < cfg.wall_points; ++n) {
        int side = static_cast<int>(wall_rng.uniform_int(4));
        double along = wall_rng.uniform(0.0, side < 2 ? cfg.extent_x : cfg.extent_y);
        double off = std::abs(wall_rng.normal(0.0, 0.05));
        Point p;
        switch (side) {
            case 0: p.x = along; p.y = off; break;
            case 1: p.x = along; p.y = cfg.extent_y - off; break;
            case 2: p.x = off; p.y = along; break;
            default: p.x = cfg.extent_x - off; p.y = along; break;
        }
        p.z = wall_rng.uniform(0.0, wall_h);
        p.intensity = clamp01(cfg.wall_intensity + wall_rng.normal(0.0, cfg.intensity_noise));
        if (inside_any(scene.boxes, p)) continue;
        add_point(scene.cloud, p, cfg.wall_class, 1.0, 0);
    }

    // vegetation blobs
    Rng veg_rng(cfg.seed, 4);
    for (int blob = 0; blob < cfg.vegetation_blobs; ++blob) {
        double bx = veg_rng.uniform(2.0, cfg.extent_x - 2.0);
        double by = veg_rng.uniform(2.0, cfg.extent_y - 2.0);
        for (int n = 0; n < cfg.vegetation_points_per_blob; ++n) {
            Point p;
            p.x = std::clamp(bx + veg_rng.normal(0.0, 0.8), 0.0, cfg.extent_x);
            p.y = std::clamp(by + veg_rng.normal(0.0, 0.8), 0.0, cfg.extent_y);
            p.z = veg_rng.uniform(0.3, std::min(2.5, cfg.extent_z));
            p.intensity =
                clamp01(cfg.vegetation_intensity + veg_rng.normal(0.0, cfg.intensity_noise));
            if (inside_any(scene.boxes, p)) continue;
            add_point(scene.cloud, p, cfg.vegetation_class, 1.0, 0);
        }
    }

    return scene;
}

std::vector<BoundingBox7> perturb_detections(const std::vector<BoundingBox7>& gt,
                                             const ClassTaxonomy& taxonomy,
                                             const PerturbConfig& cfg, std::uint64_t seed) {
    std::vector<int> things = taxonomy.thing_ids();
    std::uint32_t max_id = 0;
    for (const BoundingBox7& b : gt) max_id = std::max(max_id, b.instance_id);

    std::vector<BoundingBox7> out;
    for (std::size_t i = 0; i < gt.size(); ++i) {
        Rng rng(seed, 1000 + i);
        if (rng.uniform() < cfg.drop_rate) continue;
        BoundingBox7 b = gt[i];
        b.cx += rng.normal(0.0, cfg.center_sigma);
        b.cy += rng.normal(0.0, cfg.center_sigma);
        b.cz += rng.normal(0.0, cfg.center_sigma);
        b.l = std::max(0.1, b.l * (1.0 + rng.normal(0.0, cfg.size_sigma)));
        b.w = std::max(0.1, b.w * (1.0 + rng.normal(0.0, cfg.size_sigma)));
        b.h = std::max(0.1, b.h * (1.0 + rng.normal(0.0, cfg.size_sigma)));
        b.yaw += rng.normal(0.0, cfg.yaw_sigma);
        b.score = (cfg.center_sigma == 0.0 && cfg.size_sigma == 0.0 &&
                   cfg.yaw_sigma == 0.0 && cfg.p_flip == 0.0 && cfg.drop_rate == 0.0 &&
                   cfg.dup_rate == 0.0)
                      ? 1.0
                      : rng.beta(cfg.score_beta_a, cfg.score_beta_b);
        if (things.size() > 1 && rng.uniform() < cfg.p_flip) {
            int cur = b.class_id;
            std::vector<int> others;
            for (int k : things)
                if (k != cur) others.push_back(k);
            b.class_id = others[rng.uniform_int(others.size())];
        }
        out.push_back(b);
        if (rng.uniform() < cfg.dup_rate) {
            BoundingBox7 dup = b;
            dup.cx += rng.normal(0.0, cfg.center_sigma);
            dup.cy += rng.normal(0.0, cfg.center_sigma);
            dup.score *= rng.uniform(0.5, 1.0);
            dup.instance_id = max_id + 1 + static_cast<std::uint32_t>(i);
            out.push_back(dup);
        }
    }
    return out;
}

std::vector<std::uint8_t> mask_labels(const PointCloud& cloud, double fraction,
                                      std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction <= 1.0))
        throw std::invalid_argument("mask_labels: fraction must be in (0, 1]");
    const std::size_t n = cloud.size();
    auto want = static_cast<std::size_t>(
        std::ceil(fraction * static_cast<double>(n)));
    want = std::min(want, n);

    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(seed, 77);
    std::vector<std::uint8_t> mask(n, 0);
    for (std::size_t i = 0; i < want; ++i) {
        std::size_t j = i + rng.uniform_int(n - i);
        std::swap(idx[i], idx[j]);
        mask[idx[i]] = 1;
    }
    return mask;
}

} // namespace vin

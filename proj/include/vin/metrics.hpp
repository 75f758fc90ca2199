#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "vin/panoptic.hpp"
#include "vin/types.hpp"

namespace vin {

// Rows index ground truth, columns prediction. Ignore-labeled ground
// truth points are excluded.
struct ConfusionMatrix {
    int S = 0;
    std::vector<std::int64_t> counts; // S x S row-major

    std::int64_t& at(int gt, int pred) { return counts[static_cast<std::size_t>(gt) * S + pred]; }
    std::int64_t at(int gt, int pred) const { return counts[static_cast<std::size_t>(gt) * S + pred]; }
    std::int64_t total() const;
    void merge(const ConfusionMatrix& other);
};

ConfusionMatrix confusion_matrix(std::span<const int> pred, std::span<const int> gt, int S);

struct IouMetrics {
    std::vector<double> per_class;     // NaN where union is empty
    std::vector<std::int64_t> gt_count;
    double miou = 0.0;  // mean over classes with nonzero union
    double fwiou = 0.0;
    bool defined = false; // false when the matrix is empty
};

IouMetrics iou_metrics(const ConfusionMatrix& cm);

struct PanopticReport {
    // per class; NaN where the class is absent from both pred and gt
    std::vector<double> pq, sq, rq, iou;
    std::vector<std::int64_t> tp, fp, fn;
    std::vector<bool> present;

    double PQ = 0.0, PQ_dagger = 0.0, RQ = 0.0, SQ = 0.0;
    double PQ_th = 0.0, RQ_th = 0.0, SQ_th = 0.0;
    double PQ_st = 0.0, RQ_st = 0.0, SQ_st = 0.0;
    double miou = 0.0, fwiou = 0.0;
};

// Segment matching at point-set IoU > 0.5 (unique by construction).
// Things segment by (class, instance > 0); stuff segments are whole
// classes. Thing points with instance 0 belong to no segment. Ground
// truth ignore points are excluded everywhere.
PanopticReport panoptic_quality(const PanopticCloud& pred, const PanopticCloud& gt,
                                const ClassTaxonomy& taxonomy);

void write_report(const std::filesystem::path& path, const PanopticReport& report,
                  const ClassTaxonomy& taxonomy);
PanopticReport read_report(const std::filesystem::path& path);

// Per-class delimited rows for external plotting.
std::string report_rows(const PanopticReport& report, const ClassTaxonomy& taxonomy);

} // namespace vin

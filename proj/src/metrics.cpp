#include "vin/metrics.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "vin/io.hpp"

namespace vin {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

std::int64_t ConfusionMatrix::total() const {
    std::int64_t t = 0;
    for (std::int64_t c : counts) t += c;
    return t;
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
    if (other.S != S) throw std::invalid_argument("confusion matrix size mismatch");
    for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
}

ConfusionMatrix confusion_matrix(std::span<const int> pred, std::span<const int> gt, int S) {
    if (pred.size() != gt.size())
        throw std::invalid_argument("confusion_matrix: length mismatch");
    ConfusionMatrix cm;
    cm.S = S;
    cm.counts.assign(static_cast<std::size_t>(S) * S, 0);
    for (std::size_t i = 0; i < gt.size(); ++i) {
        if (gt[i] == kIgnoreClass) continue;
        if (gt[i] < 0 || gt[i] >= S || pred[i] < 0 || pred[i] >= S)
            throw std::out_of_range("confusion_matrix: label out of range");
        ++cm.at(gt[i], pred[i]);
    }
    return cm;
}

IouMetrics iou_metrics(const ConfusionMatrix& cm) {
    IouMetrics m;
    m.per_class.assign(cm.S, kNaN);
    m.gt_count.assign(cm.S, 0);
    std::int64_t total = cm.total();
    if (total == 0) return m;
    m.defined = true;

    double iou_sum = 0.0;
    int iou_n = 0;
    double fw = 0.0;
    for (int c = 0; c < cm.S; ++c) {
        std::int64_t tp = cm.at(c, c);
        std::int64_t fp = 0, fn = 0;
        for (int o = 0; o < cm.S; ++o) {
            if (o == c) continue;
            fp += cm.at(o, c);
            fn += cm.at(c, o);
        }
        std::int64_t gt_c = tp + fn;
        m.gt_count[c] = gt_c;
        std::int64_t uni = tp + fp + fn;
        if (uni == 0) continue;
        double iou = static_cast<double>(tp) / static_cast<double>(uni);
        m.per_class[c] = iou;
        iou_sum += iou;
        ++iou_n;
        fw += static_cast<double>(gt_c) * iou;
    }
    m.miou = iou_n > 0 ? iou_sum / iou_n : kNaN;
    // single division keeps a perfect score at exactly 1
    m.fwiou = fw / static_cast<double>(total);
    return m;
}

namespace {

struct ClassStats {
    std::int64_t tp = 0, fp = 0, fn = 0;
    double iou_sum = 0.0;
    bool present = false;
};

using SegmentMap = std::map<std::pair<int, std::uint32_t>, std::vector<std::size_t>>;

SegmentMap build_segments(const PanopticCloud& pc, const ClassTaxonomy& tax,
                          const std::vector<int>& gt_label) {
    SegmentMap segs;
    for (std::size_t p = 0; p < pc.size(); ++p) {
        if (gt_label[p] == kIgnoreClass) continue;
        int c = pc.sem_label[p];
        if (c == kIgnoreClass) continue;
        if (tax.is_thing(c)) {
            if (pc.instance[p] == 0) continue; // unsegmented thing point
            segs[{c, pc.instance[p]}].push_back(p);
        } else {
            segs[{c, 0}].push_back(p);
        }
    }
    return segs;
}

double point_set_iou(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    // both sorted ascending by construction
    std::size_t ia = 0, ib = 0, inter = 0;
    while (ia < a.size() && ib < b.size()) {
        if (a[ia] == b[ib]) { ++inter; ++ia; ++ib; }
        else if (a[ia] < b[ib]) ++ia;
        else ++ib;
    }
    std::size_t uni = a.size() + b.size() - inter;
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

double mean_over(const std::vector<double>& values, const std::vector<bool>& select) {
    double sum = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!select[i] || std::isnan(values[i])) continue;
        sum += values[i];
        ++n;
    }
    return n > 0 ? sum / n : kNaN;
}

} // namespace

PanopticReport panoptic_quality(const PanopticCloud& pred, const PanopticCloud& gt,
                                const ClassTaxonomy& taxonomy) {
    if (pred.size() != gt.size())
        throw std::invalid_argument("panoptic_quality: point count mismatch");
    const int S = taxonomy.num_classes();

    SegmentMap pred_segs = build_segments(pred, taxonomy, gt.sem_label);
    SegmentMap gt_segs = build_segments(gt, taxonomy, gt.sem_label);

    std::vector<ClassStats> stats(static_cast<std::size_t>(S));
    for (const auto& [key, pts] : pred_segs) stats[static_cast<std::size_t>(key.first)].present = true;
    for (const auto& [key, pts] : gt_segs) stats[static_cast<std::size_t>(key.first)].present = true;

    // match each gt segment with the unique same-class pred segment at IoU > 0.5
    std::map<std::pair<int, std::uint32_t>, bool> pred_matched;
    for (const auto& [key, pts] : pred_segs) pred_matched[key] = false;

    for (const auto& [gkey, gpts] : gt_segs) {
        ClassStats& cs = stats[static_cast<std::size_t>(gkey.first)];
        bool matched = false;
        for (auto& [pkey, pmatched] : pred_matched) {
            if (pkey.first != gkey.first) continue;
            double iou = point_set_iou(gpts, pred_segs.at(pkey));
            if (iou > 0.5) {
                ++cs.tp;
                cs.iou_sum += iou;
                pmatched = true;
                matched = true;
                break;
            }
        }
        if (!matched) ++cs.fn;
    }
    for (const auto& [pkey, matched] : pred_matched) {
        if (!matched) ++stats[static_cast<std::size_t>(pkey.first)].fp;
    }

    PanopticReport r;
    r.pq.assign(S, kNaN);
    r.sq.assign(S, kNaN);
    r.rq.assign(S, kNaN);
    r.iou.assign(S, kNaN);
    r.tp.assign(S, 0);
    r.fp.assign(S, 0);
    r.fn.assign(S, 0);
    r.present.assign(S, false);

    ConfusionMatrix cm = confusion_matrix(pred.sem_label, gt.sem_label, S);
    IouMetrics iou = iou_metrics(cm);
    r.iou = iou.per_class;
    r.miou = iou.miou;
    r.fwiou = iou.fwiou;

    std::vector<double> pq_dagger_terms(static_cast<std::size_t>(S), kNaN);
    for (int c = 0; c < S; ++c) {
        const ClassStats& cs = stats[static_cast<std::size_t>(c)];
        r.present[c] = cs.present;
        r.tp[c] = cs.tp;
        r.fp[c] = cs.fp;
        r.fn[c] = cs.fn;
        if (!cs.present) continue;
        double denom = static_cast<double>(cs.tp) + 0.5 * cs.fp + 0.5 * cs.fn;
        r.pq[c] = denom > 0.0 ? cs.iou_sum / denom : 0.0;
        r.rq[c] = denom > 0.0 ? static_cast<double>(cs.tp) / denom : 0.0;
        r.sq[c] = cs.tp > 0 ? cs.iou_sum / static_cast<double>(cs.tp) : 0.0;
        pq_dagger_terms[static_cast<std::size_t>(c)] =
            taxonomy.is_stuff(c) && !std::isnan(r.iou[c]) ? r.iou[c] : r.pq[c];
    }

    std::vector<bool> all = r.present;
    std::vector<bool> th(static_cast<std::size_t>(S), false), st(static_cast<std::size_t>(S), false);
    for (int c = 0; c < S; ++c) {
        th[static_cast<std::size_t>(c)] = r.present[c] && taxonomy.is_thing(c);
        st[static_cast<std::size_t>(c)] = r.present[c] && taxonomy.is_stuff(c);
    }
    r.PQ = mean_over(r.pq, all);
    r.RQ = mean_over(r.rq, all);
    r.SQ = mean_over(r.sq, all);
    r.PQ_dagger = mean_over(pq_dagger_terms, all);
    r.PQ_th = mean_over(r.pq, th);
    r.RQ_th = mean_over(r.rq, th);
    r.SQ_th = mean_over(r.sq, th);
    r.PQ_st = mean_over(r.pq, st);
    r.RQ_st = mean_over(r.rq, st);
    r.SQ_st = mean_over(r.sq, st);
    return r;
}

namespace {

nlohmann::json num_or_null(double v) {
    if (std::isnan(v)) return nullptr;
    return v;
}

double null_or_num(const nlohmann::json& j) {
    return j.is_null() ? kNaN : j.get<double>();
}

} // namespace

void write_report(const std::filesystem::path& path, const PanopticReport& r,
                  const ClassTaxonomy& taxonomy) {
    nlohmann::json per_class = nlohmann::json::array();
    for (int c = 0; c < taxonomy.num_classes(); ++c) {
        per_class.push_back({
            {"class_id", c},
            {"name", taxonomy.at(c).name},
            {"kind", taxonomy.is_thing(c) ? "thing" : "stuff"},
            {"present", static_cast<bool>(r.present[c])},
            {"pq", num_or_null(r.pq[c])},
            {"sq", num_or_null(r.sq[c])},
            {"rq", num_or_null(r.rq[c])},
            {"iou", num_or_null(r.iou[c])},
            {"tp", r.tp[c]},
            {"fp", r.fp[c]},
            {"fn", r.fn[c]},
        });
    }
    nlohmann::json j{
        {"per_class", per_class},
        {"aggregates",
         {{"PQ", num_or_null(r.PQ)}, {"PQ_dagger", num_or_null(r.PQ_dagger)},
          {"RQ", num_or_null(r.RQ)}, {"SQ", num_or_null(r.SQ)},
          {"PQ_th", num_or_null(r.PQ_th)}, {"RQ_th", num_or_null(r.RQ_th)},
          {"SQ_th", num_or_null(r.SQ_th)}, {"PQ_st", num_or_null(r.PQ_st)},
          {"RQ_st", num_or_null(r.RQ_st)}, {"SQ_st", num_or_null(r.SQ_st)},
          {"mIoU", num_or_null(r.miou)}, {"fwIoU", num_or_null(r.fwiou)}}},
    };
    std::ofstream f(path);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    f << j.dump(2) << '\n';
}

PanopticReport read_report(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open " + path.string());
    nlohmann::json j = nlohmann::json::parse(f);
    PanopticReport r;
    for (const auto& row : j.at("per_class")) {
        r.present.push_back(row.at("present").get<bool>());
        r.pq.push_back(null_or_num(row.at("pq")));
        r.sq.push_back(null_or_num(row.at("sq")));
        r.rq.push_back(null_or_num(row.at("rq")));
        r.iou.push_back(null_or_num(row.at("iou")));
        r.tp.push_back(row.at("tp").get<std::int64_t>());
        r.fp.push_back(row.at("fp").get<std::int64_t>());
        r.fn.push_back(row.at("fn").get<std::int64_t>());
    }
    const auto& agg = j.at("aggregates");
    r.PQ = null_or_num(agg.at("PQ"));
    r.PQ_dagger = null_or_num(agg.at("PQ_dagger"));
    r.RQ = null_or_num(agg.at("RQ"));
    r.SQ = null_or_num(agg.at("SQ"));
    r.PQ_th = null_or_num(agg.at("PQ_th"));
    r.RQ_th = null_or_num(agg.at("RQ_th"));
    r.SQ_th = null_or_num(agg.at("SQ_th"));
    r.PQ_st = null_or_num(agg.at("PQ_st"));
    r.RQ_st = null_or_num(agg.at("RQ_st"));
    r.SQ_st = null_or_num(agg.at("SQ_st"));
    r.miou = null_or_num(agg.at("mIoU"));
    r.fwiou = null_or_num(agg.at("fwIoU"));
    return r;
}

std::string report_rows(const PanopticReport& r, const ClassTaxonomy& taxonomy) {
    std::ostringstream os;
    os << "class_id\tname\tkind\tiou\tpq\tsq\trq\ttp\tfp\tfn\n";
    for (int c = 0; c < taxonomy.num_classes(); ++c) {
        os << c << '\t' << taxonomy.at(c).name << '\t'
           << (taxonomy.is_thing(c) ? "thing" : "stuff") << '\t' << r.iou[c] << '\t'
           << r.pq[c] << '\t' << r.sq[c] << '\t' << r.rq[c] << '\t' << r.tp[c] << '\t'
           << r.fp[c] << '\t' << r.fn[c] << '\n';
    }
    return os.str();
}

} // namespace vin

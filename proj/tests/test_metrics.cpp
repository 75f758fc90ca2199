#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <vector>

#include "vin/metrics.hpp"
#include "vin/rng.hpp"
#include "vin/synth.hpp"

using namespace vin;

namespace {

ClassTaxonomy tax4() {
    return ClassTaxonomy({{"car", ClassKind::thing},
                          {"pedestrian", ClassKind::thing},
                          {"road", ClassKind::stuff},
                          {"vegetation", ClassKind::stuff}});
}

// random panoptic labeling with at most max_inst instances per thing class
PanopticCloud random_panoptic(Rng& rng, std::size_t n, const ClassTaxonomy& tax,
                              int max_inst) {
    PanopticCloud pc;
    for (std::size_t i = 0; i < n; ++i) {
        int c = static_cast<int>(rng.uniform_int(tax.num_classes()));
        pc.sem_label.push_back(c);
        pc.instance.push_back(tax.is_thing(c)
                                  ? static_cast<std::uint32_t>(1 + rng.uniform_int(max_inst))
                                  : 0u);
    }
    return pc;
}

} // namespace

TEST_CASE("confusion matrix basics") {
    std::vector<int> gt{0, 1, 2, kIgnoreClass};
    std::vector<int> pred{0, 1, 1, 0};
    ConfusionMatrix cm = confusion_matrix(pred, gt, 3);
    CHECK(cm.at(0, 0) == 1);
    CHECK(cm.at(1, 1) == 1);
    CHECK(cm.at(2, 1) == 1);
    CHECK(cm.total() == 3);

    std::vector<int> all_ignore{kIgnoreClass, kIgnoreClass};
    std::vector<int> any{0, 1};
    CHECK(confusion_matrix(any, all_ignore, 3).total() == 0);

    std::vector<int> bad{5};
    std::vector<int> g{0};
    CHECK_THROWS(confusion_matrix(bad, g, 3));
}

TEST_CASE("iou metrics: perfect, formula, empty") {
    std::vector<int> gt{0, 0, 1, 1, 2};
    ConfusionMatrix perfect = confusion_matrix(gt, gt, 3);
    IouMetrics m = iou_metrics(perfect);
    CHECK(m.miou == 1.0);
    CHECK(m.fwiou == 1.0);
    for (int c = 0; c < 3; ++c) CHECK(m.per_class[c] == 1.0);

    // TP=1, FP=1, FN=0 for class 0
    std::vector<int> g2{0, 1};
    std::vector<int> p2{0, 0};
    IouMetrics m2 = iou_metrics(confusion_matrix(p2, g2, 2));
    CHECK(m2.per_class[0] == doctest::Approx(0.5));

    ConfusionMatrix empty;
    empty.S = 3;
    empty.counts.assign(9, 0);
    CHECK_FALSE(iou_metrics(empty).defined);
}

TEST_CASE("iou metrics match a set-arithmetic oracle on random labelings") {
    Rng rng(1, 0);
    for (int trial = 0; trial < 100; ++trial) {
        const int S = 5;
        std::size_t n = 50 + rng.uniform_int(100);
        std::vector<int> gt, pred;
        for (std::size_t i = 0; i < n; ++i) {
            gt.push_back(rng.uniform() < 0.05 ? kIgnoreClass
                                              : static_cast<int>(rng.uniform_int(S)));
            pred.push_back(static_cast<int>(rng.uniform_int(S)));
        }
        IouMetrics m = iou_metrics(confusion_matrix(pred, gt, S));
        double sum = 0.0;
        int cnt = 0;
        double fw = 0.0;
        std::size_t valid = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (gt[i] != kIgnoreClass) ++valid;
        for (int c = 0; c < S; ++c) {
            std::set<std::size_t> gs, ps;
            for (std::size_t i = 0; i < n; ++i) {
                if (gt[i] == kIgnoreClass) continue;
                if (gt[i] == c) gs.insert(i);
                if (pred[i] == c) ps.insert(i);
            }
            std::set<std::size_t> uni = gs;
            uni.insert(ps.begin(), ps.end());
            if (uni.empty()) continue;
            std::size_t inter = 0;
            for (auto i : gs)
                if (ps.count(i)) ++inter;
            double iou = static_cast<double>(inter) / uni.size();
            CHECK(m.per_class[c] == doctest::Approx(iou).epsilon(1e-12));
            sum += iou;
            ++cnt;
            fw += (static_cast<double>(gs.size()) / valid) * iou;
        }
        CHECK(m.miou == doctest::Approx(sum / cnt).epsilon(1e-12));
        CHECK(m.fwiou == doctest::Approx(fw).epsilon(1e-12));

        // fwIoU bounded by per-class extremes
        double lo = 1e9, hi = -1e9;
        for (int c = 0; c < S; ++c) {
            if (std::isnan(m.per_class[c])) continue;
            lo = std::min(lo, m.per_class[c]);
            hi = std::max(hi, m.per_class[c]);
        }
        CHECK(m.fwiou >= lo - 1e-12);
        CHECK(m.fwiou <= hi + 1e-12);
    }
}

TEST_CASE("panoptic quality: identical prediction is perfect") {
    Rng rng(2, 0);
    PanopticCloud gt = random_panoptic(rng, 200, tax4(), 4);
    PanopticReport r = panoptic_quality(gt, gt, tax4());
    for (int c = 0; c < 4; ++c) {
        if (!r.present[c]) continue;
        CHECK(r.pq[c] == 1.0);
        CHECK(r.sq[c] == 1.0);
        CHECK(r.rq[c] == 1.0);
    }
    CHECK(r.PQ == 1.0);
    CHECK(r.RQ == 1.0);
    CHECK(r.SQ == 1.0);
    CHECK(r.miou == 1.0);
    CHECK(r.fwiou == 1.0);
}

TEST_CASE("panoptic quality: single pair at IoU 0.6 and 0.4") {
    auto make = [](int n_shared, int n_gt_only, int n_pred_only) {
        PanopticCloud gt, pred;
        int total = n_shared + n_gt_only + n_pred_only;
        for (int i = 0; i < total; ++i) {
            // class 0 is a thing; background uses stuff class 2
            bool in_gt = i < n_shared + n_gt_only;
            bool in_pred = i < n_shared || i >= n_shared + n_gt_only;
            gt.sem_label.push_back(in_gt ? 0 : 2);
            gt.instance.push_back(in_gt ? 1 : 0);
            pred.sem_label.push_back(in_pred ? 0 : 2);
            pred.instance.push_back(in_pred ? 7 : 0);
        }
        return std::pair{pred, gt};
    };

    // IoU = 6/10
    auto [pred6, gt6] = make(6, 2, 2);
    PanopticReport r6 = panoptic_quality(pred6, gt6, tax4());
    CHECK(r6.pq[0] == doctest::Approx(0.6));
    CHECK(r6.sq[0] == doctest::Approx(0.6));
    CHECK(r6.rq[0] == doctest::Approx(1.0));

    // IoU = 4/10 -> no match
    auto [pred4, gt4] = make(4, 3, 3);
    PanopticReport r4 = panoptic_quality(pred4, gt4, tax4());
    CHECK(r4.pq[0] == doctest::Approx(0.0));
    CHECK(r4.tp[0] == 0);
    CHECK(r4.fp[0] == 1);
    CHECK(r4.fn[0] == 1);
}

namespace {

// exhaustive optimal matching over all pred-permutations per class
struct OracleStats {
    int tp = 0, fp = 0, fn = 0;
    double iou_sum = 0.0;
};

OracleStats oracle_class(const std::vector<std::vector<std::size_t>>& gt_segs,
                         const std::vector<std::vector<std::size_t>>& pred_segs) {
    auto iou_of = [](const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
        std::set<std::size_t> sa(a.begin(), a.end());
        std::size_t inter = 0;
        for (auto i : b)
            if (sa.count(i)) ++inter;
        return static_cast<double>(inter) / (a.size() + b.size() - inter);
    };
    // slots: pred indices padded with -1 so every gt segment can stay
    // unmatched; iterate all injective assignments
    std::vector<int> perm(std::max(gt_segs.size(), pred_segs.size()), -1);
    for (std::size_t p = 0; p < pred_segs.size(); ++p) perm[p] = static_cast<int>(p);
    std::sort(perm.begin(), perm.end());
    OracleStats best;
    best.tp = -1;
    do {
        OracleStats cur;
        std::vector<bool> used(pred_segs.size(), false);
        for (std::size_t g = 0; g < gt_segs.size(); ++g) {
            int p = perm[g];
            if (p >= 0) {
                double iou = iou_of(gt_segs[g], pred_segs[static_cast<std::size_t>(p)]);
                if (iou > 0.5) {
                    ++cur.tp;
                    cur.iou_sum += iou;
                    used[static_cast<std::size_t>(p)] = true;
                    continue;
                }
            }
            ++cur.fn;
        }
        for (std::size_t p = 0; p < pred_segs.size(); ++p)
            if (!used[p]) ++cur.fp;
        if (cur.tp > best.tp || (cur.tp == best.tp && cur.iou_sum > best.iou_sum)) best = cur;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

} // namespace

TEST_CASE("panoptic quality matches the exhaustive-matching oracle") {
    ClassTaxonomy tax = tax4();
    Rng rng(3, 0);
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t n = 40 + rng.uniform_int(80);
        PanopticCloud gt = random_panoptic(rng, n, tax, 3);
        PanopticCloud pred = random_panoptic(rng, n, tax, 3);
        // bias some agreement so matches exist
        for (std::size_t i = 0; i < n; ++i) {
            if (rng.uniform() < 0.6) {
                pred.sem_label[i] = gt.sem_label[i];
                pred.instance[i] = gt.instance[i];
            }
        }
        PanopticReport r = panoptic_quality(pred, gt, tax);

        for (int c = 0; c < tax.num_classes(); ++c) {
            // collect segments per class
            auto collect = [&](const PanopticCloud& pc) {
                std::map<std::uint32_t, std::vector<std::size_t>> by_inst;
                for (std::size_t i = 0; i < n; ++i) {
                    if (pc.sem_label[i] != c) continue;
                    if (tax.is_thing(c) && pc.instance[i] == 0) continue;
                    by_inst[tax.is_thing(c) ? pc.instance[i] : 0].push_back(i);
                }
                std::vector<std::vector<std::size_t>> out;
                for (auto& [id, pts] : by_inst) out.push_back(pts);
                return out;
            };
            auto gs = collect(gt);
            auto ps = collect(pred);
            if (gs.empty() && ps.empty()) {
                CHECK_FALSE(r.present[c]);
                continue;
            }
            if (ps.size() > 6 || gs.size() > 6) continue; // keep the factorial oracle small
            OracleStats o = oracle_class(gs, ps);
            CHECK(r.tp[c] == o.tp);
            CHECK(r.fp[c] == o.fp);
            CHECK(r.fn[c] == o.fn);
            double denom = o.tp + 0.5 * o.fp + 0.5 * o.fn;
            if (denom > 0)
                CHECK(r.pq[c] == doctest::Approx(o.iou_sum / denom).epsilon(1e-12));

            // PQ = SQ * RQ wherever a match exists
            if (o.tp > 0)
                CHECK(r.pq[c] == doctest::Approx(r.sq[c] * r.rq[c]).epsilon(1e-12));
        }
    }
}

TEST_CASE("metrics invariant under instance id permutation") {
    ClassTaxonomy tax = tax4();
    Rng rng(4, 0);
    PanopticCloud gt = random_panoptic(rng, 150, tax, 3);
    PanopticCloud pred = random_panoptic(rng, 150, tax, 3);
    PanopticReport a = panoptic_quality(pred, gt, tax);

    PanopticCloud remapped = pred;
    for (auto& id : remapped.instance)
        if (id != 0) id = 100 - id; // bijective remap
    PanopticReport b = panoptic_quality(remapped, gt, tax);
    CHECK(a.PQ == doctest::Approx(b.PQ).epsilon(1e-15));
    CHECK(a.SQ == doctest::Approx(b.SQ).epsilon(1e-15));
    CHECK(a.RQ == doctest::Approx(b.RQ).epsilon(1e-15));
}

TEST_CASE("PQ-dagger uses plain IoU for stuff classes") {
    ClassTaxonomy tax = tax4();
    Rng rng(5, 0);
    PanopticCloud gt = random_panoptic(rng, 100, tax, 2);
    PanopticCloud pred = random_panoptic(rng, 100, tax, 2);
    PanopticReport r = panoptic_quality(pred, gt, tax);
    double sum = 0.0;
    int cnt = 0;
    for (int c = 0; c < tax.num_classes(); ++c) {
        if (!r.present[c]) continue;
        sum += tax.is_stuff(c) && !std::isnan(r.iou[c]) ? r.iou[c] : r.pq[c];
        ++cnt;
    }
    CHECK(r.PQ_dagger == doctest::Approx(sum / cnt).epsilon(1e-12));
}

TEST_CASE("report file round-trip and plot rows") {
    ClassTaxonomy tax = tax4();
    Rng rng(6, 0);
    PanopticCloud gt = random_panoptic(rng, 100, tax, 2);
    PanopticCloud pred = random_panoptic(rng, 100, tax, 2);
    PanopticReport r = panoptic_quality(pred, gt, tax);
    auto path = std::filesystem::temp_directory_path() / "vin_report.json";
    write_report(path, r, tax);
    PanopticReport back = read_report(path);
    CHECK(back.PQ == r.PQ);
    CHECK(back.miou == r.miou);
    for (int c = 0; c < tax.num_classes(); ++c) {
        if (std::isnan(r.pq[c])) CHECK(std::isnan(back.pq[c]));
        else CHECK(back.pq[c] == r.pq[c]);
    }
    std::string rows = report_rows(r, tax);
    CHECK(rows.find("pedestrian") != std::string::npos);
}

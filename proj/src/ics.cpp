#include "vin/ics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace vin {

std::string IcsChange::to_string() const {
    switch (kind) {
        case Kind::box_override:
            return "box " + std::to_string(a) + " relabeled " + std::to_string(from) +
                   " -> " + std::to_string(to);
        case Kind::box_swap:
            return "boxes " + std::to_string(a) + " and " + std::to_string(b) +
                   " swapped labels " + std::to_string(from) + " <-> " + std::to_string(to);
        case Kind::point_relabel:
            return "point " + std::to_string(a) + " relabeled " + std::to_string(from) +
                   " -> " + std::to_string(to) + " by box " + std::to_string(b);
    }
    return {};
}

IcsResult ics(const std::vector<BoundingBox7>& boxes_in, const PointCloud& cloud_in,
              const ClassTaxonomy& taxonomy, const IcsParams& params) {
    if (!cloud_in.has_labels() || !cloud_in.has_scores())
        throw std::invalid_argument("ics: cloud needs semantic labels and scores");
    for (const BoundingBox7& b : boxes_in) {
        if (!taxonomy.valid_id(b.class_id) || !taxonomy.is_thing(b.class_id))
            throw std::invalid_argument("ics: box class must be a thing class");
    }

    IcsResult out;
    out.boxes = boxes_in;
    out.cloud = cloud_in;

    std::sort(out.boxes.begin(), out.boxes.end(),
              [](const BoundingBox7& a, const BoundingBox7& b) {
                  if (a.score != b.score) return a.score > b.score;
                  return a.instance_id < b.instance_id;
              });

    const std::size_t nb = out.boxes.size();
    const std::size_t np = out.cloud.size();
    const std::vector<int> things = taxonomy.thing_ids();

    // containment lists, computed once (geometry never changes)
    std::vector<std::vector<std::size_t>> inside(nb);
    std::vector<std::vector<std::size_t>> boxes_of_point(np);
    for (std::size_t i = 0; i < nb; ++i) {
        for (std::size_t p = 0; p < np; ++p) {
            if (box_contains(out.boxes[i], out.cloud.points[p])) {
                inside[i].push_back(p);
                boxes_of_point[p].push_back(i); // ascending rank
            }
        }
    }

    // Phase A: fix box labels from point evidence
    for (std::size_t i = 0; i < nb; ++i) {
        BoundingBox7& box = out.boxes[i];
        std::vector<std::size_t> candidates;
        for (std::size_t p : inside[i]) {
            bool consistent_above = true;
            for (std::size_t j : boxes_of_point[p]) {
                if (j >= i) break;
                if (out.cloud.sem_label[p] == out.boxes[j].class_id) {
                    consistent_above = false;
                    break;
                }
            }
            if (consistent_above) candidates.push_back(p);
        }
        if (candidates.empty()) continue;

        double best_product = -1.0;
        int best_class = -1;
        bool incumbent_tied = false;
        for (int k : things) {
            std::int64_t count_k = 0;
            double score_sum = 0.0;
            for (std::size_t p : candidates) {
                if (out.cloud.sem_label[p] == k) {
                    ++count_k;
                    score_sum += out.cloud.sem_score[p];
                }
            }
            double product = 0.0;
            if (count_k > 0) {
                double alpha = static_cast<double>(count_k) /
                               static_cast<double>(candidates.size());
                double beta = score_sum / static_cast<double>(count_k);
                double gamma =
                    1.0 + (k == box.class_id ? std::pow(box.score, params.c_gamma) : 0.0);
                product = alpha * beta * gamma;
            }
            if (product > best_product) {
                best_product = product;
                best_class = k;
                incumbent_tied = k == box.class_id;
            } else if (product == best_product && k == box.class_id) {
                incumbent_tied = true;
            }
        }
        int winner = incumbent_tied ? box.class_id : best_class;
        if (winner == box.class_id) continue;

        // prefer swapping with the closest lower-scored box of the winning class
        std::size_t partner = nb;
        for (std::size_t j = i + 1; j < nb; ++j) {
            if (out.boxes[j].class_id == winner) {
                partner = j;
                break;
            }
        }
        if (partner < nb) {
            out.log.push_back({IcsChange::Kind::box_swap, i, partner,
                               box.class_id, out.boxes[partner].class_id});
            std::swap(box.class_id, out.boxes[partner].class_id);
        } else {
            out.log.push_back({IcsChange::Kind::box_override, i, 0, box.class_id, winner});
            box.class_id = winner;
        }
    }

    // Phase B: fix point labels from box evidence, lowest score first
    for (std::size_t i = nb; i-- > 0;) {
        const BoundingBox7& box = out.boxes[i];
        for (std::size_t p : inside[i]) {
            if (!(out.cloud.sem_score[p] < box.score - params.m_p)) continue;
            // skip points shared with any higher-ranked box
            bool overlapped = !boxes_of_point[p].empty() && boxes_of_point[p].front() < i;
            if (overlapped) continue;
            if (out.cloud.sem_label[p] != box.class_id) {
                out.log.push_back({IcsChange::Kind::point_relabel, p, i,
                                   out.cloud.sem_label[p], box.class_id});
                out.cloud.sem_label[p] = box.class_id;
            }
            out.cloud.sem_score[p] = box.score;
        }
    }
    return out;
}

} // namespace vin

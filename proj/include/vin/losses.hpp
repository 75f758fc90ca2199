#pragma once

#include <Eigen/Dense>
#include <vector>

#include "vin/types.hpp"

namespace vin {

struct SemanticLossConfig {
    Eigen::VectorXd class_weights; // length S, all >= 0, at least one > 0
    double lambda_lovasz = 1.0;
};

struct LossResult {
    double value = 0.0;
    Eigen::MatrixXd grad; // dL/dprobs, N x S
};

// L = sum_n w_{y_n} * (-ln p_n[y_n]) / sum_n w_{y_n}
// Probabilities are clamped at 1e-12 before the log.
LossResult weighted_cross_entropy(const Eigen::MatrixXd& probs,
                                  const Eigen::VectorXi& targets,
                                  const Eigen::VectorXd& weights);

// Lovasz-softmax: mean over classes present in targets of the Lovasz
// extension of the Jaccard loss applied to the per-class error vector.
// Sorting ties break by original index.
LossResult lovasz_softmax(const Eigen::MatrixXd& probs,
                          const Eigen::VectorXi& targets);

// weighted CE + lambda * Lovasz
LossResult semantic_loss(const Eigen::MatrixXd& probs,
                         const Eigen::VectorXi& targets,
                         const SemanticLossConfig& cfg);

double total_loss(double l_cls, double l_reg, double l_sem, const LossWeights& w);

} // namespace vin

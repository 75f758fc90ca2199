#include "vin/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace vin {

LossResult weighted_cross_entropy(const Eigen::MatrixXd& probs,
                                  const Eigen::VectorXi& targets,
                                  const Eigen::VectorXd& weights) {
    const Eigen::Index n = probs.rows();
    const Eigen::Index s = probs.cols();
    if (targets.size() != n)
        throw std::invalid_argument("targets length mismatch");
    if (weights.size() != s)
        throw std::invalid_argument("weights length mismatch");

    LossResult out;
    out.grad = Eigen::MatrixXd::Zero(n, s);
    if (n == 0) return out;

    double weight_sum = 0.0;
    double loss_sum = 0.0;
    for (Eigen::Index r = 0; r < n; ++r) {
        int y = targets(r);
        if (y < 0 || y >= s) throw std::invalid_argument("target out of range");
        double w = weights(y);
        double p = std::max(probs(r, y), 1e-12);
        loss_sum += w * (-std::log(p));
        weight_sum += w;
    }
    if (weight_sum <= 0.0) return out;
    for (Eigen::Index r = 0; r < n; ++r) {
        int y = targets(r);
        double p = std::max(probs(r, y), 1e-12);
        out.grad(r, y) = -weights(y) / (p * weight_sum);
    }
    out.value = loss_sum / weight_sum;
    return out;
}

LossResult lovasz_softmax(const Eigen::MatrixXd& probs,
                          const Eigen::VectorXi& targets) {
    const Eigen::Index n = probs.rows();
    const Eigen::Index s = probs.cols();
    LossResult out;
    out.grad = Eigen::MatrixXd::Zero(n, s);
    if (n == 0) return out;

    std::vector<int> present;
    for (int c = 0; c < s; ++c) {
        if ((targets.array() == c).any()) present.push_back(c);
    }
    if (present.empty()) return out;

    double total = 0.0;
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    for (int c : present) {
        // per-point error wrt class c
        Eigen::VectorXd errs(n);
        for (Eigen::Index r = 0; r < n; ++r)
            errs(r) = targets(r) == c ? 1.0 - probs(r, c) : probs(r, c);

        std::iota(order.begin(), order.end(), Eigen::Index{0});
        std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
            return errs(a) > errs(b);
        });

        // discrete gradient of the Jaccard-loss Lovasz extension along
        // the sorted ground-truth indicator
        const double gts = static_cast<double>((targets.array() == c).count());
        double inter = gts;
        double uni = gts;
        double prev_jac = 0.0;
        for (Eigen::Index r = 0; r < n; ++r) {
            Eigen::Index idx = order[static_cast<std::size_t>(r)];
            bool is_gt = targets(idx) == c;
            if (is_gt) inter -= 1.0;
            else uni += 1.0;
            double jac = uni > 0.0 ? 1.0 - inter / uni : 0.0;
            double g = jac - prev_jac;
            prev_jac = jac;
            total += errs(idx) * g;
            out.grad(idx, c) += is_gt ? -g : g;
        }
    }
    double inv = 1.0 / static_cast<double>(present.size());
    out.value = total * inv;
    out.grad *= inv;
    return out;
}

LossResult semantic_loss(const Eigen::MatrixXd& probs,
                         const Eigen::VectorXi& targets,
                         const SemanticLossConfig& cfg) {
    LossResult ce = weighted_cross_entropy(probs, targets, cfg.class_weights);
    if (cfg.lambda_lovasz == 0.0) return ce;
    LossResult lv = lovasz_softmax(probs, targets);
    ce.value += cfg.lambda_lovasz * lv.value;
    ce.grad += cfg.lambda_lovasz * lv.grad;
    return ce;
}

double total_loss(double l_cls, double l_reg, double l_sem, const LossWeights& w) {
    return w.alpha_cls * l_cls + w.alpha_reg * l_reg + w.alpha_sem * l_sem;
}

} // namespace vin

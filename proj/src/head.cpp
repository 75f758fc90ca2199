#include "vin/head.hpp"

#include <cmath>

#include "vin/rng.hpp"

namespace vin {

std::size_t HeadParams::num_parameters() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights.size(); ++l)
        n += static_cast<std::size_t>(weights[l].size()) + biases[l].size();
    return n;
}

void HeadParams::check_shapes() const {
    if (weights.empty() || weights.size() != biases.size())
        throw std::invalid_argument("malformed head params");
    for (std::size_t l = 0; l < weights.size(); ++l) {
        if (biases[l].size() != weights[l].rows())
            throw std::invalid_argument("bias/weight shape mismatch");
        if (l + 1 < weights.size() && weights[l + 1].cols() != weights[l].rows())
            throw std::invalid_argument("layer shapes do not chain");
    }
}

HeadParams head_init(std::uint64_t seed, int feature_channels, int num_classes,
                     const std::vector<int>& hidden) {
    if (feature_channels < 1 || num_classes < 1)
        throw std::invalid_argument("head_init: C and S must be >= 1");
    std::vector<int> sizes;
    sizes.push_back(3 + feature_channels);
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(num_classes);

    HeadParams params;
    Rng rng(seed, /*stream=*/0);
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        int fan_in = sizes[l];
        int fan_out = sizes[l + 1];
        double limit = std::sqrt(6.0 / (fan_in + fan_out));
        Eigen::MatrixXd w(fan_out, fan_in);
        for (Eigen::Index r = 0; r < w.rows(); ++r)
            for (Eigen::Index c = 0; c < w.cols(); ++c)
                w(r, c) = rng.uniform(-limit, limit);
        params.weights.push_back(std::move(w));
        params.biases.push_back(Eigen::VectorXd::Zero(fan_out));
    }
    return params;
}

Eigen::MatrixXd head_forward(const HeadParams& params, const Eigen::MatrixXd& features) {
    params.check_shapes();
    if (features.cols() != params.input_dim())
        throw std::invalid_argument("feature dimension mismatch");
    Eigen::MatrixXd a = features;
    for (std::size_t l = 0; l < params.num_layers(); ++l) {
        a = (a * params.weights[l].transpose()).rowwise() + params.biases[l].transpose();
        if (l + 1 < params.num_layers()) a = a.cwiseMax(0.0);
    }
    return a;
}

Eigen::MatrixXd softmax(const Eigen::MatrixXd& logits) {
    Eigen::MatrixXd out(logits.rows(), logits.cols());
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
        double m = logits.row(r).maxCoeff();
        Eigen::ArrayXd e = (logits.row(r).array() - m).exp();
        out.row(r) = (e / e.sum()).matrix();
    }
    return out;
}

SemanticPrediction query_semantics(const HeadParams& params, const FeatureMap& map,
                                   const std::vector<Point>& points) {
    const int C = map.C;
    if (params.input_dim() != 3 + C)
        throw std::invalid_argument("feature map channels do not match head input");
    const auto n = static_cast<Eigen::Index>(points.size());
    Eigen::MatrixXd features(n, 3 + C);
    for (Eigen::Index r = 0; r < n; ++r) {
        const Point& p = points[static_cast<std::size_t>(r)];
        VoxelIndex idx = grid_index_of(map.spec, p).value_or(nearest_voxel(map.spec, p));
        Point c = voxel_center(map.spec, idx);
        features(r, 0) = p.x - c.x;
        features(r, 1) = p.y - c.y;
        features(r, 2) = p.z - c.z;
        for (int ch = 0; ch < C; ++ch)
            features(r, 3 + ch) = static_cast<double>(map.at(ch, idx));
    }
    SemanticPrediction pred;
    pred.probs = softmax(head_forward(params, features));
    pred.label.resize(static_cast<std::size_t>(n));
    pred.score.resize(static_cast<std::size_t>(n));
    for (Eigen::Index r = 0; r < n; ++r) {
        int best = 0;
        for (Eigen::Index c = 1; c < pred.probs.cols(); ++c)
            if (pred.probs(r, c) > pred.probs(r, best)) best = static_cast<int>(c);
        pred.label[static_cast<std::size_t>(r)] = best;
        pred.score[static_cast<std::size_t>(r)] = pred.probs(r, best);
    }
    return pred;
}

HeadGradient zero_gradient(const HeadParams& params) {
    HeadGradient g;
    for (std::size_t l = 0; l < params.num_layers(); ++l) {
        g.d_weights.push_back(Eigen::MatrixXd::Zero(params.weights[l].rows(),
                                                    params.weights[l].cols()));
        g.d_biases.push_back(Eigen::VectorXd::Zero(params.biases[l].size()));
    }
    return g;
}

HeadGradient head_loss_and_grad(const HeadParams& params, const QueryBatch& batch,
                                const SemanticLossConfig& cfg) {
    params.check_shapes();
    if (batch.targets.size() != batch.size())
        throw std::invalid_argument("batch has no targets");
    if (!batch.mask.empty() && static_cast<Eigen::Index>(batch.mask.size()) != batch.size())
        throw std::invalid_argument("mask length mismatch");

    // select masked-in rows
    std::vector<Eigen::Index> rows;
    for (Eigen::Index r = 0; r < batch.size(); ++r)
        if (batch.mask.empty() || batch.mask[static_cast<std::size_t>(r)]) rows.push_back(r);

    HeadGradient grad = zero_gradient(params);
    if (rows.empty()) return grad;

    const auto n = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd x(n, batch.features.cols());
    Eigen::VectorXi y(n);
    for (Eigen::Index r = 0; r < n; ++r) {
        x.row(r) = batch.features.row(rows[static_cast<std::size_t>(r)]);
        y(r) = batch.targets(rows[static_cast<std::size_t>(r)]);
    }

    // forward, caching activations
    const std::size_t L = params.num_layers();
    std::vector<Eigen::MatrixXd> acts; // acts[l] = input to layer l
    acts.reserve(L + 1);
    acts.push_back(x);
    for (std::size_t l = 0; l < L; ++l) {
        Eigen::MatrixXd z =
            (acts.back() * params.weights[l].transpose()).rowwise() +
            params.biases[l].transpose();
        if (l + 1 < L) z = z.cwiseMax(0.0);
        acts.push_back(std::move(z));
    }
    const Eigen::MatrixXd& logits = acts.back();
    Eigen::MatrixXd probs = softmax(logits);

    LossResult loss = semantic_loss(probs, y, cfg);
    grad.loss = loss.value;

    // softmax Jacobian: dL/dl_i = p_i * (dL/dp_i - sum_j p_j dL/dp_j)
    Eigen::VectorXd dot = (probs.array() * loss.grad.array()).rowwise().sum();
    Eigen::MatrixXd delta = probs.array() * (loss.grad.colwise() - dot).array();

    for (std::size_t l = L; l-- > 0;) {
        grad.d_weights[l] = delta.transpose() * acts[l];
        grad.d_biases[l] = delta.colwise().sum();
        if (l > 0) {
            delta = delta * params.weights[l];
            // ReLU mask from the cached post-activation
            delta = (acts[l].array() > 0.0).select(delta, 0.0);
        }
    }
    return grad;
}

} // namespace vin

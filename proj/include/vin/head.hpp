#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "vin/grid.hpp"
#include "vin/losses.hpp"
#include "vin/types.hpp"

namespace vin {

// MLP weights for the implicit semantic function. Layer sizes are
// [3+C, 256, 128, 64, 32, S]: four ReLU hidden layers and a linear
// output layer to S logits.
struct HeadParams {
    std::vector<Eigen::MatrixXd> weights; // out x in
    std::vector<Eigen::VectorXd> biases;  // out

    int input_dim() const { return static_cast<int>(weights.front().cols()); }
    int output_dim() const { return static_cast<int>(weights.back().rows()); }
    std::size_t num_layers() const { return weights.size(); }

    std::size_t num_parameters() const;
    void check_shapes() const;
};

struct QueryBatch {
    Eigen::MatrixXd features;        // N x (3+C): relative position then voxel feature
    Eigen::VectorXi targets;         // class ids, optional (size 0 or N)
    std::vector<std::uint8_t> mask;  // supervision mask, optional (empty = all in)

    Eigen::Index size() const { return features.rows(); }
};

// Glorot-uniform weights, zero biases, deterministic given seed.
HeadParams head_init(std::uint64_t seed, int feature_channels, int num_classes,
                     const std::vector<int>& hidden = {256, 128, 64, 32});

// Pre-softmax logits, N x S.
Eigen::MatrixXd head_forward(const HeadParams& params, const Eigen::MatrixXd& features);

// Row-wise max-shifted softmax.
Eigen::MatrixXd softmax(const Eigen::MatrixXd& logits);

struct SemanticPrediction {
    Eigen::MatrixXd probs; // N x S
    std::vector<int> label;
    std::vector<double> score;
};

// Full query pipeline: voxel lookup (nearest-voxel fallback outside the
// grid), relative position, MLP, softmax. Argmax ties go to the
// smallest class id.
SemanticPrediction query_semantics(const HeadParams& params, const FeatureMap& map,
                                   const std::vector<Point>& points);

struct HeadGradient {
    double loss = 0.0;
    std::vector<Eigen::MatrixXd> d_weights;
    std::vector<Eigen::VectorXd> d_biases;
};

HeadGradient zero_gradient(const HeadParams& params);

// Semantic loss over masked-in queries with exact analytic gradients.
// A batch with no masked-in queries yields loss 0 and zero gradient.
HeadGradient head_loss_and_grad(const HeadParams& params, const QueryBatch& batch,
                                const SemanticLossConfig& cfg);

} // namespace vin

#pragma once

#include <cstdint>
#include <vector>

#include "vin/grid.hpp"
#include "vin/head.hpp"
#include "vin/losses.hpp"
#include "vin/synth.hpp"

namespace vin {

enum class LrSchedule { fixed, cyclic };

struct TrainConfig {
    double learning_rate = 1e-3;
    LrSchedule schedule = LrSchedule::fixed;
    double cyclic_min_factor = 0.1; // cyclic lr floor, fraction of learning_rate
    double weight_decay = 0.01;     // decoupled
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    int batch_size = 256;
    int epochs = 10;
    int steps_per_epoch = 200;
    double supervision_fraction = 1.0;
    std::uint64_t seed = 0;
    double lambda_lovasz = 1.0;
    std::vector<int> hidden = {256, 128, 64, 32};

    void validate() const;
};

struct TrainHistory {
    std::vector<double> train_loss;      // per epoch, mean over steps
    std::vector<double> val_miou;        // per epoch
};

struct TrainResult {
    HeadParams params;
    TrainHistory history;
    SemanticLossConfig loss_cfg; // includes the fitted class weights
};

// Optimize the semantic head on featurized synthetic scenes. Class
// weights are inverse-square-root label frequency, renormalized to
// mean 1. Deterministic given (config, seed).
TrainResult train(const std::vector<Scene>& train_scenes,
                  const std::vector<Scene>& val_scenes, const GridSpec& grid,
                  const ClassTaxonomy& taxonomy, const TrainConfig& cfg);

// Max relative error between analytic and central-difference gradients.
double grad_check(const HeadParams& params, const QueryBatch& batch,
                  const SemanticLossConfig& cfg, double eps = 1e-5);

// Validation helper: predict labels for a scene's points and return mIoU.
double evaluate_miou(const HeadParams& params, const GridSpec& grid,
                     const ClassTaxonomy& taxonomy, const std::vector<Scene>& scenes);

} // namespace vin

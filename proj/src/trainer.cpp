#include "vin/trainer.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "vin/metrics.hpp"
#include "vin/rng.hpp"

namespace vin {

void TrainConfig::validate() const {
    if (learning_rate <= 0.0) throw std::invalid_argument("learning rate must be > 0");
    if (!(supervision_fraction > 0.0 && supervision_fraction <= 1.0))
        throw std::invalid_argument("supervision fraction must be in (0, 1]");
    if (batch_size <= 0 || epochs <= 0 || steps_per_epoch <= 0)
        throw std::invalid_argument("batch/epoch sizes must be positive");
}

namespace {

// pooled supervised queries from all training scenes
struct Dataset {
    Eigen::MatrixXd features; // N x (3+C)
    Eigen::VectorXi targets;
};

Dataset build_dataset(const std::vector<Scene>& scenes, const GridSpec& grid,
                      double fraction, std::uint64_t seed) {
    std::vector<Eigen::RowVectorXd> rows;
    std::vector<int> targets;
    for (std::size_t si = 0; si < scenes.size(); ++si) {
        const Scene& scene = scenes[si];
        if (!scene.cloud.has_labels())
            throw std::invalid_argument("train: scene lacks gt labels");
        FeatureMap map = featurize(grid, scene.cloud);
        std::vector<std::uint8_t> mask =
            fraction < 1.0 ? mask_labels(scene.cloud, fraction, seed + si)
                           : std::vector<std::uint8_t>(scene.cloud.size(), 1);
        const int C = map.C;
        for (std::size_t p = 0; p < scene.cloud.size(); ++p) {
            if (!mask[p]) continue;
            int label = scene.cloud.sem_label[p];
            if (label == kIgnoreClass) continue;
            const Point& pt = scene.cloud.points[p];
            VoxelIndex idx = grid_index_of(grid, pt).value_or(nearest_voxel(grid, pt));
            Point c = voxel_center(grid, idx);
            Eigen::RowVectorXd row(3 + C);
            row(0) = pt.x - c.x;
            row(1) = pt.y - c.y;
            row(2) = pt.z - c.z;
            for (int ch = 0; ch < C; ++ch)
                row(3 + ch) = static_cast<double>(map.at(ch, idx));
            rows.push_back(std::move(row));
            targets.push_back(label);
        }
    }
    if (rows.empty()) throw std::runtime_error("train: empty supervision set");
    Dataset ds;
    ds.features.resize(static_cast<Eigen::Index>(rows.size()), rows.front().size());
    ds.targets.resize(static_cast<Eigen::Index>(targets.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        ds.features.row(static_cast<Eigen::Index>(i)) = rows[i];
        ds.targets(static_cast<Eigen::Index>(i)) = targets[i];
    }
    return ds;
}

Eigen::VectorXd class_weights_from(const Eigen::VectorXi& targets, int S) {
    Eigen::VectorXd freq = Eigen::VectorXd::Zero(S);
    for (Eigen::Index i = 0; i < targets.size(); ++i) freq(targets(i)) += 1.0;
    Eigen::VectorXd w(S);
    for (int c = 0; c < S; ++c)
        w(c) = freq(c) > 0.0 ? 1.0 / std::sqrt(freq(c)) : 0.0;
    double mean = w.mean();
    if (mean > 0.0) w /= mean;
    return w;
}

class AdamW {
public:
    AdamW(const HeadParams& params, const TrainConfig& cfg) : cfg_(cfg) {
        for (std::size_t l = 0; l < params.num_layers(); ++l) {
            mw_.push_back(Eigen::MatrixXd::Zero(params.weights[l].rows(),
                                                params.weights[l].cols()));
            vw_.push_back(mw_.back());
            mb_.push_back(Eigen::VectorXd::Zero(params.biases[l].size()));
            vb_.push_back(mb_.back());
        }
    }

    void step(HeadParams& params, const HeadGradient& grad, double lr) {
        ++t_;
        double bc1 = 1.0 - std::pow(cfg_.beta1, t_);
        double bc2 = 1.0 - std::pow(cfg_.beta2, t_);
        for (std::size_t l = 0; l < params.num_layers(); ++l) {
            // decoupled weight decay (biases excluded)
            params.weights[l] *= 1.0 - lr * cfg_.weight_decay;
            update(params.weights[l], grad.d_weights[l], mw_[l], vw_[l], lr, bc1, bc2);
            update(params.biases[l], grad.d_biases[l], mb_[l], vb_[l], lr, bc1, bc2);
        }
    }

private:
    template <typename T>
    void update(T& p, const T& g, T& m, T& v, double lr, double bc1, double bc2) {
        m = cfg_.beta1 * m + (1.0 - cfg_.beta1) * g;
        v = (cfg_.beta2 * v.array() + (1.0 - cfg_.beta2) * g.array().square()).matrix();
        p.array() -=
            lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + cfg_.adam_eps);
    }

    TrainConfig cfg_;
    long t_ = 0;
    std::vector<Eigen::MatrixXd> mw_, vw_;
    std::vector<Eigen::VectorXd> mb_, vb_;
};

} // namespace

double evaluate_miou(const HeadParams& params, const GridSpec& grid,
                     const ClassTaxonomy& taxonomy, const std::vector<Scene>& scenes) {
    ConfusionMatrix total;
    total.S = taxonomy.num_classes();
    total.counts.assign(static_cast<std::size_t>(total.S) * total.S, 0);
    for (const Scene& scene : scenes) {
        FeatureMap map = featurize(grid, scene.cloud);
        SemanticPrediction pred = query_semantics(params, map, scene.cloud.points);
        total.merge(confusion_matrix(pred.label, scene.cloud.sem_label, total.S));
    }
    return iou_metrics(total).miou;
}

TrainResult train(const std::vector<Scene>& train_scenes,
                  const std::vector<Scene>& val_scenes, const GridSpec& grid,
                  const ClassTaxonomy& taxonomy, const TrainConfig& cfg) {
    cfg.validate();
    Dataset ds = build_dataset(train_scenes, grid, cfg.supervision_fraction, cfg.seed);
    const int S = taxonomy.num_classes();

    TrainResult out;
    out.loss_cfg.class_weights = class_weights_from(ds.targets, S);
    out.loss_cfg.lambda_lovasz = cfg.lambda_lovasz;
    out.params = head_init(cfg.seed, kFeatureChannels, S, cfg.hidden);

    AdamW opt(out.params, cfg);
    Rng batch_rng(cfg.seed, 7);
    const auto n = ds.features.rows();
    const Eigen::Index bs = std::min<Eigen::Index>(cfg.batch_size, n);

    long total_steps = static_cast<long>(cfg.epochs) * cfg.steps_per_epoch;
    long step_idx = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        double loss_sum = 0.0;
        for (int step = 0; step < cfg.steps_per_epoch; ++step, ++step_idx) {
            QueryBatch batch;
            batch.features.resize(bs, ds.features.cols());
            batch.targets.resize(bs);
            for (Eigen::Index r = 0; r < bs; ++r) {
                auto pick = static_cast<Eigen::Index>(
                    batch_rng.uniform_int(static_cast<std::uint64_t>(n)));
                batch.features.row(r) = ds.features.row(pick);
                batch.targets(r) = ds.targets(pick);
            }
            HeadGradient grad = head_loss_and_grad(out.params, batch, out.loss_cfg);
            double lr = cfg.learning_rate;
            if (cfg.schedule == LrSchedule::cyclic) {
                // triangular cycle over the whole run
                double phase = static_cast<double>(step_idx) / total_steps;
                double tri = 1.0 - std::abs(2.0 * std::fmod(phase * 2.0, 1.0) - 1.0);
                lr = cfg.learning_rate *
                     (cfg.cyclic_min_factor + (1.0 - cfg.cyclic_min_factor) * tri);
            }
            opt.step(out.params, grad, lr);
            loss_sum += grad.loss;
        }
        out.history.train_loss.push_back(loss_sum / cfg.steps_per_epoch);
        out.history.val_miou.push_back(
            val_scenes.empty() ? std::numeric_limits<double>::quiet_NaN()
                               : evaluate_miou(out.params, grid, taxonomy, val_scenes));
    }
    return out;
}

namespace {

double& param_ref(HeadParams& p, std::size_t flat) {
    for (std::size_t l = 0; l < p.num_layers(); ++l) {
        auto wn = static_cast<std::size_t>(p.weights[l].size());
        if (flat < wn) return p.weights[l].data()[flat];
        flat -= wn;
        auto bn = static_cast<std::size_t>(p.biases[l].size());
        if (flat < bn) return p.biases[l].data()[flat];
        flat -= bn;
    }
    throw std::out_of_range("parameter index");
}

double grad_entry(const HeadGradient& g, const HeadParams& p, std::size_t flat) {
    for (std::size_t l = 0; l < p.num_layers(); ++l) {
        auto wn = static_cast<std::size_t>(p.weights[l].size());
        if (flat < wn) return g.d_weights[l].data()[flat];
        flat -= wn;
        auto bn = static_cast<std::size_t>(p.biases[l].size());
        if (flat < bn) return g.d_biases[l].data()[flat];
        flat -= bn;
    }
    throw std::out_of_range("parameter index");
}

} // namespace

double grad_check(const HeadParams& params, const QueryBatch& batch,
                  const SemanticLossConfig& cfg, double eps) {
    if (eps <= 0.0) throw std::invalid_argument("grad_check: eps must be > 0");
    HeadGradient analytic = head_loss_and_grad(params, batch, cfg);
    HeadParams work = params;
    double max_err = 0.0;
    const std::size_t n = params.num_parameters();
    for (std::size_t i = 0; i < n; ++i) {
        double& ref = param_ref(work, i);
        double orig = ref;
        ref = orig + eps;
        double up = head_loss_and_grad(work, batch, cfg).loss;
        ref = orig - eps;
        double down = head_loss_and_grad(work, batch, cfg).loss;
        ref = orig;
        double numeric = (up - down) / (2.0 * eps);
        double a = grad_entry(analytic, params, i);
        // the floor keeps finite-difference roundoff on dead parameters
        // (true gradient 0) from registering as spurious error
        double err = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-6});
        max_err = std::max(max_err, err);
    }
    return max_err;
}

} // namespace vin

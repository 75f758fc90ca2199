#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>

#include <CLI11.hpp>

#include "vin/config.hpp"
#include "vin/io.hpp"
#include "vin/metrics.hpp"
#include "vin/parallel.hpp"
#include "vin/rng.hpp"

namespace fs = std::filesystem;

namespace {

// exit codes: 2 usage, 3 unreadable/malformed file, 4 config validation
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitConfig = 4;

vin::ToolConfig load_config(const std::string& path) {
    return path.empty() ? vin::default_tool_config() : vin::read_config(path);
}

std::string scene_stem(const fs::path& dir, std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "scene_%03zu", index);
    return (dir / buf).string();
}

std::vector<vin::Scene> load_scene_dir(const fs::path& dir) {
    std::vector<fs::path> clouds;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() == ".cloud") clouds.push_back(entry.path());
    }
    std::sort(clouds.begin(), clouds.end());
    if (clouds.empty()) throw vin::IoError("no .cloud files in " + dir.string());
    std::vector<vin::Scene> scenes;
    for (const fs::path& cp : clouds) {
        vin::Scene scene;
        scene.cloud = vin::read_cloud(cp);
        fs::path lp = cp;
        lp.replace_extension(".labels");
        vin::apply_labels(scene.cloud, vin::read_labels(lp));
        fs::path bp = cp;
        bp.replace_extension(".boxes");
        if (fs::exists(bp)) scene.boxes = vin::read_boxes(bp);
        scenes.push_back(std::move(scene));
    }
    return scenes;
}

int run(int argc, char** argv) {
    CLI::App app{"voxel implicit-network segmentation toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed = 0;
    int threads = 1;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "config JSON path");
        sub->add_option("--seed", seed, "random seed");
        sub->add_option("--threads", threads, "scene-level parallelism");
    };

    // synth
    auto* synth = app.add_subcommand("synth", "generate synthetic scenes");
    std::string out_dir;
    int num_scenes = 1;
    synth->add_option("--out", out_dir, "output directory")->required();
    synth->add_option("--scenes", num_scenes, "number of scenes");
    add_common(synth);
    synth->callback([&] {
        vin::ToolConfig cfg = load_config(config_path);
        fs::create_directories(out_dir);
        vin::parallel_for(static_cast<std::size_t>(num_scenes), threads, [&](std::size_t i) {
            vin::SceneConfig sc = cfg.scene;
            sc.seed = seed + i;
            vin::Scene scene = vin::generate_scene(sc);
            std::string stem = scene_stem(out_dir, i);
            vin::write_cloud(stem + ".cloud", scene.cloud);
            vin::write_labels(stem + ".labels", vin::labels_of(scene.cloud));
            vin::write_boxes(stem + ".boxes", scene.boxes);
        });
        std::cout << "wrote " << num_scenes << " scenes to " << out_dir << "\n";
    });

    // train
    auto* train = app.add_subcommand("train", "train the semantic head");
    std::string train_dir, val_dir, params_out, history_out;
    train->add_option("--train-dir", train_dir, "training scene directory")->required();
    train->add_option("--val-dir", val_dir, "validation scene directory");
    train->add_option("--out", params_out, "output params JSON")->required();
    train->add_option("--history", history_out, "per-epoch history TSV");
    add_common(train);
    train->callback([&] {
        vin::ToolConfig cfg = load_config(config_path);
        cfg.train.seed = seed;
        std::vector<vin::Scene> train_scenes = load_scene_dir(train_dir);
        std::vector<vin::Scene> val_scenes;
        if (!val_dir.empty()) val_scenes = load_scene_dir(val_dir);
        vin::TrainResult result = vin::train(train_scenes, val_scenes, cfg.grid,
                                             cfg.scene.taxonomy, cfg.train);
        vin::write_params(params_out, result.params);
        if (!history_out.empty()) {
            std::ofstream h(history_out);
            h << "epoch\ttrain_loss\tval_miou\n";
            for (std::size_t e = 0; e < result.history.train_loss.size(); ++e)
                h << e << '\t' << result.history.train_loss[e] << '\t'
                  << result.history.val_miou[e] << '\n';
        }
        std::cout << "final train loss " << result.history.train_loss.back();
        if (!val_scenes.empty())
            std::cout << ", val mIoU " << result.history.val_miou.back();
        std::cout << "\n";
    });

    // infer
    auto* infer = app.add_subcommand("infer", "predict point semantics");
    std::string params_path, cloud_path, labels_out;
    infer->add_option("--params", params_path, "trained params JSON")->required();
    infer->add_option("--cloud", cloud_path, "input cloud")->required();
    infer->add_option("--out", labels_out, "output label file")->required();
    add_common(infer);
    infer->callback([&] {
        vin::ToolConfig cfg = load_config(config_path);
        vin::HeadParams params = vin::read_params(params_path);
        vin::PointCloud cloud = vin::read_cloud(cloud_path);
        vin::FeatureMap map = vin::featurize(cfg.grid, cloud);
        vin::SemanticPrediction pred = vin::query_semantics(params, map, cloud.points);
        vin::LabelData labels;
        labels.sem_label = pred.label;
        labels.sem_score = pred.score;
        labels.instance.assign(cloud.size(), 0);
        vin::write_labels(labels_out, labels);
        std::cout << "labeled " << cloud.size() << " points\n";
    });

    // ics
    auto* ics_cmd = app.add_subcommand("ics", "inconsistency suppression");
    std::string boxes_path, labels_path, out_boxes, out_labels, log_path;
    ics_cmd->add_option("--boxes", boxes_path, "detection boxes")->required();
    ics_cmd->add_option("--cloud", cloud_path, "input cloud")->required();
    ics_cmd->add_option("--labels", labels_path, "point labels")->required();
    ics_cmd->add_option("--out-boxes", out_boxes, "repaired boxes")->required();
    ics_cmd->add_option("--out-labels", out_labels, "repaired labels")->required();
    ics_cmd->add_option("--log", log_path, "change-log text file");
    add_common(ics_cmd);
    ics_cmd->callback([&] {
        vin::ToolConfig cfg = load_config(config_path);
        vin::PointCloud cloud = vin::read_cloud(cloud_path);
        vin::apply_labels(cloud, vin::read_labels(labels_path));
        std::vector<vin::BoundingBox7> boxes = vin::read_boxes(boxes_path);
        vin::IcsResult result = vin::ics(boxes, cloud, cfg.scene.taxonomy, cfg.ics);
        vin::write_boxes(out_boxes, result.boxes);
        vin::write_labels(out_labels, vin::labels_of(result.cloud));
        if (!log_path.empty()) {
            std::ofstream log(log_path);
            for (const vin::IcsChange& c : result.log) log << c.to_string() << '\n';
        }
        std::cout << result.log.size() << " changes\n";
    });

    // panoptic
    auto* pan = app.add_subcommand("panoptic", "assign instance ids from boxes");
    pan->add_option("--boxes", boxes_path, "detection boxes")->required();
    pan->add_option("--cloud", cloud_path, "input cloud")->required();
    pan->add_option("--labels", labels_path, "semantic labels")->required();
    pan->add_option("--out", labels_out, "output label file with instances")->required();
    add_common(pan);
    pan->callback([&] {
        vin::ToolConfig cfg = load_config(config_path);
        vin::PointCloud cloud = vin::read_cloud(cloud_path);
        vin::apply_labels(cloud, vin::read_labels(labels_path));
        std::vector<vin::BoundingBox7> boxes = vin::read_boxes(boxes_path);
        vin::PanopticCloud pc =
            vin::assign_instances(boxes, cloud, cfg.scene.taxonomy, cfg.panoptic);
        vin::LabelData labels = vin::labels_of(cloud);
        labels.sem_label = pc.sem_label;
        labels.instance = pc.instance;
        vin::write_labels(labels_out, labels);
        std::cout << "assigned instances for " << cloud.size() << " points\n";
    });

    // eval
    auto* eval = app.add_subcommand("eval", "semantic + panoptic metrics");
    std::string pred_path, gt_path, report_path;
    eval->add_option("--pred", pred_path, "predicted label file")->required();
    eval->add_option("--gt", gt_path, "ground-truth label file")->required();
    eval->add_option("--report", report_path, "output report JSON")->required();
    add_common(eval);
    eval->callback([&] {
        vin::ToolConfig cfg = load_config(config_path);
        vin::LabelData pred = vin::read_labels(pred_path);
        vin::LabelData gt = vin::read_labels(gt_path);
        vin::PanopticCloud pc{pred.sem_label, pred.instance};
        vin::PanopticCloud gc{gt.sem_label, gt.instance};
        vin::PanopticReport report =
            vin::panoptic_quality(pc, gc, cfg.scene.taxonomy);
        vin::write_report(report_path, report, cfg.scene.taxonomy);
        std::cout << "mIoU " << report.miou << " fwIoU " << report.fwiou << " PQ "
                  << report.PQ << " PQ+ " << report.PQ_dagger << "\n";
    });

    // gradcheck
    auto* gc = app.add_subcommand("gradcheck", "verify analytic gradients");
    int trials = 5;
    gc->add_option("--trials", trials, "number of random head/batch pairs");
    add_common(gc);
    gc->callback([&] {
        // finite differences are only valid away from the ReLU kinks, so
        // biases are randomized until every pre-activation clears them
        auto min_preactivation = [](const vin::HeadParams& p, const Eigen::MatrixXd& x) {
            Eigen::MatrixXd a = x;
            double lo = std::numeric_limits<double>::infinity();
            for (std::size_t l = 0; l + 1 < p.num_layers(); ++l) {
                Eigen::MatrixXd z =
                    (a * p.weights[l].transpose()).rowwise() + p.biases[l].transpose();
                lo = std::min(lo, z.cwiseAbs().minCoeff());
                a = z.cwiseMax(0.0);
            }
            return lo;
        };
        double worst = 0.0;
        for (int t = 0; t < trials; ++t) {
            vin::Rng rng(seed, 500 + t);
            int S = 3 + static_cast<int>(rng.uniform_int(3));
            vin::HeadParams params =
                vin::head_init(seed + t, vin::kFeatureChannels, S, {8, 6});
            vin::QueryBatch batch;
            const int n = 5;
            batch.features.resize(n, 3 + vin::kFeatureChannels);
            batch.targets.resize(n);
            for (int r = 0; r < n; ++r) {
                for (int c = 0; c < batch.features.cols(); ++c)
                    batch.features(r, c) = rng.normal();
                batch.targets(r) = static_cast<int>(rng.uniform_int(S));
            }
            do {
                for (auto& b : params.biases)
                    for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = 0.2 * rng.normal();
            } while (min_preactivation(params, batch.features) < 1e-3);
            vin::SemanticLossConfig cfg;
            cfg.class_weights = Eigen::VectorXd::Ones(S);
            cfg.lambda_lovasz = t % 2 == 0 ? 1.0 : 0.0;
            worst = std::max(worst, vin::grad_check(params, batch, cfg));
        }
        std::cout << "max relative error " << worst << "\n";
        if (worst >= 1e-4) throw std::runtime_error("gradient check failed");
    });

    // plotdata
    auto* plot = app.add_subcommand("plotdata", "per-class metric rows");
    std::string rows_out;
    plot->add_option("--report", report_path, "report JSON")->required();
    plot->add_option("--out", rows_out, "output TSV (stdout if omitted)");
    add_common(plot);
    plot->callback([&] {
        vin::ToolConfig cfg = load_config(config_path);
        vin::PanopticReport report = vin::read_report(report_path);
        std::string rows = vin::report_rows(report, cfg.scene.taxonomy);
        if (rows_out.empty()) {
            std::cout << rows;
        } else {
            std::ofstream f(rows_out);
            f << rows;
        }
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // prints help text for --help, the error message otherwise
        return app.exit(e) == 0 ? 0 : kExitUsage;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const vin::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

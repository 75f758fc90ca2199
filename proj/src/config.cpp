#include "vin/config.hpp"

#include <fstream>

#include <json.hpp>

#include "vin/io.hpp"

namespace vin {

namespace {

using nlohmann::json;

template <typename T>
void maybe(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

ClassTaxonomy taxonomy_from(const json& arr) {
    std::vector<ClassTaxonomy::Entry> entries;
    for (const auto& row : arr) {
        std::string kind = row.at("kind");
        if (kind != "thing" && kind != "stuff")
            throw std::invalid_argument("taxonomy kind must be thing or stuff");
        entries.push_back({row.at("name"),
                           kind == "thing" ? ClassKind::thing : ClassKind::stuff});
    }
    return ClassTaxonomy(std::move(entries));
}

json taxonomy_to(const ClassTaxonomy& tax) {
    json arr = json::array();
    for (const auto& e : tax.entries())
        arr.push_back({{"name", e.name},
                       {"kind", e.kind == ClassKind::thing ? "thing" : "stuff"}});
    return arr;
}

} // namespace

ToolConfig::ToolConfig() {
    grid.x0 = 0.0;
    grid.y0 = 0.0;
    grid.z0 = -0.5;
    grid.vx = 0.125;
    grid.vy = 0.125;
    grid.vz = 0.25;
    grid.W = 160;
    grid.H = 160;
    grid.D = 18;
}

ToolConfig default_tool_config() { return ToolConfig{}; }

ToolConfig read_config(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open " + path.string());
    json j;
    try {
        j = json::parse(f);
    } catch (const json::parse_error& e) {
        throw IoError(path.string() + ": " + e.what(), e.byte);
    }

    ToolConfig cfg;
    try {
        if (j.contains("grid")) {
            const json& g = j["grid"];
            maybe(g, "x0", cfg.grid.x0);
            maybe(g, "y0", cfg.grid.y0);
            maybe(g, "z0", cfg.grid.z0);
            maybe(g, "vx", cfg.grid.vx);
            maybe(g, "vy", cfg.grid.vy);
            maybe(g, "vz", cfg.grid.vz);
            maybe(g, "D", cfg.grid.D);
            maybe(g, "H", cfg.grid.H);
            maybe(g, "W", cfg.grid.W);
        }
        if (j.contains("taxonomy")) cfg.scene.taxonomy = taxonomy_from(j["taxonomy"]);
        if (j.contains("scene")) {
            const json& s = j["scene"];
            maybe(s, "extent_x", cfg.scene.extent_x);
            maybe(s, "extent_y", cfg.scene.extent_y);
            maybe(s, "extent_z", cfg.scene.extent_z);
            maybe(s, "ground_points", cfg.scene.ground_points);
            maybe(s, "wall_points", cfg.scene.wall_points);
            maybe(s, "vegetation_blobs", cfg.scene.vegetation_blobs);
            maybe(s, "vegetation_points_per_blob", cfg.scene.vegetation_points_per_blob);
            maybe(s, "sigma", cfg.scene.sigma);
            if (s.contains("objects")) {
                cfg.scene.objects.clear();
                for (const auto& o : s["objects"]) {
                    ObjectClassConfig oc;
                    maybe(o, "class_id", oc.class_id);
                    maybe(o, "min_count", oc.min_count);
                    maybe(o, "max_count", oc.max_count);
                    maybe(o, "min_l", oc.min_l);
                    maybe(o, "max_l", oc.max_l);
                    maybe(o, "min_w", oc.min_w);
                    maybe(o, "max_w", oc.max_w);
                    maybe(o, "min_h", oc.min_h);
                    maybe(o, "max_h", oc.max_h);
                    maybe(o, "intensity", oc.intensity);
                    maybe(o, "points_per_object", oc.points_per_object);
                    cfg.scene.objects.push_back(oc);
                }
            }
        }
        if (j.contains("train")) {
            const json& t = j["train"];
            maybe(t, "learning_rate", cfg.train.learning_rate);
            maybe(t, "weight_decay", cfg.train.weight_decay);
            maybe(t, "batch_size", cfg.train.batch_size);
            maybe(t, "epochs", cfg.train.epochs);
            maybe(t, "steps_per_epoch", cfg.train.steps_per_epoch);
            maybe(t, "supervision_fraction", cfg.train.supervision_fraction);
            maybe(t, "lambda_lovasz", cfg.train.lambda_lovasz);
            maybe(t, "hidden", cfg.train.hidden);
            if (t.contains("schedule")) {
                std::string s = t["schedule"];
                if (s == "fixed") cfg.train.schedule = LrSchedule::fixed;
                else if (s == "cyclic") cfg.train.schedule = LrSchedule::cyclic;
                else throw std::invalid_argument("schedule must be fixed or cyclic");
            }
        }
        if (j.contains("ics")) {
            const json& i = j["ics"];
            maybe(i, "c_gamma", cfg.ics.c_gamma);
            maybe(i, "c_alpha", cfg.ics.c_alpha);
            maybe(i, "m_p", cfg.ics.m_p);
        }
        if (j.contains("perturb")) {
            const json& p = j["perturb"];
            maybe(p, "center_sigma", cfg.perturb.center_sigma);
            maybe(p, "size_sigma", cfg.perturb.size_sigma);
            maybe(p, "yaw_sigma", cfg.perturb.yaw_sigma);
            maybe(p, "score_beta_a", cfg.perturb.score_beta_a);
            maybe(p, "score_beta_b", cfg.perturb.score_beta_b);
            maybe(p, "p_flip", cfg.perturb.p_flip);
            maybe(p, "drop_rate", cfg.perturb.drop_rate);
            maybe(p, "dup_rate", cfg.perturb.dup_rate);
        }
        if (j.contains("panoptic"))
            maybe(j["panoptic"], "require_class_match", cfg.panoptic.require_class_match);
        if (j.contains("loss_weights")) {
            const json& w = j["loss_weights"];
            maybe(w, "alpha_cls", cfg.loss_weights.alpha_cls);
            maybe(w, "alpha_reg", cfg.loss_weights.alpha_reg);
            maybe(w, "alpha_sem", cfg.loss_weights.alpha_sem);
        }
    } catch (const json::exception& e) {
        throw std::invalid_argument(path.string() + ": " + e.what());
    }
    cfg.grid.validate();
    cfg.scene.validate();
    cfg.train.validate();
    return cfg;
}

void write_config(const std::filesystem::path& path, const ToolConfig& cfg) {
    json j;
    j["grid"] = {{"x0", cfg.grid.x0}, {"y0", cfg.grid.y0}, {"z0", cfg.grid.z0},
                 {"vx", cfg.grid.vx}, {"vy", cfg.grid.vy}, {"vz", cfg.grid.vz},
                 {"D", cfg.grid.D},   {"H", cfg.grid.H},   {"W", cfg.grid.W}};
    j["taxonomy"] = taxonomy_to(cfg.scene.taxonomy);
    json objects = json::array();
    for (const auto& o : cfg.scene.objects) {
        objects.push_back({{"class_id", o.class_id}, {"min_count", o.min_count},
                           {"max_count", o.max_count}, {"min_l", o.min_l},
                           {"max_l", o.max_l}, {"min_w", o.min_w}, {"max_w", o.max_w},
                           {"min_h", o.min_h}, {"max_h", o.max_h},
                           {"intensity", o.intensity},
                           {"points_per_object", o.points_per_object}});
    }
    j["scene"] = {{"extent_x", cfg.scene.extent_x}, {"extent_y", cfg.scene.extent_y},
                  {"extent_z", cfg.scene.extent_z},
                  {"ground_points", cfg.scene.ground_points},
                  {"wall_points", cfg.scene.wall_points},
                  {"vegetation_blobs", cfg.scene.vegetation_blobs},
                  {"vegetation_points_per_blob", cfg.scene.vegetation_points_per_blob},
                  {"sigma", cfg.scene.sigma}, {"objects", objects}};
    j["train"] = {{"learning_rate", cfg.train.learning_rate},
                  {"weight_decay", cfg.train.weight_decay},
                  {"batch_size", cfg.train.batch_size},
                  {"epochs", cfg.train.epochs},
                  {"steps_per_epoch", cfg.train.steps_per_epoch},
                  {"supervision_fraction", cfg.train.supervision_fraction},
                  {"lambda_lovasz", cfg.train.lambda_lovasz},
                  {"hidden", cfg.train.hidden},
                  {"schedule",
                   cfg.train.schedule == LrSchedule::fixed ? "fixed" : "cyclic"}};
    j["ics"] = {{"c_gamma", cfg.ics.c_gamma}, {"c_alpha", cfg.ics.c_alpha},
                {"m_p", cfg.ics.m_p}};
    j["perturb"] = {{"center_sigma", cfg.perturb.center_sigma},
                    {"size_sigma", cfg.perturb.size_sigma},
                    {"yaw_sigma", cfg.perturb.yaw_sigma},
                    {"score_beta_a", cfg.perturb.score_beta_a},
                    {"score_beta_b", cfg.perturb.score_beta_b},
                    {"p_flip", cfg.perturb.p_flip},
                    {"drop_rate", cfg.perturb.drop_rate},
                    {"dup_rate", cfg.perturb.dup_rate}};
    j["panoptic"] = {{"require_class_match", cfg.panoptic.require_class_match}};
    j["loss_weights"] = {{"alpha_cls", cfg.loss_weights.alpha_cls},
                         {"alpha_reg", cfg.loss_weights.alpha_reg},
                         {"alpha_sem", cfg.loss_weights.alpha_sem}};
    std::ofstream f(path);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    f << j.dump(2) << '\n';
}

} // namespace vin

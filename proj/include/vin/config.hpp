#pragma once

#include <filesystem>

#include "vin/grid.hpp"
#include "vin/ics.hpp"
#include "vin/panoptic.hpp"
#include "vin/synth.hpp"
#include "vin/trainer.hpp"

namespace vin {

// Everything the CLI needs, in one JSON document. Every section is
// optional and falls back to defaults.
struct ToolConfig {
    GridSpec grid;
    SceneConfig scene = default_scene_config();
    TrainConfig train;
    IcsParams ics;
    PerturbConfig perturb;
    PanopticOptions panoptic;
    LossWeights loss_weights;

    ToolConfig();
};

ToolConfig default_tool_config();
ToolConfig read_config(const std::filesystem::path& path);
void write_config(const std::filesystem::path& path, const ToolConfig& cfg);

} // namespace vin

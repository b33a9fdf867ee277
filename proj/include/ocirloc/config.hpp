// SPDX-License-Identifier: Apache-2.0
//
// ocirloc: indoor optical wireless channel simulation and fingerprint localization

#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ocirloc/ann.hpp"
#include "ocirloc/scene.hpp"
#include "ocirloc/signal_chain.hpp"
#include "ocirloc/util.hpp"

namespace ocirloc {

// nlohmann::json keeps object keys sorted, so dump() is canonical and the
// config hash is reproducible.
using Json = nlohmann::json;

inline constexpr int kConfigSchemaVersion = 1;

inline std::uint64_t config_hash(const Json& j) { return fnv1a64(j.dump()); }

inline Json load_json_file(const std::string& path) {
    std::ifstream is(path);
    if (!is)
        throw std::runtime_error("cannot open config: " + path);
    Json j;
    is >> j;
    return j;
}

inline void save_json_file(const std::string& path, const Json& j) {
    std::ofstream os(path);
    if (!os)
        throw std::runtime_error("cannot write: " + path);
    os << j.dump(2) << '\n';
    if (!os)
        throw std::runtime_error("write failed: " + path);
}

// ---------------------------------------------------------------------------
// Scene

inline Json scene_to_json(const RoomScene& scene) {
    static const char* surface_names[kSurfaceCount] = {"wall_x_low", "wall_x_high", "wall_y_low",
                                                       "wall_y_high", "floor", "ceiling"};
    Json surfaces;
    for (int s = 0; s < kSurfaceCount; ++s)
        surfaces[surface_names[s]] = {{"enabled", scene.surfaces[s].enabled},
                                      {"reflectivity", scene.surfaces[s].reflectivity}};
    Json pds = Json::array();
    for (const auto& pd : scene.pds)
        pds.push_back({{"x", pd.position.x},
                       {"y", pd.position.y},
                       {"area", pd.area},
                       {"fov_half_angle_deg", rad_to_deg(pd.fov_half_angle)},
                       {"responsivity", pd.responsivity},
                       {"bandwidth_hz", pd.bandwidth_hz}});
    return Json{{"schema_version", kConfigSchemaVersion},
                {"length", scene.length},
                {"width", scene.width},
                {"height", scene.height},
                {"ue_height", scene.ue_height},
                {"patch_area", scene.patch_area},
                {"surfaces", surfaces},
                {"pds", pds}};
}

inline RoomScene scene_from_json(const Json& j) {
    if (j.value("schema_version", 0) != kConfigSchemaVersion)
        throw std::runtime_error("scene config: unsupported schema_version");
    RoomScene scene;
    scene.length = j.at("length").get<double>();
    scene.width = j.at("width").get<double>();
    scene.height = j.at("height").get<double>();
    scene.ue_height = j.at("ue_height").get<double>();
    scene.patch_area = j.at("patch_area").get<double>();
    static const char* surface_names[kSurfaceCount] = {"wall_x_low", "wall_x_high", "wall_y_low",
                                                       "wall_y_high", "floor", "ceiling"};
    if (j.contains("surfaces"))
        for (int s = 0; s < kSurfaceCount; ++s)
            if (j["surfaces"].contains(surface_names[s])) {
                const auto& js = j["surfaces"][surface_names[s]];
                scene.surfaces[s].enabled = js.value("enabled", false);
                scene.surfaces[s].reflectivity = js.value("reflectivity", 0.8);
            }
    if (j.contains("pds"))
        for (const auto& jp : j["pds"]) {
            PdSpec pd;
            pd.position = {jp.at("x").get<double>(), jp.at("y").get<double>(), scene.height};
            pd.area = jp.value("area", 1e-4);
            pd.fov_half_angle = deg_to_rad(jp.value("fov_half_angle_deg", 85.0));
            pd.responsivity = jp.value("responsivity", 0.54);
            pd.bandwidth_hz = jp.value("bandwidth_hz", 500e6);
            scene.pds.push_back(pd);
        }
    scene.validate();
    return scene;
}

// ---------------------------------------------------------------------------
// Training configuration

inline Json train_config_to_json(const TrainConfig& c) {
    return Json{{"hidden_units", c.hidden_units},
                {"batch_size", c.batch_size},
                {"batches_per_epoch", c.batches_per_epoch},
                {"max_epochs", c.max_epochs},
                {"patience", c.patience},
                {"l1", c.l1},
                {"optimizer",
                 c.optimizer == TrainConfig::Optimizer::Adam ? "adam" : "momentum_sgd"},
                {"learning_rate", c.learning_rate},
                {"lr_decay", c.lr_decay},
                {"momentum", c.momentum},
                {"selu_lambda", c.selu_lambda},
                {"selu_alpha", c.selu_alpha},
                {"seed", c.seed}};
}

inline TrainConfig train_config_from_json(const Json& j) {
    TrainConfig c;
    c.hidden_units = j.value("hidden_units", c.hidden_units);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.batches_per_epoch = j.value("batches_per_epoch", c.batches_per_epoch);
    c.max_epochs = j.value("max_epochs", c.max_epochs);
    c.patience = j.value("patience", c.patience);
    c.l1 = j.value("l1", c.l1);
    const std::string opt = j.value("optimizer", "adam");
    if (opt == "adam")
        c.optimizer = TrainConfig::Optimizer::Adam;
    else if (opt == "momentum_sgd")
        c.optimizer = TrainConfig::Optimizer::MomentumSgd;
    else
        throw std::runtime_error("train config: unknown optimizer " + opt);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.lr_decay = j.value("lr_decay", c.lr_decay);
    c.momentum = j.value("momentum", c.momentum);
    c.selu_lambda = j.value("selu_lambda", c.selu_lambda);
    c.selu_alpha = j.value("selu_alpha", c.selu_alpha);
    c.seed = j.value("seed", c.seed);
    c.validate();
    return c;
}

} // namespace ocirloc

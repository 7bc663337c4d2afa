// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "diffusion/config.hpp"
#include "synth/synth.hpp"

namespace teadapter::io {

// Everything a config file can set: the model / schedule / training
// parameters ("config/v1" fields, see config_from_json) and optional extra
// timbre profiles under "profiles".
struct AppConfig {
    diffusion::DiffusionConfig model = diffusion::desk_config();
    std::vector<synth::TimbreProfile> profiles;

    // Exact custom-profile name first, then the built-in nearest-name lookup.
    const synth::TimbreProfile& profile(const std::string& label) const;
};

AppConfig app_config_from_json(const nlohmann::json& j);
// Empty path: the desk defaults.
AppConfig load_app_config(const std::filesystem::path& path);

}  // namespace teadapter::io

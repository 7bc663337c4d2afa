// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#include "io/config.hpp"

#include "common/error.hpp"
#include "io/files.hpp"

namespace teadapter::io {

const synth::TimbreProfile& AppConfig::profile(const std::string& label) const {
    for (const auto& p : profiles) {
        if (p.name == label) {
            return p;
        }
    }
    return synth::profile_for_label(label);
}

AppConfig app_config_from_json(const nlohmann::json& j) {
    require(j.is_object(), ErrorCode::kSchemaError, "config must be a JSON object");
    AppConfig c;
    nlohmann::json model = j;
    model.erase("profiles");
    if (!model.contains("schema")) {
        model["schema"] = "config/v1";
    }
    c.model = diffusion::config_from_json(model);
    if (j.contains("profiles")) {
        try {
            for (const auto& pj : j.at("profiles")) {
                c.profiles.push_back(synth::profile_from_json(pj));
            }
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorCode::kSchemaError, std::string("malformed profiles: ") + e.what());
        }
    }
    return c;
}

AppConfig load_app_config(const std::filesystem::path& path) {
    if (path.empty()) {
        return {};
    }
    return app_config_from_json(read_json(path));
}

}  // namespace teadapter::io

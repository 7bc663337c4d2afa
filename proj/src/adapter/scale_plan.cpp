// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#include "adapter/scale_plan.hpp"

#include "common/error.hpp"

namespace teadapter::adapter {

void ScalePlan::validate() const {
    require(frames > 0 && bins > 0 && unshuffle > 0, ErrorCode::kShapeError, "latent extents must be positive");
    require(frames % unshuffle == 0 && bins % unshuffle == 0, ErrorCode::kShapeError,
            "latent " + std::to_string(frames) + "x" + std::to_string(bins) + " is not divisible by " +
                std::to_string(unshuffle));
    for (int c : channels) {
        require(c > 0, ErrorCode::kShapeError, "stage channels must be positive");
    }
}

std::array<StageDims, kStages> ScalePlan::stage_dims() const {
    validate();
    return stage_dims_of(frames, bins, unshuffle);
}

nlohmann::json to_json(const ScalePlan& plan) {
    return {{"frames", plan.frames}, {"bins", plan.bins}, {"unshuffle", plan.unshuffle}, {"channels", plan.channels}};
}

ScalePlan plan_from_json(const nlohmann::json& j) {
    try {
        ScalePlan plan;
        plan.frames = j.at("frames").get<int>();
        plan.bins = j.at("bins").get<int>();
        plan.unshuffle = j.at("unshuffle").get<int>();
        plan.channels = j.at("channels").get<std::array<int, kStages>>();
        plan.validate();
        return plan;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::kSchemaError, std::string("bad scale plan: ") + e.what());
    }
}

std::string describe(const ScalePlan& plan) {
    std::string s;
    for (const auto& d : plan.stage_dims()) {
        s += (s.empty() ? "" : ", ") + std::to_string(d.height) + "x" + std::to_string(d.width);
    }
    return s;
}

}  // namespace teadapter::adapter

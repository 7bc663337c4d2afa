// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <string>

#include "json.hpp"

namespace teadapter::adapter {

inline constexpr int kStages = 4;

struct StageDims {
    int height = 0;  // time
    int width = 0;   // frequency
    bool operator==(const StageDims&) const = default;
};

// Extents of the four stages for a [frames, bins] latent: pixel unshuffle by
// `unshuffle`, then three stride-2, pad-1, kernel-3 convolutions.
constexpr std::array<StageDims, kStages> stage_dims_of(int frames, int bins, int unshuffle) {
    std::array<StageDims, kStages> dims{};
    StageDims d{frames / unshuffle, bins / unshuffle};
    for (int s = 0; s < kStages; ++s) {
        dims[static_cast<std::size_t>(s)] = d;
        d.height = (d.height - 1) / 2 + 1;
        d.width = (d.width - 1) / 2 + 1;
    }
    return dims;
}

// Default [1024, 64] latent with unshuffle 4.
static_assert(stage_dims_of(1024, 64, 4) ==
              std::array<StageDims, kStages>{{{256, 16}, {128, 8}, {64, 4}, {32, 2}}});

// Latent geometry shared by the adapter and the denoiser encoder: a
// [frames, bins] latent is pixel-unshuffled by `unshuffle`, then halved
// (rounding up) by each of three stride-2 stages.
struct ScalePlan {
    int frames = 1024;
    int bins = 64;
    int unshuffle = 4;
    std::array<int, kStages> channels = {16, 24, 32, 32};

    // Throws ShapeError when the latent is not divisible by the factor.
    void validate() const;
    int input_channels() const { return unshuffle * unshuffle; }
    // Finest first: index 0 is the pixel-unshuffled resolution.
    std::array<StageDims, kStages> stage_dims() const;

    bool operator==(const ScalePlan&) const = default;
};

nlohmann::json to_json(const ScalePlan& plan);
ScalePlan plan_from_json(const nlohmann::json& j);
std::string describe(const ScalePlan& plan);

}  // namespace teadapter::adapter

// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <vector>

#include "adapter/scale_plan.hpp"
#include "nn/blocks.hpp"

namespace teadapter::diffusion {

struct BackboneConfig {
    adapter::ScalePlan plan;
    int embed_dim = 64;       // FiLM conditioning width
    int vocab = 512;          // hashed text tokens
    int time_features = 32;   // sinusoidal step encoding
};

// Conv-only UNet predicting the noise in a [N, 1, frames, bins] latent.
// Encoder stages match the adapter scale plan one to one; adapter maps are
// added to the four encoder stage outputs before they feed the next stage
// and the decoder skips. Step and text condition every block through FiLM.
class ToyBackbone {
public:
    ToyBackbone(const BackboneConfig& config, std::uint64_t seed);

    const BackboneConfig& config() const { return config_; }

    // z may be longer or shorter than the configured latent as long as its
    // frame count divides by the unshuffle factor.
    // steps: one diffusion step per batch item; tokens: hashed ids per item.
    // injection: four maps (fine to coarse) added to the encoder outputs.
    // encoder_maps, when given, receives the pre-injection stage outputs.
    nn::Var forward(nn::Tape& tape, const nn::Var& z, const std::vector<int>& steps,
                    const std::vector<std::vector<int>>& tokens, const std::vector<nn::Var>* injection = nullptr,
                    std::vector<nn::Tensor>* encoder_maps = nullptr);

    std::vector<nn::Parameter*> parameters();
    void set_frozen(bool frozen);
    bool all_frozen();

private:
    nn::Var conditioning(nn::Tape& tape, const std::vector<int>& steps, const std::vector<std::vector<int>>& tokens);

    BackboneConfig config_;
    nn::Linear time1_;
    nn::Linear time2_;
    nn::Parameter text_table_;
    nn::Conv2d conv_in_;
    std::vector<nn::Conv2d> down_;
    std::vector<nn::ResBlock> encoder_;
    nn::ResBlock mid_;
    std::vector<nn::ResBlock> decoder_;
    nn::GroupNorm norm_out_;
    nn::Conv2d conv_out_;
};

// Sinusoidal encoding of integer steps, [N, features].
nn::Tensor step_encoding(const std::vector<int>& steps, int features);

}  // namespace teadapter::diffusion

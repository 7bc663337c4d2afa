// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "diffusion/backbone.hpp"
#include "dsp/mel.hpp"
#include "json.hpp"

namespace teadapter::diffusion {

struct DiffusionConfig {
    std::string name = "paper";
    BackboneConfig backbone;
    dsp::MelConfig mel;
    int steps = 200;
    double beta_start = 1e-4;
    double beta_end = 2e-2;
    double learning_rate = 1e-5;
    int batch_size = 16;
    int train_steps = 2000;
    int pretrain_steps = 1000;
    double pretrain_learning_rate = 1e-3;

    const adapter::ScalePlan& plan() const { return backbone.plan; }
    int frames() const { return backbone.plan.frames; }
    int bins() const { return backbone.plan.bins; }
    // Clip length whose centered framing yields exactly frames() frames.
    std::size_t clip_samples() const;
    double clip_seconds() const;

    // Mel and latent geometry must agree.
    void validate() const;
};

// [1024, 64] latent, pixel unshuffle 4, 10 s at 16 kHz, Adam 1e-5, batch 16.
DiffusionConfig paper_config();
// 128 x 64 latent over ~8 s clips with a melody-range mel band; sized so
// training and sampling fit a single desktop core.
DiffusionConfig desk_config();
// [64, 16] latent, pixel unshuffle 2, used by fast tests and the CLI smoke run.
DiffusionConfig toy_config();
// 4 x 4 latent for finite-difference checks.
DiffusionConfig gradcheck_config();

DiffusionConfig named_config(const std::string& name);

// Schema "config/v1". Fields not present keep the values of the "base"
// preset (default "desk").
nlohmann::json to_json(const DiffusionConfig& config);
DiffusionConfig config_from_json(const nlohmann::json& j);

}  // namespace teadapter::diffusion

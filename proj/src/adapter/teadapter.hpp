// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "adapter/scale_plan.hpp"
#include "nn/blocks.hpp"

namespace teadapter::adapter {

enum class ConditionType { kChord, kMelody, kMelodyInstrument };

std::string condition_name(ConditionType type);  // "chord", "melody", "melody_instr"
ConditionType parse_condition(const std::string& name);

// Four maps ordered fine to coarse; map j pairs with encoder stage j.
struct MultiScaleFeatures {
    std::vector<nn::Tensor> maps;
};

// Side network: pixel unshuffle, then four residual blocks with stride-2
// downsamplers between them. Each block ends in a zero-initialized 1x1
// projection, so a fresh adapter contributes exactly nothing.
class TEAdapter {
public:
    TEAdapter(const ScalePlan& plan, std::uint64_t seed);

    const ScalePlan& plan() const { return plan_; }

    // condition: [N, 1, frames, bins]. With any_length the frame count only
    // has to divide by the unshuffle factor (long-form composition).
    std::vector<nn::Var> forward(nn::Tape& tape, const nn::Var& condition, bool any_length = false);

    // Inference on a [frames, bins, 1] or [N, 1, frames, bins] condition.
    MultiScaleFeatures features(const nn::Tensor& condition, bool any_length = false);

    std::vector<nn::Parameter*> parameters();

private:
    ScalePlan plan_;
    nn::Conv2d conv_in_;
    std::vector<nn::ResBlock> blocks_;
    std::vector<nn::Conv2d> down_;
    std::vector<nn::Conv2d> out_;
};

// Reshapes a [frames, bins, 1] condition to [1, 1, frames, bins]; batched
// [N, 1, frames, bins] input passes through. Throws ShapeError otherwise.
nn::Tensor condition_to_nchw(const nn::Tensor& condition, const ScalePlan& plan, bool any_length = false);

struct AdapterMember {
    TEAdapter* adapter = nullptr;
    nn::Tensor condition;
    double weight = 1.0;
};

struct AdapterGroup {
    std::vector<AdapterMember> members;
};

// Elementwise weighted sum across members, per scale.
MultiScaleFeatures group_combine(const std::vector<MultiScaleFeatures>& features, const std::vector<double>& weights);
// Runs every member's adapter and combines the results.
MultiScaleFeatures group_combine(AdapterGroup& group);

// Elementwise U + Y per scale. Throws ShapeError on any mismatch.
MultiScaleFeatures inject(const MultiScaleFeatures& encoder_maps, const MultiScaleFeatures& features);

// Differentiable weighted sum used while training a group.
std::vector<nn::Var> combine_vars(const std::vector<std::vector<nn::Var>>& features, const std::vector<double>& weights);

struct AdapterTags {
    ConditionType condition = ConditionType::kMelody;
    std::string section = "generic";
};

void save_adapter(const std::filesystem::path& dir, TEAdapter& adapter, const AdapterTags& tags);
// Reads the manifest's plan and tags, then the weights. Missing files throw NotLoaded.
std::unique_ptr<TEAdapter> load_adapter(const std::filesystem::path& dir, AdapterTags* tags = nullptr);

}  // namespace teadapter::adapter

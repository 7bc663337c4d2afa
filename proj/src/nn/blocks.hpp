// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "nn/layers.hpp"

namespace teadapter::nn {

// Pre-activation residual block:
// GN -> SiLU -> conv3x3 -> [FiLM] -> GN -> SiLU -> conv3x3, plus a skip path
// that is the identity or a 1x1 conv when the channel count changes. With
// film_features > 0 the block owns a zero-initialized projection from the
// conditioning vector to per-channel (gamma, beta).
class ResBlock {
public:
    ResBlock() = default;
    ResBlock(const std::string& name, int in_channels, int out_channels, Rng& rng, int film_features = 0);

    Var operator()(Tape& tape, const Var& x, const Var* conditioning = nullptr);
    void collect(std::vector<Parameter*>& out);

    int out_channels() const { return conv2_.out_channels(); }

private:
    GroupNorm norm1_;
    GroupNorm norm2_;
    Conv2d conv1_;
    Conv2d conv2_;
    Conv2d skip_;
    Linear film_;
    bool project_skip_ = false;
    bool has_film_ = false;
    int channels_ = 0;
};

}  // namespace teadapter::nn

// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#include "nn/blocks.hpp"

namespace teadapter::nn {

ResBlock::ResBlock(const std::string& name, int in_channels, int out_channels, Rng& rng, int film_features)
    : norm1_(name + ".norm1", in_channels),
      norm2_(name + ".norm2", out_channels),
      conv1_(name + ".conv1", in_channels, out_channels, 3, 1, 1, rng),
      conv2_(name + ".conv2", out_channels, out_channels, 3, 1, 1, rng, Init::kKaimingUniform, 0.25),
      project_skip_(in_channels != out_channels),
      has_film_(film_features > 0),
      channels_(out_channels) {
    if (project_skip_) {
        skip_ = Conv2d(name + ".skip", in_channels, out_channels, 1, 1, 0, rng);
    }
    if (has_film_) {
        film_ = Linear(name + ".film", film_features, 2 * out_channels, rng, Init::kZero);
    }
}

Var ResBlock::operator()(Tape& tape, const Var& x, const Var* conditioning) {
    Var h = conv1_(tape, silu(norm1_(tape, x)));
    if (has_film_) {
        require(conditioning != nullptr, ErrorCode::kInvalidArgument, "FiLM block called without conditioning");
        const Var gb = film_(tape, *conditioning);
        h = film(h, slice_features(gb, 0, channels_), slice_features(gb, channels_, 2 * channels_));
    }
    h = conv2_(tape, silu(norm2_(tape, h)));
    return add(project_skip_ ? skip_(tape, x) : x, h);
}

void ResBlock::collect(std::vector<Parameter*>& out) {
    norm1_.collect(out);
    conv1_.collect(out);
    norm2_.collect(out);
    conv2_.collect(out);
    if (project_skip_) {
        skip_.collect(out);
    }
    if (has_film_) {
        film_.collect(out);
    }
}

}  // namespace teadapter::nn

// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#include "diffusion/backbone.hpp"

#include <cmath>

#include "common/error.hpp"
#include "common/rng.hpp"

namespace teadapter::diffusion {

using adapter::kStages;

nn::Tensor step_encoding(const std::vector<int>& steps, int features) {
    require(features >= 2 && features % 2 == 0, ErrorCode::kInvalidArgument, "step encoding width must be even");
    const int n = static_cast<int>(steps.size());
    const int half = features / 2;
    nn::Tensor out({n, features});
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < half; ++k) {
            const double freq = std::exp(-std::log(10000.0) * k / half);
            const double arg = steps[static_cast<std::size_t>(i)] * freq;
            out[static_cast<std::size_t>(i) * features + k] = static_cast<nn::Real>(std::sin(arg));
            out[static_cast<std::size_t>(i) * features + half + k] = static_cast<nn::Real>(std::cos(arg));
        }
    }
    return out;
}

ToyBackbone::ToyBackbone(const BackboneConfig& config, std::uint64_t seed) : config_(config) {
    config_.plan.validate();
    Rng rng(seed);
    const auto& ch = config_.plan.channels;
    const int d = config_.embed_dim;
    time1_ = nn::Linear("backbone.time1", config_.time_features, d, rng);
    time2_ = nn::Linear("backbone.time2", d, d, rng);
    nn::Tensor table({config_.vocab, d});
    for (auto& v : table.data()) {
        v = static_cast<nn::Real>(rng.uniform(-1.0, 1.0));
    }
    text_table_ = nn::Parameter("backbone.text_table", std::move(table));

    conv_in_ = nn::Conv2d("backbone.conv_in", config_.plan.input_channels(), ch[0], 3, 1, 1, rng);
    for (int s = 0; s < kStages; ++s) {
        const int in = s == 0 ? ch[0] : ch[static_cast<std::size_t>(s - 1)];
        if (s > 0) {
            down_.emplace_back("backbone.down" + std::to_string(s), in, in, 3, 2, 1, rng);
        }
        encoder_.emplace_back("backbone.enc" + std::to_string(s), in, ch[static_cast<std::size_t>(s)], rng, d);
    }
    mid_ = nn::ResBlock("backbone.mid", ch[3], ch[3], rng, d);
    // Decoder block s consumes [upsampled deeper features ++ encoder skip s].
    for (int s = 0; s < kStages; ++s) {
        const int deeper = s == kStages - 1 ? ch[3] : ch[static_cast<std::size_t>(s + 1)];
        decoder_.emplace_back("backbone.dec" + std::to_string(s), deeper + ch[static_cast<std::size_t>(s)],
                              ch[static_cast<std::size_t>(s)], rng, d);
    }
    norm_out_ = nn::GroupNorm("backbone.norm_out", ch[0]);
    conv_out_ = nn::Conv2d("backbone.conv_out", ch[0], config_.plan.input_channels(), 3, 1, 1, rng,
                           nn::Init::kKaimingUniform, 0.1);
}

nn::Var ToyBackbone::conditioning(nn::Tape& tape, const std::vector<int>& steps,
                                  const std::vector<std::vector<int>>& tokens) {
    const nn::Var t = time2_(tape, nn::silu(time1_(tape, tape.constant(step_encoding(steps, config_.time_features)))));
    const nn::Var text = nn::embedding_mean(tape.parameter(text_table_), tokens);
    return nn::silu(nn::add(t, text));
}

nn::Var ToyBackbone::forward(nn::Tape& tape, const nn::Var& z, const std::vector<int>& steps,
                             const std::vector<std::vector<int>>& tokens, const std::vector<nn::Var>* injection,
                             std::vector<nn::Tensor>* encoder_maps) {
    const auto& plan = config_.plan;
    const auto& shape = z.shape();
    // Fully convolutional: any frame count divisible by the unshuffle factor.
    require(shape.size() == 4 && shape[1] == 1 && shape[2] > 0 && shape[2] % plan.unshuffle == 0 &&
                shape[3] == plan.bins,
            ErrorCode::kShapeError, "backbone expects [N, 1, frames, " + std::to_string(plan.bins) +
                                        "] with frames divisible by " + std::to_string(plan.unshuffle) + ", got " +
                                        nn::shape_string(shape));
    const auto n = static_cast<std::size_t>(shape[0]);
    require(steps.size() == n && tokens.size() == n, ErrorCode::kShapeError, "one step and one token list per item");
    require(injection == nullptr || injection->size() == static_cast<std::size_t>(kStages), ErrorCode::kShapeError,
            "injection needs one map per encoder stage");

    const nn::Var cond = conditioning(tape, steps, tokens);
    nn::Var h = conv_in_(tape, nn::pixel_unshuffle(z, plan.unshuffle));
    std::vector<nn::Var> skips;
    for (int s = 0; s < kStages; ++s) {
        if (s > 0) {
            h = down_[static_cast<std::size_t>(s - 1)](tape, h);
        }
        h = encoder_[static_cast<std::size_t>(s)](tape, h, &cond);
        if (encoder_maps != nullptr) {
            encoder_maps->push_back(h.value());
        }
        if (injection != nullptr) {
            const nn::Var& y = (*injection)[static_cast<std::size_t>(s)];
            require(y.shape() == h.shape(), ErrorCode::kShapeError,
                    "adapter map " + nn::shape_string(y.shape()) + " does not match encoder stage " +
                        std::to_string(s) + " " + nn::shape_string(h.shape()));
            h = nn::add(h, y);
        }
        skips.push_back(h);
    }
    h = mid_(tape, h, &cond);
    for (int s = kStages - 1; s >= 0; --s) {
        const nn::Var& skip = skips[static_cast<std::size_t>(s)];
        if (h.shape()[2] != skip.shape()[2] || h.shape()[3] != skip.shape()[3]) {
            h = nn::resize_nearest(h, skip.shape()[2], skip.shape()[3]);
        }
        h = decoder_[static_cast<std::size_t>(s)](tape, nn::concat_channels(h, skip), &cond);
    }
    return nn::pixel_shuffle(conv_out_(tape, nn::silu(norm_out_(tape, h))), plan.unshuffle);
}

std::vector<nn::Parameter*> ToyBackbone::parameters() {
    std::vector<nn::Parameter*> params;
    time1_.collect(params);
    time2_.collect(params);
    params.push_back(&text_table_);
    conv_in_.collect(params);
    for (auto& d : down_) {
        d.collect(params);
    }
    for (auto& e : encoder_) {
        e.collect(params);
    }
    mid_.collect(params);
    for (auto& d : decoder_) {
        d.collect(params);
    }
    norm_out_.collect(params);
    conv_out_.collect(params);
    return params;
}

void ToyBackbone::set_frozen(bool frozen) { nn::set_frozen(parameters(), frozen); }

bool ToyBackbone::all_frozen() {
    for (const nn::Parameter* p : parameters()) {
        if (!p->frozen) {
            return false;
        }
    }
    return true;
}

}  // namespace teadapter::diffusion

// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#include "features/condition.hpp"

namespace teadapter::features {

nn::Tensor controls_to_condition(const dsp::AudioClip& clip, const dsp::MelConfig& mel, int frames) {
    const std::vector<double> features = dsp::mel_features(clip, mel, frames);
    std::vector<nn::Real> data(features.begin(), features.end());
    return nn::Tensor({frames, mel.n_mels, 1}, std::move(data));
}

}  // namespace teadapter::features

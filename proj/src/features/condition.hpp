// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "dsp/audio.hpp"
#include "dsp/mel.hpp"
#include "nn/tensor.hpp"

namespace teadapter::features {

// Rendered control audio -> [frames, n_mels, 1] log-mel tensor, padded with
// silence or cropped to `frames`. Throws EmptyInput for an empty clip.
nn::Tensor controls_to_condition(const dsp::AudioClip& clip, const dsp::MelConfig& mel, int frames);

}  // namespace teadapter::features

// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

namespace teadapter::dsp {

inline constexpr double kDefaultSampleRate = 16000.0;

// Mono waveform. Samples are nominally in [-1, 1].
struct AudioClip {
    std::vector<double> samples;
    double sample_rate = kDefaultSampleRate;

    double duration() const { return sample_rate > 0.0 ? static_cast<double>(samples.size()) / sample_rate : 0.0; }
    bool empty() const { return samples.empty(); }
};

// Throws EmptyInput / InvalidAudio.
void validate(const AudioClip& clip);

double peak(const AudioClip& clip);

// Linear-interpolation resampler.
AudioClip resample_linear(const AudioClip& clip, double target_rate);

// Band-limited resampler: Hann-windowed sinc with 32 zero crossings per side,
// cutoff at 0.97 of the lower Nyquist frequency. Identity when the rates match.
AudioClip resample(const AudioClip& clip, double target_rate);

// Zero-pads or truncates to exactly `length` samples.
AudioClip fit_length(const AudioClip& clip, std::size_t length);

}  // namespace teadapter::dsp

// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "dsp/audio.hpp"

namespace teadapter::dsp {

// Log-compressed mel front end shared by condition tensors and latents.
// Per frame: m = M |X| / (sum(w) / 2) so a sine of amplitude a peaks near a,
// then feature = log(1 + log_gain * m). Silence maps to exactly zero.
struct MelConfig {
    double sample_rate = kDefaultSampleRate;
    int n_fft = 1024;
    int hop_size = 160;
    int n_mels = 64;
    double fmin = 0.0;
    double fmax = 8000.0;
    double log_gain = 100.0;
    int griffin_lim_iterations = 32;
};

void validate(const MelConfig& config);

// HTK-scale triangular filters with unit peak, n_mels x (n_fft / 2 + 1).
struct MelFilterbank {
    int n_mels = 0;
    int bins = 0;
    std::vector<double> weights;
    std::vector<double> centers_hz;

    double weight(int mel, int bin) const { return weights[static_cast<std::size_t>(mel) * bins + bin]; }
};

double hz_to_mel(double hz);
double mel_to_hz(double mel);
MelFilterbank mel_filterbank(const MelConfig& config);

// Number of centered frames the clip produces on its own.
int natural_frame_count(std::size_t samples, const MelConfig& config);

// Frame-major features, exactly `frames` x n_mels: zero-padded (silence) or
// cropped along time.
std::vector<double> mel_features(const AudioClip& clip, const MelConfig& config, int frames);

// Inverts features to audio: undo the log compression, spread each mel value
// back over its filter (peak-normalized interpolation between centers), then
// Griffin-Lim phase reconstruction. Deterministic for a given seed.
AudioClip mel_to_audio(const std::vector<double>& features, int frames, const MelConfig& config,
                       std::uint64_t seed = 0);

}  // namespace teadapter::dsp

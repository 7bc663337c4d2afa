// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "dsp/audio.hpp"
#include "dsp/chroma.hpp"

namespace teadapter::features {

inline constexpr int kRest = -1;

// One pitch class (0..11, C = 0) or kRest per chroma frame.
struct MelodyTrack {
    std::vector<int> classes;
    int hop_size = dsp::kDefaultChromaHop;
    double sample_rate = dsp::kDefaultSampleRate;

    int frames() const { return static_cast<int>(classes.size()); }
    int voiced_frames() const;
};

struct MelodyOptions {
    int window_size = dsp::kChromaWindow;
    int hop_size = dsp::kDefaultChromaHop;
    int harm_kernel = 5;   // frames
    int perc_kernel = 17;  // bins
    int nn_neighbors = 3;
    int median_width = 3;
    // Frame chroma L1 below this fraction of the loudest frame is REST.
    double silence_ratio = 1e-4;
};

// stft -> hpss (harmonic part) -> chroma -> REST gating -> per-frame max
// normalization -> nn_smooth -> median_smooth_time -> argmax.
// Kernels are shrunk to fit very short clips.
MelodyTrack extract_melody(const dsp::AudioClip& clip, const MelodyOptions& options = {});

// Normalized, smoothed chroma the argmax is taken over; REST frames are zero.
dsp::Chromagram melody_chroma(const dsp::AudioClip& clip, const MelodyOptions& options = {});

}  // namespace teadapter::features

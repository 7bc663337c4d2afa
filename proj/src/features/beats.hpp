// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "dsp/audio.hpp"

namespace teadapter::features {

inline constexpr double kMinTempo = 40.0;
inline constexpr double kMaxTempo = 240.0;

struct BeatGrid {
    std::vector<double> beat_times;      // seconds, ascending
    std::vector<int> downbeat_indices;   // into beat_times
    double tempo_bpm = 120.0;
};

// Half-wave rectified log-magnitude spectral flux, one value per STFT frame.
struct OnsetEnvelope {
    std::vector<double> values;
    double frame_rate = 0.0;  // frames per second

    double time_of(double frame) const { return frame / frame_rate; }
};

// The clip is peak-normalized first so the envelope does not depend on gain.
OnsetEnvelope onset_envelope(const dsp::AudioClip& clip, int window_size = 512, int hop_size = 64);

struct BeatOptions {
    int window_size = 512;
    int hop_size = 64;
    double tightness = 100.0;
    // Log-normal tempo prior: centre and width in octaves.
    double prior_bpm = 120.0;
    double prior_octaves = 1.0;
};

// Global tempo from the weighted autocorrelation of the envelope, refined by
// a parabola through the peak lag. Clamped to [40, 240] BPM.
double estimate_tempo(const OnsetEnvelope& envelope, const BeatOptions& options = {});

// Dynamic-programming beat tracker. Downbeats are every fourth beat, phased
// so that the beat with the strongest onset is a downbeat.
// Throws TooShort (< 2 s) and NoBeats (no onset energy).
BeatGrid estimate_beats(const dsp::AudioClip& clip, const BeatOptions& options = {});

}  // namespace teadapter::features

// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <utility>
#include <vector>

#include "dsp/stft.hpp"

namespace teadapter::dsp {

inline constexpr int kPitchClasses = 12;
inline constexpr int kDefaultChromaHop = 2048;
inline constexpr int kChromaWindow = 2048;
inline constexpr double kChromaMinHz = 60.0;
inline constexpr double kChromaMaxHz = 4000.0;

using ChromaFrame = std::array<double, kPitchClasses>;

// Frames x 12 pitch-class energies, C = 0 ... B = 11.
struct Chromagram {
    int hop_size = kDefaultChromaHop;
    double sample_rate = kDefaultSampleRate;
    std::vector<ChromaFrame> energies;

    int frames() const { return static_cast<int>(energies.size()); }
};

// Equal temperament, A4 = 440 Hz.
int pitch_class_of_frequency(double hz);

// Folds the power of every bin in [60 Hz, 4 kHz] onto its pitch class.
Chromagram chromagram_from_spectrogram(const Spectrogram& spec);

// Hann window of 2048 samples, centered frames at `hop_size`. Energies are
// raw folded power; callers normalize as they need.
Chromagram chromagram(const AudioClip& clip, int hop_size = kDefaultChromaHop);

// Per-frame max normalization; all-zero frames stay zero.
Chromagram max_normalize(const Chromagram& chroma);

// --- harmonic / percussive separation -----------------------------------

struct HpssMasks {
    std::vector<double> harmonic;
    std::vector<double> percussive;
};

// Soft Wiener-style masks (exponent 2) from a median filter along time
// (harmonic) and along frequency (percussive). Both kernels must be odd and
// >= 3; a kernel longer than its axis throws KernelTooLarge. Where both
// medians vanish the masks split evenly.
HpssMasks hpss_masks(const Spectrogram& spec, int harm_kernel, int perc_kernel);
std::pair<Spectrogram, Spectrogram> hpss(const Spectrogram& spec, int harm_kernel, int perc_kernel);

// --- smoothing -----------------------------------------------------------

// Median of a sliding window with half-sample symmetric edges. Width must be odd.
std::vector<double> median_filter(const std::vector<double>& values, int width);

// Each pitch-class row median-filtered along time. Even width -> InvalidWidth.
Chromagram median_smooth_time(const Chromagram& chroma, int width);

// Each frame replaced by the mean of its k most cosine-similar frames, itself
// included. k larger than the frame count -> KTooLarge.
Chromagram nn_smooth(const Chromagram& chroma, int k);

}  // namespace teadapter::dsp

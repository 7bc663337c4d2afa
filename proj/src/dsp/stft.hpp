// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <vector>

#include "dsp/audio.hpp"

namespace teadapter::dsp {

enum class Window { kHann, kRectangular };

struct StftOptions {
    int window_size = 2048;
    int hop_size = 512;
    Window window = Window::kHann;
    // Centered frames: the signal is reflect-padded by window_size / 2.
    bool center = true;
};

// Frame-major magnitude spectrogram: frames x (window_size / 2 + 1) bins.
struct Spectrogram {
    int frames = 0;
    int bins = 0;
    int hop_size = 0;
    int window_size = 0;
    double sample_rate = kDefaultSampleRate;
    std::vector<double> magnitudes;

    double& at(int frame, int bin) { return magnitudes[static_cast<std::size_t>(frame) * bins + bin]; }
    double at(int frame, int bin) const { return magnitudes[static_cast<std::size_t>(frame) * bins + bin]; }
    double bin_frequency(int bin) const { return bin * sample_rate / window_size; }
};

struct ComplexSpectrogram {
    int frames = 0;
    int bins = 0;
    int hop_size = 0;
    int window_size = 0;
    double sample_rate = kDefaultSampleRate;
    std::vector<std::complex<double>> values;

    std::complex<double>& at(int frame, int bin) { return values[static_cast<std::size_t>(frame) * bins + bin]; }
    const std::complex<double>& at(int frame, int bin) const {
        return values[static_cast<std::size_t>(frame) * bins + bin];
    }
};

// Periodic window of length n.
std::vector<double> make_window(Window window, int n);

ComplexSpectrogram stft_complex(const AudioClip& clip, const StftOptions& options);
Spectrogram magnitude(const ComplexSpectrogram& spec);

// Hann-windowed, centered magnitude STFT. Throws EmptyInput / InvalidAudio.
Spectrogram stft(const AudioClip& clip, int window_size, int hop_size);
Spectrogram stft(const AudioClip& clip, const StftOptions& options);

// Weighted overlap-add inverse; output trimmed or padded to `length`.
std::vector<double> istft(const ComplexSpectrogram& spec, const StftOptions& options, std::size_t length);

// Time-domain energy estimate from a magnitude spectrogram, compensating for
// one-sided bins, window power and frame overlap.
double spectral_energy(const Spectrogram& spec, const StftOptions& options);

}  // namespace teadapter::dsp

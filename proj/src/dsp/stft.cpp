// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#include "dsp/stft.hpp"

#include <cmath>
#include <numbers>

#include "common/error.hpp"
#include "dsp/fft.hpp"

namespace teadapter::dsp {
namespace {

void check_options(const StftOptions& options) {
    require(options.hop_size > 0, ErrorCode::kInvalidArgument, "hop size must be positive");
    require(options.window_size >= options.hop_size, ErrorCode::kInvalidArgument,
            "window size must be at least the hop size");
    require(options.window_size % 2 == 0, ErrorCode::kInvalidArgument, "window size must be even");
}

// Reflection without edge repeat (d c b | a b c d | c b a), applied repeatedly
// so that arbitrarily short signals can be padded.
long reflect_index(long i, long n) {
    if (n == 1) {
        return 0;
    }
    const long period = 2 * (n - 1);
    long m = i % period;
    if (m < 0) {
        m += period;
    }
    return m < n ? m : period - m;
}

int frame_count(std::size_t length, const StftOptions& options) {
    const auto len = static_cast<long>(length);
    if (options.center) {
        return static_cast<int>(1 + len / options.hop_size);
    }
    if (len <= options.window_size) {
        return 1;
    }
    return static_cast<int>(1 + (len - options.window_size) / options.hop_size);
}

}  // namespace

std::vector<double> make_window(Window window, int n) {
    std::vector<double> w(static_cast<std::size_t>(n), 1.0);
    if (window == Window::kHann) {
        for (int i = 0; i < n; ++i) {
            w[static_cast<std::size_t>(i)] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / n);
        }
    }
    return w;
}

ComplexSpectrogram stft_complex(const AudioClip& clip, const StftOptions& options) {
    validate(clip);
    check_options(options);
    const int n_fft = options.window_size;
    const auto window = make_window(options.window, n_fft);
    const long len = static_cast<long>(clip.samples.size());
    const long offset = options.center ? n_fft / 2 : 0;

    ComplexSpectrogram spec;
    spec.frames = frame_count(clip.samples.size(), options);
    spec.bins = n_fft / 2 + 1;
    spec.hop_size = options.hop_size;
    spec.window_size = n_fft;
    spec.sample_rate = clip.sample_rate;
    spec.values.resize(static_cast<std::size_t>(spec.frames) * spec.bins);

    std::vector<double> frame(static_cast<std::size_t>(n_fft));
    for (int f = 0; f < spec.frames; ++f) {
        const long start = static_cast<long>(f) * options.hop_size - offset;
        for (int i = 0; i < n_fft; ++i) {
            const long idx = start + i;
            double s = 0.0;
            if (idx >= 0 && idx < len) {
                s = clip.samples[static_cast<std::size_t>(idx)];
            } else if (options.center) {
                s = clip.samples[static_cast<std::size_t>(reflect_index(idx, len))];
            }
            frame[static_cast<std::size_t>(i)] = s * window[static_cast<std::size_t>(i)];
        }
        rfft(frame, std::span(spec.values).subspan(static_cast<std::size_t>(f) * spec.bins, spec.bins));
    }
    return spec;
}

Spectrogram magnitude(const ComplexSpectrogram& spec) {
    Spectrogram out;
    out.frames = spec.frames;
    out.bins = spec.bins;
    out.hop_size = spec.hop_size;
    out.window_size = spec.window_size;
    out.sample_rate = spec.sample_rate;
    out.magnitudes.resize(spec.values.size());
    for (std::size_t i = 0; i < spec.values.size(); ++i) {
        out.magnitudes[i] = std::abs(spec.values[i]);
    }
    return out;
}

Spectrogram stft(const AudioClip& clip, int window_size, int hop_size) {
    StftOptions options;
    options.window_size = window_size;
    options.hop_size = hop_size;
    return stft(clip, options);
}

Spectrogram stft(const AudioClip& clip, const StftOptions& options) { return magnitude(stft_complex(clip, options)); }

std::vector<double> istft(const ComplexSpectrogram& spec, const StftOptions& options, std::size_t length) {
    check_options(options);
    require(spec.window_size == options.window_size && spec.hop_size == options.hop_size,
            ErrorCode::kInvalidArgument, "istft options do not match the spectrogram");
    const int n_fft = options.window_size;
    const auto window = make_window(options.window, n_fft);
    const long offset = options.center ? n_fft / 2 : 0;
    const long total = static_cast<long>(spec.frames - 1) * options.hop_size + n_fft;
    std::vector<double> signal(static_cast<std::size_t>(total), 0.0);
    std::vector<double> norm(static_cast<std::size_t>(total), 0.0);
    std::vector<double> frame(static_cast<std::size_t>(n_fft));
    for (int f = 0; f < spec.frames; ++f) {
        irfft(std::span(spec.values).subspan(static_cast<std::size_t>(f) * spec.bins, spec.bins), frame);
        const long start = static_cast<long>(f) * options.hop_size;
        for (int i = 0; i < n_fft; ++i) {
            const double w = window[static_cast<std::size_t>(i)];
            signal[static_cast<std::size_t>(start + i)] += frame[static_cast<std::size_t>(i)] / n_fft * w;
            norm[static_cast<std::size_t>(start + i)] += w * w;
        }
    }
    std::vector<double> out(length, 0.0);
    for (std::size_t i = 0; i < length; ++i) {
        const long idx = static_cast<long>(i) + offset;
        if (idx < total && norm[static_cast<std::size_t>(idx)] > 1e-10) {
            out[i] = signal[static_cast<std::size_t>(idx)] / norm[static_cast<std::size_t>(idx)];
        }
    }
    return out;
}

double spectral_energy(const Spectrogram& spec, const StftOptions& options) {
    const auto window = make_window(options.window, spec.window_size);
    double window_power = 0.0;
    for (double w : window) {
        window_power += w * w;
    }
    double total = 0.0;
    for (int f = 0; f < spec.frames; ++f) {
        double frame = 0.0;
        for (int b = 0; b < spec.bins; ++b) {
            const double m = spec.at(f, b);
            const bool edge = b == 0 || b == spec.bins - 1;
            frame += (edge ? 1.0 : 2.0) * m * m;
        }
        total += frame / spec.window_size;
    }
    return total * options.hop_size / window_power;
}

}  // namespace teadapter::dsp

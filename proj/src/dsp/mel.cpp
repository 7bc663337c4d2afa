// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#include "dsp/mel.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "common/error.hpp"
#include "common/rng.hpp"
#include "dsp/stft.hpp"

namespace teadapter::dsp {
namespace {

StftOptions stft_options(const MelConfig& config) {
    StftOptions options;
    options.window_size = config.n_fft;
    options.hop_size = config.hop_size;
    options.window = Window::kHann;
    options.center = true;
    return options;
}

double amplitude_scale(const MelConfig& config) {
    // Hann window sum is n/2, so |X| of a sine of amplitude a peaks at a * n/4.
    return 4.0 / static_cast<double>(config.n_fft);
}

}  // namespace

void validate(const MelConfig& config) {
    require(config.sample_rate > 0.0, ErrorCode::kInvalidArgument, "mel sample rate must be positive");
    require(config.n_fft > 0 && config.n_fft % 2 == 0, ErrorCode::kInvalidArgument, "n_fft must be even");
    require(config.hop_size > 0 && config.hop_size <= config.n_fft, ErrorCode::kInvalidArgument,
            "mel hop must be in (0, n_fft]");
    require(config.n_mels > 0, ErrorCode::kInvalidArgument, "n_mels must be positive");
    require(config.fmin >= 0.0 && config.fmax > config.fmin && config.fmax <= config.sample_rate / 2.0,
            ErrorCode::kInvalidArgument, "mel range must satisfy 0 <= fmin < fmax <= nyquist");
    require(config.log_gain > 0.0, ErrorCode::kInvalidArgument, "log gain must be positive");
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

MelFilterbank mel_filterbank(const MelConfig& config) {
    validate(config);
    MelFilterbank fb;
    fb.n_mels = config.n_mels;
    fb.bins = config.n_fft / 2 + 1;
    fb.weights.assign(static_cast<std::size_t>(fb.n_mels) * fb.bins, 0.0);
    const double lo = hz_to_mel(config.fmin);
    const double hi = hz_to_mel(config.fmax);
    std::vector<double> edges(static_cast<std::size_t>(config.n_mels + 2));
    for (std::size_t i = 0; i < edges.size(); ++i) {
        edges[i] = mel_to_hz(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(config.n_mels + 1));
    }
    fb.centers_hz.assign(edges.begin() + 1, edges.end() - 1);
    for (int m = 0; m < fb.n_mels; ++m) {
        const double left = edges[static_cast<std::size_t>(m)];
        const double center = edges[static_cast<std::size_t>(m + 1)];
        const double right = edges[static_cast<std::size_t>(m + 2)];
        for (int b = 0; b < fb.bins; ++b) {
            const double hz = b * config.sample_rate / config.n_fft;
            double w = 0.0;
            if (hz > left && hz <= center) {
                w = (hz - left) / (center - left);
            } else if (hz > center && hz < right) {
                w = (right - hz) / (right - center);
            }
            fb.weights[static_cast<std::size_t>(m) * fb.bins + b] = w;
        }
    }
    return fb;
}

int natural_frame_count(std::size_t samples, const MelConfig& config) {
    return static_cast<int>(1 + samples / static_cast<std::size_t>(config.hop_size));
}

std::vector<double> mel_features(const AudioClip& clip, const MelConfig& config, int frames) {
    validate(clip);
    validate(config);
    require(frames > 0, ErrorCode::kInvalidArgument, "frame count must be positive");
    AudioClip input = clip;
    if (input.sample_rate != config.sample_rate) {
        input = resample_linear(input, config.sample_rate);
    }
    const ComplexSpectrogram spec = stft_complex(input, stft_options(config));
    const MelFilterbank fb = mel_filterbank(config);
    const double scale = amplitude_scale(config);
    std::vector<double> features(static_cast<std::size_t>(frames) * config.n_mels, 0.0);
    const int usable = std::min(frames, spec.frames);
    for (int f = 0; f < usable; ++f) {
        for (int m = 0; m < config.n_mels; ++m) {
            double acc = 0.0;
            for (int b = 0; b < fb.bins; ++b) {
                const double w = fb.weight(m, b);
                if (w != 0.0) {
                    acc += w * std::abs(spec.at(f, b));
                }
            }
            features[static_cast<std::size_t>(f) * config.n_mels + m] = std::log1p(config.log_gain * acc * scale);
        }
    }
    return features;
}

AudioClip mel_to_audio(const std::vector<double>& features, int frames, const MelConfig& config,
                       std::uint64_t seed) {
    validate(config);
    require(frames > 0 && features.size() == static_cast<std::size_t>(frames) * config.n_mels,
            ErrorCode::kShapeError, "mel feature length does not match frames x n_mels");
    const MelFilterbank fb = mel_filterbank(config);
    const double scale = amplitude_scale(config);

    std::vector<double> norm(static_cast<std::size_t>(fb.bins), 0.0);
    for (int m = 0; m < fb.n_mels; ++m) {
        for (int b = 0; b < fb.bins; ++b) {
            norm[static_cast<std::size_t>(b)] += fb.weight(m, b);
        }
    }
    // Target linear magnitudes in STFT units.
    std::vector<double> target(static_cast<std::size_t>(frames) * fb.bins, 0.0);
    std::vector<double> mel(static_cast<std::size_t>(fb.n_mels));
    for (int f = 0; f < frames; ++f) {
        for (int m = 0; m < fb.n_mels; ++m) {
            const double v = std::max(0.0, features[static_cast<std::size_t>(f) * fb.n_mels + m]);
            mel[static_cast<std::size_t>(m)] = std::expm1(v) / config.log_gain;
        }
        for (int b = 0; b < fb.bins; ++b) {
            const double n = norm[static_cast<std::size_t>(b)];
            if (n <= 0.0) {
                continue;
            }
            double acc = 0.0;
            for (int m = 0; m < fb.n_mels; ++m) {
                acc += fb.weight(m, b) * mel[static_cast<std::size_t>(m)];
            }
            // A tone between two centers excites both filters; the
            // interpolation is renormalized by the total filter weight.
            target[static_cast<std::size_t>(f) * fb.bins + b] = acc / n / scale;
        }
    }

    const StftOptions options = stft_options(config);
    const std::size_t length = static_cast<std::size_t>(frames - 1) * config.hop_size;
    ComplexSpectrogram spec;
    spec.frames = frames;
    spec.bins = fb.bins;
    spec.hop_size = config.hop_size;
    spec.window_size = config.n_fft;
    spec.sample_rate = config.sample_rate;
    spec.values.resize(target.size());
    Rng rng(seed);
    for (std::size_t i = 0; i < target.size(); ++i) {
        spec.values[i] = std::polar(target[i], 2.0 * std::numbers::pi * rng.uniform());
    }
    AudioClip out;
    out.sample_rate = config.sample_rate;
    out.samples = istft(spec, options, std::max<std::size_t>(length, 1));
    for (int iter = 0; iter < config.griffin_lim_iterations; ++iter) {
        const ComplexSpectrogram rebuilt = stft_complex(out, options);
        for (int f = 0; f < frames; ++f) {
            for (int b = 0; b < fb.bins; ++b) {
                const std::size_t i = static_cast<std::size_t>(f) * fb.bins + b;
                const std::complex<double> z = f < rebuilt.frames ? rebuilt.at(f, b) : std::complex<double>{};
                const double mag = std::abs(z);
                spec.values[i] = mag > 1e-12 ? z * (target[i] / mag) : std::complex<double>(target[i], 0.0);
            }
        }
        out.samples = istft(spec, options, out.samples.size());
    }
    return out;
}

}  // namespace teadapter::dsp

// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#include "dsp/audio.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "common/error.hpp"

namespace teadapter::dsp {

void validate(const AudioClip& clip) {
    require(!clip.samples.empty(), ErrorCode::kEmptyInput, "audio clip is empty");
    require(clip.sample_rate > 0.0 && std::isfinite(clip.sample_rate), ErrorCode::kInvalidAudio,
            "sample rate must be positive");
    for (double s : clip.samples) {
        require(std::isfinite(s), ErrorCode::kInvalidAudio, "audio contains non-finite samples");
    }
}

double peak(const AudioClip& clip) {
    double p = 0.0;
    for (double s : clip.samples) {
        p = std::max(p, std::abs(s));
    }
    return p;
}

AudioClip resample_linear(const AudioClip& clip, double target_rate) {
    require(target_rate > 0.0, ErrorCode::kInvalidArgument, "target rate must be positive");
    validate(clip);
    if (clip.sample_rate == target_rate) {
        return clip;
    }
    const double ratio = clip.sample_rate / target_rate;
    const auto out_len = static_cast<std::size_t>(std::floor(static_cast<double>(clip.samples.size()) / ratio));
    AudioClip out;
    out.sample_rate = target_rate;
    out.samples.resize(out_len);
    const std::size_t last = clip.samples.size() - 1;
    for (std::size_t i = 0; i < out_len; ++i) {
        const double pos = static_cast<double>(i) * ratio;
        const auto left = static_cast<std::size_t>(pos);
        const double frac = pos - static_cast<double>(left);
        const double a = clip.samples[std::min(left, last)];
        const double b = clip.samples[std::min(left + 1, last)];
        out.samples[i] = a + (b - a) * frac;
    }
    return out;
}

AudioClip resample(const AudioClip& clip, double target_rate) {
    require(target_rate > 0.0 && std::isfinite(target_rate), ErrorCode::kInvalidArgument, "target rate must be positive");
    validate(clip);
    if (clip.sample_rate == target_rate) {
        return clip;
    }
    constexpr int kZeroCrossings = 32;
    constexpr double kRolloff = 0.97;
    const double step = clip.sample_rate / target_rate;              // input samples per output sample
    const double cutoff = kRolloff * std::min(1.0, target_rate / clip.sample_rate);  // cycles per input sample * 2
    const double half_width = kZeroCrossings / cutoff;               // in input samples
    const auto out_len = static_cast<std::size_t>(std::floor(static_cast<double>(clip.samples.size()) / step));
    const long n = static_cast<long>(clip.samples.size());
    AudioClip out;
    out.sample_rate = target_rate;
    out.samples.assign(out_len, 0.0);
    for (std::size_t i = 0; i < out_len; ++i) {
        const double centre = static_cast<double>(i) * step;
        const long lo = std::max(0L, static_cast<long>(std::ceil(centre - half_width)));
        const long hi = std::min(n - 1, static_cast<long>(std::floor(centre + half_width)));
        double acc = 0.0;
        for (long k = lo; k <= hi; ++k) {
            const double u = static_cast<double>(k) - centre;
            const double x = cutoff * u;
            const double sinc = x == 0.0 ? 1.0 : std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
            const double window = 0.5 + 0.5 * std::cos(std::numbers::pi * u / half_width);
            acc += clip.samples[static_cast<std::size_t>(k)] * cutoff * sinc * window;
        }
        out.samples[i] = acc;
    }
    return out;
}

AudioClip fit_length(const AudioClip& clip, std::size_t length) {
    AudioClip out;
    out.sample_rate = clip.sample_rate;
    out.samples = clip.samples;
    out.samples.resize(length, 0.0);
    return out;
}

}  // namespace teadapter::dsp

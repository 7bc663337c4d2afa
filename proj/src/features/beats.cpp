// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#include "features/beats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "common/error.hpp"
#include "dsp/stft.hpp"

namespace teadapter::features {
namespace {

constexpr double kMinDuration = 2.0;
constexpr double kLogGain = 100.0;
constexpr double kNoiseFloor = 1e-9;

}  // namespace

OnsetEnvelope onset_envelope(const dsp::AudioClip& input, int window_size, int hop_size) {
    dsp::validate(input);
    dsp::AudioClip clip = input.sample_rate == dsp::kDefaultSampleRate
                              ? input
                              : dsp::resample_linear(input, dsp::kDefaultSampleRate);
    const double level = dsp::peak(clip);
    if (level > 0.0) {
        for (auto& s : clip.samples) {
            s /= level;
        }
    }
    const dsp::Spectrogram spec = dsp::stft(clip, window_size, hop_size);
    OnsetEnvelope env;
    env.frame_rate = clip.sample_rate / hop_size;
    env.values.assign(static_cast<std::size_t>(spec.frames), 0.0);
    std::vector<double> prev(static_cast<std::size_t>(spec.bins), 0.0);
    std::vector<double> cur(static_cast<std::size_t>(spec.bins));
    for (int f = 0; f < spec.frames; ++f) {
        double flux = 0.0;
        for (int b = 0; b < spec.bins; ++b) {
            cur[static_cast<std::size_t>(b)] = std::log1p(kLogGain * spec.at(f, b));
            if (f > 0) {
                flux += std::max(0.0, cur[static_cast<std::size_t>(b)] - prev[static_cast<std::size_t>(b)]);
            }
        }
        env.values[static_cast<std::size_t>(f)] = flux;
        std::swap(prev, cur);
    }
    return env;
}

double estimate_tempo(const OnsetEnvelope& envelope, const BeatOptions& options) {
    const auto& o = envelope.values;
    const int n = static_cast<int>(o.size());
    const double mean = n > 0 ? std::accumulate(o.begin(), o.end(), 0.0) / n : 0.0;
    const int min_lag = std::max(1, static_cast<int>(std::floor(60.0 * envelope.frame_rate / kMaxTempo)));
    const int max_lag = std::min(n - 1, static_cast<int>(std::ceil(60.0 * envelope.frame_rate / kMinTempo)));
    require(max_lag > min_lag + 1, ErrorCode::kTooShort, "onset envelope too short for tempo estimation");

    std::vector<double> score(static_cast<std::size_t>(max_lag + 2), 0.0);
    for (int lag = std::max(1, min_lag - 1); lag <= std::min(n - 1, max_lag + 1); ++lag) {
        double acc = 0.0;
        for (int i = lag; i < n; ++i) {
            acc += (o[static_cast<std::size_t>(i)] - mean) * (o[static_cast<std::size_t>(i - lag)] - mean);
        }
        const double bpm = 60.0 * envelope.frame_rate / lag;
        const double octaves = std::log2(bpm / options.prior_bpm) / options.prior_octaves;
        score[static_cast<std::size_t>(lag)] = acc / (n - lag) * std::exp(-0.5 * octaves * octaves);
    }
    int best = min_lag;
    for (int lag = min_lag; lag <= max_lag; ++lag) {
        if (score[static_cast<std::size_t>(lag)] > score[static_cast<std::size_t>(best)]) {
            best = lag;
        }
    }
    double lag = best;
    if (best > 1 && best + 1 < static_cast<int>(score.size())) {
        const double a = score[static_cast<std::size_t>(best - 1)];
        const double b = score[static_cast<std::size_t>(best)];
        const double c = score[static_cast<std::size_t>(best + 1)];
        const double denom = a - 2.0 * b + c;
        if (denom < 0.0) {
            lag += std::clamp(0.5 * (a - c) / denom, -0.5, 0.5);
        }
    }
    return std::clamp(60.0 * envelope.frame_rate / lag, kMinTempo, kMaxTempo);
}

BeatGrid estimate_beats(const dsp::AudioClip& clip, const BeatOptions& options) {
    dsp::validate(clip);
    require(clip.duration() >= kMinDuration, ErrorCode::kTooShort,
            "beat tracking needs at least 2 s of audio, got " + std::to_string(clip.duration()) + " s");
    OnsetEnvelope env = onset_envelope(clip, options.window_size, options.hop_size);
    auto& o = env.values;
    const double strongest = *std::max_element(o.begin(), o.end());
    require(strongest > kNoiseFloor, ErrorCode::kNoBeats, "no onsets above the noise floor");
    // Unit-variance envelope so the tightness weight has a fixed meaning.
    const double mean = std::accumulate(o.begin(), o.end(), 0.0) / static_cast<double>(o.size());
    double var = 0.0;
    for (double v : o) {
        var += (v - mean) * (v - mean);
    }
    const double sd = std::sqrt(var / static_cast<double>(o.size()));
    if (sd > 0.0) {
        for (auto& v : o) {
            v /= sd;
        }
    }

    BeatGrid grid;
    grid.tempo_bpm = estimate_tempo(env, options);
    const double period = 60.0 * env.frame_rate / grid.tempo_bpm;
    const int n = static_cast<int>(o.size());
    const int lo = std::max(1, static_cast<int>(std::lround(period / 2.0)));
    const int hi = std::max(lo, static_cast<int>(std::lround(2.0 * period)));

    std::vector<double> score(static_cast<std::size_t>(n));
    std::vector<int> back(static_cast<std::size_t>(n), -1);
    for (int t = 0; t < n; ++t) {
        double best = -std::numeric_limits<double>::infinity();
        int arg = -1;
        for (int tau = t - hi; tau <= t - lo; ++tau) {
            if (tau < 0) {
                continue;
            }
            const double ratio = std::log((t - tau) / period);
            const double s = score[static_cast<std::size_t>(tau)] - options.tightness * ratio * ratio;
            if (s > best) {
                best = s;
                arg = tau;
            }
        }
        const double onset = o[static_cast<std::size_t>(t)];
        if (arg >= 0 && best > 0.0) {
            score[static_cast<std::size_t>(t)] = onset + best;
            back[static_cast<std::size_t>(t)] = arg;
        } else {
            score[static_cast<std::size_t>(t)] = onset;
        }
    }
    // Last beat: best score within the final period.
    const int tail = std::max(0, n - static_cast<int>(std::ceil(period)));
    int t = static_cast<int>(std::max_element(score.begin() + tail, score.end()) - score.begin());
    std::vector<int> frames;
    while (t >= 0) {
        frames.push_back(t);
        t = back[static_cast<std::size_t>(t)];
    }
    std::reverse(frames.begin(), frames.end());
    require(!frames.empty(), ErrorCode::kNoBeats, "beat tracker found no beats");

    int loudest = 0;
    for (std::size_t i = 0; i < frames.size(); ++i) {
        grid.beat_times.push_back(env.time_of(frames[i]));
        if (o[static_cast<std::size_t>(frames[i])] > o[static_cast<std::size_t>(frames[static_cast<std::size_t>(loudest)])]) {
            loudest = static_cast<int>(i);
        }
    }
    for (int i = loudest % 4; i < static_cast<int>(frames.size()); i += 4) {
        grid.downbeat_indices.push_back(i);
    }
    return grid;
}

}  // namespace teadapter::features

// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#include "features/melody.hpp"

#include <algorithm>
#include <numeric>

#include "common/error.hpp"

namespace teadapter::features {
namespace {

// Largest odd value <= limit, at least 1.
int fit_odd(int requested, int limit) {
    int k = std::min(requested, limit);
    if (k % 2 == 0) {
        --k;
    }
    return std::max(k, 1);
}

struct GatedChroma {
    dsp::Chromagram raw;       // normalized, before smoothing
    dsp::Chromagram smoothed;
    std::vector<bool> voiced;
};

GatedChroma analyze(const dsp::AudioClip& input, const MelodyOptions& options) {
    dsp::validate(input);
    const dsp::AudioClip clip =
        input.sample_rate == dsp::kDefaultSampleRate ? input : dsp::resample_linear(input, dsp::kDefaultSampleRate);
    dsp::StftOptions stft_options;
    stft_options.window_size = options.window_size;
    stft_options.hop_size = options.hop_size;
    dsp::Spectrogram spec = dsp::stft(clip, stft_options);

    const int harm = fit_odd(options.harm_kernel, spec.frames);
    if (harm >= 3) {
        spec = dsp::hpss(spec, harm, options.perc_kernel).first;
    }
    dsp::Chromagram chroma = dsp::chromagram_from_spectrogram(spec);

    std::vector<double> l1(static_cast<std::size_t>(chroma.frames()));
    for (int f = 0; f < chroma.frames(); ++f) {
        const auto& e = chroma.energies[static_cast<std::size_t>(f)];
        l1[static_cast<std::size_t>(f)] = std::accumulate(e.begin(), e.end(), 0.0);
    }
    const double loudest = l1.empty() ? 0.0 : *std::max_element(l1.begin(), l1.end());
    GatedChroma out;
    out.voiced.resize(l1.size());
    for (int f = 0; f < chroma.frames(); ++f) {
        const bool voiced = loudest > 0.0 && l1[static_cast<std::size_t>(f)] >= options.silence_ratio * loudest;
        out.voiced[static_cast<std::size_t>(f)] = voiced;
        if (!voiced) {
            chroma.energies[static_cast<std::size_t>(f)].fill(0.0);
        }
    }
    out.raw = dsp::max_normalize(chroma);
    chroma = dsp::nn_smooth(out.raw, std::min(options.nn_neighbors, chroma.frames()));
    out.smoothed = dsp::median_smooth_time(chroma, fit_odd(options.median_width, chroma.frames()));
    for (int f = 0; f < chroma.frames(); ++f) {
        if (!out.voiced[static_cast<std::size_t>(f)]) {
            out.smoothed.energies[static_cast<std::size_t>(f)].fill(0.0);
        }
    }
    return out;
}

int argmax(const dsp::ChromaFrame& frame) {
    return static_cast<int>(std::max_element(frame.begin(), frame.end()) - frame.begin());
}

}  // namespace

int MelodyTrack::voiced_frames() const {
    return static_cast<int>(std::count_if(classes.begin(), classes.end(), [](int c) { return c != kRest; }));
}

dsp::Chromagram melody_chroma(const dsp::AudioClip& clip, const MelodyOptions& options) {
    return analyze(clip, options).smoothed;
}

MelodyTrack extract_melody(const dsp::AudioClip& clip, const MelodyOptions& options) {
    const GatedChroma chroma = analyze(clip, options);
    MelodyTrack track;
    track.hop_size = chroma.smoothed.hop_size;
    track.sample_rate = chroma.smoothed.sample_rate;
    track.classes.reserve(chroma.voiced.size());
    for (std::size_t f = 0; f < chroma.voiced.size(); ++f) {
        if (!chroma.voiced[f]) {
            track.classes.push_back(kRest);
            continue;
        }
        // Smoothing can empty a voiced frame that sits among REST frames.
        const auto& smoothed = chroma.smoothed.energies[f];
        const bool empty = *std::max_element(smoothed.begin(), smoothed.end()) <= 0.0;
        track.classes.push_back(argmax(empty ? chroma.raw.energies[f] : smoothed));
    }
    return track;
}

}  // namespace teadapter::features

// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0
//
// Fixtures shared by the unit tests.

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "common/error.hpp"
#include "common/rng.hpp"
#include "dsp/audio.hpp"

namespace teadapter::testing {

// Code of the teadapter::Error thrown by `fn`, or kOk if none is thrown.
inline ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::kOk;
}

inline dsp::AudioClip sine(double hz, double seconds, double amplitude = 0.5, double rate = 16000.0) {
    dsp::AudioClip clip;
    clip.sample_rate = rate;
    clip.samples.resize(static_cast<std::size_t>(std::llround(seconds * rate)));
    for (std::size_t i = 0; i < clip.samples.size(); ++i) {
        clip.samples[i] = amplitude * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / rate);
    }
    return clip;
}

// 10 ms decaying noise bursts at the given times.
inline dsp::AudioClip clicks(const std::vector<double>& times, double seconds, double rate = 16000.0,
                             std::uint64_t seed = 1) {
    dsp::AudioClip clip;
    clip.sample_rate = rate;
    clip.samples.assign(static_cast<std::size_t>(std::llround(seconds * rate)), 0.0);
    Rng rng(seed);
    const int len = static_cast<int>(0.01 * rate);
    for (double t : times) {
        const auto start = static_cast<std::size_t>(std::llround(t * rate));
        for (int k = 0; k < len && start + k < clip.samples.size(); ++k) {
            clip.samples[start + k] += 0.8 * std::exp(-k / (0.002 * rate)) * rng.uniform(-1.0, 1.0);
        }
    }
    return clip;
}

inline std::vector<double> regular_times(double start, double period, double end) {
    std::vector<double> t;
    for (double x = start; x < end; x += period) {
        t.push_back(x);
    }
    return t;
}

// Fresh, empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("teadapter-test-" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace teadapter::testing

// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dsp/audio.hpp"
#include "features/melody.hpp"
#include "json.hpp"

namespace teadapter::metrics {

// --- melody accuracy -----------------------------------------------------

// Fraction of voiced reference frames whose pitch class matches. Frame counts
// are truncated to the shorter track; reference REST frames are excluded.
// Throws Undefined when the compared reference range is entirely REST.
double melody_accuracy(const features::MelodyTrack& generated, const features::MelodyTrack& reference);
// Extracts both melodies (clips resampled to 16 kHz if needed) and compares.
double melody_accuracy(const dsp::AudioClip& generated, const dsp::AudioClip& reference);

// --- predominant local pulse --------------------------------------------

struct PlpOptions {
    int onset_window = 512;
    int onset_hop = 128;
    double tempogram_seconds = 4.0;  // Hann window of the local Fourier analysis
    int tempogram_stride = 4;        // frames between analysis centres
    double min_bpm = 40.0;
    double max_bpm = 240.0;
    double bpm_step = 1.0;
    double peak_threshold = 0.1;     // fraction of the curve maximum
};

struct PulseCurve {
    std::vector<double> values;  // half-wave rectified, one per onset frame
    double frame_rate = 0.0;
};

// Onset envelope -> windowed Fourier tempogram -> for every analysis centre,
// a windowed cosine at the dominant tempo with the measured phase ->
// overlap-add -> half-wave rectification, zeroed outside the span of salient
// onsets (>= 10% of the strongest, 50 ms margin). Silence gives an all-zero
// curve.
// Throws TooShort under 2 s.
PulseCurve plp(const dsp::AudioClip& clip, const PlpOptions& options = {});

struct PulsePeak {
    double time = 0.0;      // seconds, parabolic refinement
    double strength = 0.0;  // curve value at the peak frame
};

// Local maxima above peak_threshold * max, in time order.
std::vector<PulsePeak> pulse_peaks(const PulseCurve& curve, const PlpOptions& options = {});

// Downbeats are every fourth peak counted from the strongest one, in both
// directions. Throws InsufficientBeats with fewer than 3 peaks or fewer than
// 2 downbeats.
std::vector<double> downbeat_times(const std::vector<PulsePeak>& peaks);

// Population variance of consecutive downbeat intervals, in s^2.
double beat_stability(const dsp::AudioClip& clip, const PlpOptions& options = {});

// --- aggregation and reports -------------------------------------------

// Streaming mean / population standard deviation (Welford).
class RunningStats {
public:
    void add(double x);
    std::size_t count() const { return n_; }
    double mean() const { return mean_; }
    double variance() const { return n_ > 0 ? m2_ / static_cast<double>(n_) : 0.0; }
    double stdev() const;

private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

struct ClipScore {
    std::string name;
    std::optional<double> melody_accuracy;  // absent when undefined
    std::optional<double> beat_stability;   // absent with too few beats
};

struct Aggregate {
    std::size_t count = 0;
    double mean = 0.0;
    double stdev = 0.0;
};

struct ControllabilityReport {
    std::vector<ClipScore> clips;
    Aggregate melody_accuracy;
    Aggregate beat_stability;
};

ClipScore score_clip(const std::string& name, const dsp::AudioClip& generated, const dsp::AudioClip& reference);
// Aggregates over the clips that have each value.
ControllabilityReport make_report(std::vector<ClipScore> clips);

// "report/v1".
nlohmann::json to_json(const ControllabilityReport& report);
ControllabilityReport report_from_json(const nlohmann::json& j);
// name,melody_accuracy,beat_stability with empty cells for absent values.
std::string to_csv(const ControllabilityReport& report);

}  // namespace teadapter::metrics

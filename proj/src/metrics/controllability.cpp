// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#include "metrics/controllability.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "common/error.hpp"
#include "features/beats.hpp"

namespace teadapter::metrics {
namespace {

constexpr double kMinDuration = 2.0;
constexpr double kActiveOnsetRatio = 0.1;
constexpr double kSupportMarginSeconds = 0.05;

dsp::AudioClip at_default_rate(const dsp::AudioClip& clip) {
    dsp::validate(clip);
    return clip.sample_rate == dsp::kDefaultSampleRate ? clip : dsp::resample_linear(clip, dsp::kDefaultSampleRate);
}

}  // namespace

double melody_accuracy(const features::MelodyTrack& generated, const features::MelodyTrack& reference) {
    const int frames = std::min(generated.frames(), reference.frames());
    int voiced = 0;
    int matched = 0;
    for (int f = 0; f < frames; ++f) {
        const int ref = reference.classes[static_cast<std::size_t>(f)];
        if (ref == features::kRest) {
            continue;
        }
        ++voiced;
        matched += generated.classes[static_cast<std::size_t>(f)] == ref ? 1 : 0;
    }
    require(voiced > 0, ErrorCode::kUndefined, "reference melody has no voiced frames");
    return static_cast<double>(matched) / voiced;
}

double melody_accuracy(const dsp::AudioClip& generated, const dsp::AudioClip& reference) {
    return melody_accuracy(features::extract_melody(at_default_rate(generated)),
                           features::extract_melody(at_default_rate(reference)));
}

PulseCurve plp(const dsp::AudioClip& input, const PlpOptions& options) {
    dsp::validate(input);
    require(input.duration() >= kMinDuration, ErrorCode::kTooShort, "PLP needs at least 2 s of audio");
    require(options.min_bpm > 0.0 && options.max_bpm > options.min_bpm && options.bpm_step > 0.0 &&
                options.tempogram_stride >= 1 && options.tempogram_seconds > 0.0,
            ErrorCode::kInvalidArgument, "bad PLP options");
    const features::OnsetEnvelope env = features::onset_envelope(input, options.onset_window, options.onset_hop);
    const int n = static_cast<int>(env.values.size());
    PulseCurve curve;
    curve.frame_rate = env.frame_rate;
    curve.values.assign(static_cast<std::size_t>(n), 0.0);

    const int half = std::max(1, static_cast<int>(std::lround(options.tempogram_seconds * env.frame_rate / 2.0)));
    std::vector<double> window(static_cast<std::size_t>(2 * half + 1));
    for (int k = -half; k <= half; ++k) {
        window[static_cast<std::size_t>(k + half)] = 0.5 + 0.5 * std::cos(std::numbers::pi * k / (half + 1));
    }
    std::vector<double> omegas;  // radians per frame
    for (double bpm = options.min_bpm; bpm <= options.max_bpm + 1e-9; bpm += options.bpm_step) {
        omegas.push_back(2.0 * std::numbers::pi * bpm / 60.0 / env.frame_rate);
    }
    std::vector<double> norm(static_cast<std::size_t>(n), 0.0);
    for (int centre = 0; centre < n; centre += options.tempogram_stride) {
        const int lo = std::max(0, centre - half);
        const int hi = std::min(n - 1, centre + half);
        double best_mag = 0.0;
        double best_omega = 0.0;
        double best_phase = 0.0;
        for (double omega : omegas) {
            std::complex<double> acc{};
            for (int m = lo; m <= hi; ++m) {
                const double v = env.values[static_cast<std::size_t>(m)];
                if (v != 0.0) {
                    acc += v * window[static_cast<std::size_t>(m - centre + half)] *
                           std::polar(1.0, -omega * m);
                }
            }
            const double mag = std::abs(acc);
            if (mag > best_mag) {
                best_mag = mag;
                best_omega = omega;
                best_phase = std::arg(acc);
            }
        }
        for (int m = lo; m <= hi; ++m) {
            const double w = window[static_cast<std::size_t>(m - centre + half)];
            norm[static_cast<std::size_t>(m)] += w;
            if (best_mag > 0.0) {
                curve.values[static_cast<std::size_t>(m)] += w * std::cos(best_omega * m + best_phase);
            }
        }
    }
    // The pulse is only meaningful where there are onsets; beyond the first
    // and last salient onset it would extrapolate beats into silence.
    const double onset_top = n > 0 ? *std::max_element(env.values.begin(), env.values.end()) : 0.0;
    int first = n, last = -1;
    for (int m = 0; m < n; ++m) {
        if (onset_top > 0.0 && env.values[static_cast<std::size_t>(m)] >= kActiveOnsetRatio * onset_top) {
            first = std::min(first, m);
            last = m;
        }
    }
    const int margin = static_cast<int>(std::lround(kSupportMarginSeconds * env.frame_rate));
    for (int m = 0; m < n; ++m) {
        if (m < first - margin || m > last + margin) {
            curve.values[static_cast<std::size_t>(m)] = 0.0;
            continue;
        }
        const double v = norm[static_cast<std::size_t>(m)] > 0.0 ? curve.values[static_cast<std::size_t>(m)] /
                                                                        norm[static_cast<std::size_t>(m)]
                                                                  : 0.0;
        curve.values[static_cast<std::size_t>(m)] = std::max(0.0, v);
    }
    return curve;
}

std::vector<PulsePeak> pulse_peaks(const PulseCurve& curve, const PlpOptions& options) {
    const auto& v = curve.values;
    std::vector<PulsePeak> peaks;
    if (v.size() < 3) {
        return peaks;
    }
    const double top = *std::max_element(v.begin(), v.end());
    if (top <= 0.0) {
        return peaks;
    }
    const double threshold = options.peak_threshold * top;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
        if (v[i] > threshold && v[i] > v[i - 1] && v[i] >= v[i + 1]) {
            const double a = v[i - 1], b = v[i], c = v[i + 1];
            const double denom = a - 2.0 * b + c;
            const double shift = denom < 0.0 ? std::clamp(0.5 * (a - c) / denom, -0.5, 0.5) : 0.0;
            peaks.push_back({(static_cast<double>(i) + shift) / curve.frame_rate, b});
        }
    }
    return peaks;
}

std::vector<double> downbeat_times(const std::vector<PulsePeak>& peaks) {
    require(peaks.size() >= 3, ErrorCode::kInsufficientBeats,
            "beat stability needs at least 3 pulse peaks, found " + std::to_string(peaks.size()));
    std::size_t strongest = 0;
    for (std::size_t i = 1; i < peaks.size(); ++i) {
        if (peaks[i].strength > peaks[strongest].strength) {
            strongest = i;
        }
    }
    std::vector<double> times;
    for (std::size_t i = strongest % 4; i < peaks.size(); i += 4) {
        times.push_back(peaks[i].time);
    }
    require(times.size() >= 2, ErrorCode::kInsufficientBeats, "fewer than 2 downbeats in the clip");
    return times;
}

double beat_stability(const dsp::AudioClip& clip, const PlpOptions& options) {
    const std::vector<double> downbeats = downbeat_times(pulse_peaks(plp(clip, options), options));
    RunningStats stats;
    for (std::size_t i = 1; i < downbeats.size(); ++i) {
        stats.add(downbeats[i] - downbeats[i - 1]);
    }
    return stats.variance();
}

void RunningStats::add(double x) {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
}

double RunningStats::stdev() const { return std::sqrt(variance()); }

ClipScore score_clip(const std::string& name, const dsp::AudioClip& generated, const dsp::AudioClip& reference) {
    ClipScore score;
    score.name = name;
    try {
        score.melody_accuracy = melody_accuracy(generated, reference);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::kUndefined) {
            throw;
        }
    }
    try {
        score.beat_stability = beat_stability(generated);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::kInsufficientBeats) {
            throw;
        }
    }
    return score;
}

ControllabilityReport make_report(std::vector<ClipScore> clips) {
    ControllabilityReport report;
    report.clips = std::move(clips);
    RunningStats melody, beats;
    for (const auto& c : report.clips) {
        if (c.melody_accuracy) {
            melody.add(*c.melody_accuracy);
        }
        if (c.beat_stability) {
            beats.add(*c.beat_stability);
        }
    }
    report.melody_accuracy = {melody.count(), melody.mean(), melody.stdev()};
    report.beat_stability = {beats.count(), beats.mean(), beats.stdev()};
    return report;
}

namespace {

nlohmann::json optional_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); }

nlohmann::json aggregate_json(const Aggregate& a) {
    return {{"count", a.count}, {"mean", a.mean}, {"std", a.stdev}};
}

Aggregate aggregate_from_json(const nlohmann::json& j) {
    Aggregate a;
    a.count = j.at("count").get<std::size_t>();
    a.mean = j.at("mean").get<double>();
    a.stdev = j.at("std").get<double>();
    require(a.stdev >= 0.0, ErrorCode::kSchemaError, "aggregate std must be non-negative");
    return a;
}

std::optional<double> optional_from_json(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) {
        return std::nullopt;
    }
    return j.at(key).get<double>();
}

}  // namespace

nlohmann::json to_json(const ControllabilityReport& report) {
    nlohmann::json clips = nlohmann::json::array();
    for (const auto& c : report.clips) {
        clips.push_back({{"name", c.name},
                         {"melody_accuracy", optional_json(c.melody_accuracy)},
                         {"beat_stability", optional_json(c.beat_stability)}});
    }
    return {{"schema", "report/v1"},
            {"clips", clips},
            {"melody_accuracy", aggregate_json(report.melody_accuracy)},
            {"beat_stability", aggregate_json(report.beat_stability)}};
}

ControllabilityReport report_from_json(const nlohmann::json& j) {
    try {
        require(j.is_object() && j.value("schema", "") == "report/v1", ErrorCode::kSchemaError,
                "expected a report/v1 document");
        ControllabilityReport r;
        for (const auto& cj : j.at("clips")) {
            ClipScore c;
            c.name = cj.at("name").get<std::string>();
            c.melody_accuracy = optional_from_json(cj, "melody_accuracy");
            c.beat_stability = optional_from_json(cj, "beat_stability");
            require(!c.melody_accuracy || (*c.melody_accuracy >= 0.0 && *c.melody_accuracy <= 1.0),
                    ErrorCode::kSchemaError, "melody accuracy outside [0, 1]");
            require(!c.beat_stability || *c.beat_stability >= 0.0, ErrorCode::kSchemaError,
                    "beat stability must be non-negative");
            r.clips.push_back(c);
        }
        r.melody_accuracy = aggregate_from_json(j.at("melody_accuracy"));
        r.beat_stability = aggregate_from_json(j.at("beat_stability"));
        return r;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::kSchemaError, std::string("malformed report: ") + e.what());
    }
}

std::string to_csv(const ControllabilityReport& report) {
    std::ostringstream out;
    out << std::setprecision(17) << "name,melody_accuracy,beat_stability\n";
    for (const auto& c : report.clips) {
        out << c.name << ',';
        if (c.melody_accuracy) {
            out << *c.melody_accuracy;
        }
        out << ',';
        if (c.beat_stability) {
            out << *c.beat_stability;
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace teadapter::metrics

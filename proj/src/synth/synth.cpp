// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#include "synth/synth.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <set>

#include "common/error.hpp"

namespace teadapter::synth {
namespace {

double envelope(double t, double duration, Adsr adsr) {
    // Compress the stages proportionally when the note is too short for them.
    const double total = adsr.attack + adsr.decay + adsr.release;
    if (total > duration && total > 0.0) {
        const double s = duration / total;
        adsr.attack *= s;
        adsr.decay *= s;
        adsr.release *= s;
    }
    const double release_start = duration - adsr.release;
    double level = adsr.sustain;
    if (t < adsr.attack) {
        level = t / adsr.attack;
    } else if (t < adsr.attack + adsr.decay) {
        level = 1.0 - (1.0 - adsr.sustain) * (t - adsr.attack) / adsr.decay;
    }
    if (t >= release_start && adsr.release > 0.0) {
        level *= std::max(0.0, (duration - t) / adsr.release);
    }
    return level;
}

// Raw additive tone, not normalized.
std::vector<double> tone(double f0, std::size_t count, double sample_rate, const TimbreProfile& profile) {
    std::vector<double> out(count, 0.0);
    const double duration = static_cast<double>(count) / sample_rate;
    for (std::size_t h = 0; h < profile.harmonic_amps.size(); ++h) {
        const double f = f0 * static_cast<double>(h + 1);
        const double amp = profile.harmonic_amps[h];
        if (f >= sample_rate / 2.0 || amp == 0.0) {
            continue;
        }
        const double w = 2.0 * std::numbers::pi * f / sample_rate;
        for (std::size_t i = 0; i < count; ++i) {
            out[i] += amp * std::sin(w * static_cast<double>(i));
        }
    }
    for (std::size_t i = 0; i < count; ++i) {
        out[i] *= envelope(static_cast<double>(i) / sample_rate, duration, profile.adsr);
    }
    return out;
}

void normalize_peak(std::vector<double>& samples, double level) {
    double mx = 0.0;
    for (double s : samples) {
        mx = std::max(mx, std::abs(s));
    }
    if (mx > 0.0) {
        for (auto& s : samples) {
            s *= level / mx;
        }
    }
}

int edit_distance(const std::string& a, const std::string& b) {
    std::vector<int> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) {
        row[j] = static_cast<int>(j);
    }
    for (std::size_t i = 1; i <= a.size(); ++i) {
        int diag = row[0];
        row[0] = static_cast<int>(i);
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const int up = row[j];
            row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
            diag = up;
        }
    }
    return row[b.size()];
}

std::string lowercase(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::size_t samples_for(double seconds, double sample_rate) {
    return static_cast<std::size_t>(std::llround(seconds * sample_rate));
}

}  // namespace

TimbreProfile make_profile(std::string name, std::vector<double> amps, Adsr adsr) {
    require(!amps.empty(), ErrorCode::kInvalidArgument, "profile needs at least one partial");
    double mx = 0.0;
    for (double a : amps) {
        require(std::isfinite(a) && a >= 0.0, ErrorCode::kInvalidArgument, "partial amplitudes must be >= 0");
        mx = std::max(mx, a);
    }
    require(mx > 0.0, ErrorCode::kInvalidArgument, "profile has no energy");
    for (auto& a : amps) {
        a /= mx;
    }
    require(adsr.attack >= 0.0 && adsr.decay >= 0.0 && adsr.release >= 0.0, ErrorCode::kInvalidArgument,
            "ADSR times must be >= 0");
    require(adsr.sustain >= 0.0 && adsr.sustain <= 1.0, ErrorCode::kInvalidArgument, "sustain must be in [0, 1]");
    return TimbreProfile{std::move(name), std::move(amps), adsr};
}

const std::vector<TimbreProfile>& builtin_profiles() {
    static const std::vector<TimbreProfile> profiles = {
        make_profile("sine", {1.0}, {0.01, 0.0, 1.0, 0.02}),
        make_profile("piano", {1.0, 0.5, 0.3, 0.2, 0.1, 0.05}, {0.005, 0.4, 0.35, 0.05}),
        make_profile("violin", {1.0, 0.3, 0.6, 0.2, 0.4, 0.1, 0.25}, {0.06, 0.1, 0.85, 0.08}),
        make_profile("ukulele", {1.0, 0.7, 0.5, 0.35, 0.2, 0.1}, {0.003, 0.25, 0.2, 0.04}),
    };
    return profiles;
}

const TimbreProfile& builtin_profile(const std::string& name) {
    for (const auto& p : builtin_profiles()) {
        if (p.name == name) {
            return p;
        }
    }
    fail(ErrorCode::kInvalidArgument, "no built-in profile named '" + name + "'");
}

const TimbreProfile& profile_for_label(const std::string& label) {
    static const std::vector<std::pair<std::string, std::string>> aliases = {
        {"keyboard", "piano"}, {"keys", "piano"},       {"electric piano", "piano"}, {"organ", "piano"},
        {"cello", "violin"},   {"viola", "violin"},     {"strings", "violin"},       {"fiddle", "violin"},
        {"guitar", "ukulele"}, {"mandolin", "ukulele"}, {"banjo", "ukulele"},        {"harp", "ukulele"},
        {"flute", "sine"},     {"synthesizer", "sine"}, {"voice", "sine"},
    };
    const std::string key = lowercase(label);
    int best = 1 << 30;
    std::string target = "sine";
    for (const auto& p : builtin_profiles()) {
        const int d = edit_distance(key, p.name);
        if (d < best) {
            best = d;
            target = p.name;
        }
    }
    for (const auto& [alias, name] : aliases) {
        const int d = edit_distance(key, alias);
        if (d < best) {
            best = d;
            target = name;
        }
    }
    return builtin_profile(target);
}

TimbreProfile profile_from_json(const nlohmann::json& j) {
    try {
        Adsr adsr;
        const auto& a = j.at("adsr");
        adsr.attack = a.at("attack").get<double>();
        adsr.decay = a.at("decay").get<double>();
        adsr.sustain = a.at("sustain").get<double>();
        adsr.release = a.at("release").get<double>();
        return make_profile(j.at("name").get<std::string>(), j.at("harmonic_amps").get<std::vector<double>>(), adsr);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::kSchemaError, std::string("bad timbre profile: ") + e.what());
    }
}

nlohmann::json to_json(const TimbreProfile& p) {
    return {{"name", p.name},
            {"harmonic_amps", p.harmonic_amps},
            {"adsr",
             {{"attack", p.adsr.attack}, {"decay", p.adsr.decay}, {"sustain", p.adsr.sustain}, {"release", p.adsr.release}}}};
}

const InstrumentLabel& InstrumentLabelSet::primary() const {
    require(!labels.empty(), ErrorCode::kInvalidArgument, "label set is empty");
    const InstrumentLabel* best = &labels.front();
    for (const auto& l : labels) {
        if (l.confidence > best->confidence) {
            best = &l;
        }
    }
    return *best;
}

InstrumentLabelSet labels_from_json(const nlohmann::json& j) {
    require(j.is_object() && j.contains("labels") && j["labels"].is_array(), ErrorCode::kSchemaError,
            "instrument labels must be {\"labels\": [...]}");
    InstrumentLabelSet set;
    std::set<std::string> seen;
    for (const auto& item : j["labels"]) {
        require(item.contains("name") && item["name"].is_string() && item.contains("confidence") &&
                    item["confidence"].is_number(),
                ErrorCode::kSchemaError, "each label needs a name and a numeric confidence");
        InstrumentLabel label{item["name"].get<std::string>(), item["confidence"].get<double>()};
        require(std::isfinite(label.confidence), ErrorCode::kSchemaError, "label confidence must be finite");
        require(seen.insert(label.name).second, ErrorCode::kSchemaError, "duplicate instrument label '" + label.name + "'");
        set.labels.push_back(std::move(label));
    }
    return set;
}

double midi_to_hz(int midi) { return 440.0 * std::pow(2.0, (midi - 69) / 12.0); }

int midi_number(int pitch_class, int octave) { return 12 * (octave + 1) + pitch_class; }

dsp::AudioClip synthesize_note(int pitch_class, int octave, double duration, const TimbreProfile& profile,
                               double sample_rate) {
    require(pitch_class >= 0 && pitch_class < 12, ErrorCode::kInvalidArgument, "pitch class must be in 0..11");
    require(duration > 0.0 && std::isfinite(duration), ErrorCode::kInvalidArgument, "note duration must be positive");
    require(sample_rate > 0.0, ErrorCode::kInvalidArgument, "sample rate must be positive");
    const double f0 = midi_to_hz(midi_number(pitch_class, octave));
    require(f0 >= 30.0 && f0 <= 4000.0, ErrorCode::kPitchOutOfRange,
            "f0 " + std::to_string(f0) + " Hz is outside [30, 4000]");
    dsp::AudioClip clip;
    clip.sample_rate = sample_rate;
    clip.samples = tone(f0, std::max<std::size_t>(1, samples_for(duration, sample_rate)), sample_rate, profile);
    normalize_peak(clip.samples, kPeakLevel);
    return clip;
}

dsp::AudioClip render_melody(const features::MelodyTrack& track, const TimbreProfile& profile) {
    require(!track.classes.empty(), ErrorCode::kEmptyInput, "melody track is empty");
    const double hop_s = track.hop_size / track.sample_rate;
    dsp::AudioClip out;
    out.sample_rate = track.sample_rate;
    out.samples.assign(static_cast<std::size_t>(track.frames()) * static_cast<std::size_t>(track.hop_size), 0.0);
    int start = 0;
    while (start < track.frames()) {
        int end = start;
        while (end < track.frames() && track.classes[static_cast<std::size_t>(end)] == track.classes[static_cast<std::size_t>(start)]) {
            ++end;
        }
        const int pc = track.classes[static_cast<std::size_t>(start)];
        if (pc != features::kRest) {
            const auto note = synthesize_note(pc, kMelodyOctave, (end - start) * hop_s, profile, track.sample_rate);
            const std::size_t offset = static_cast<std::size_t>(start) * static_cast<std::size_t>(track.hop_size);
            for (std::size_t i = 0; i < note.samples.size() && offset + i < out.samples.size(); ++i) {
                out.samples[offset + i] = note.samples[i];
            }
        }
        start = end;
    }
    return out;
}

dsp::AudioClip render_chords(const features::ChordProgression& prog, const TimbreProfile& profile, double sample_rate) {
    require(!prog.entries.empty(), ErrorCode::kEmptyInput, "chord progression is empty");
    double end = 0.0;
    for (const auto& e : prog.entries) {
        end = std::max(end, e.start + e.duration);
    }
    dsp::AudioClip out;
    out.sample_rate = sample_rate;
    out.samples.assign(samples_for(end, sample_rate), 0.0);
    for (const auto& e : prog.entries) {
        const std::size_t count = std::max<std::size_t>(1, samples_for(e.duration, sample_rate));
        const int root = midi_number(e.root, kChordOctave);
        const int third = root + (e.quality == features::ChordQuality::kMajor ? 4 : 3);
        std::vector<double> bar(count, 0.0);
        for (int midi : {root, third, root + 7}) {
            const auto t = tone(midi_to_hz(midi), count, sample_rate, profile);
            for (std::size_t i = 0; i < count; ++i) {
                bar[i] += t[i];
            }
        }
        normalize_peak(bar, kPeakLevel);
        const std::size_t offset = samples_for(e.start, sample_rate);
        for (std::size_t i = 0; i < count && offset + i < out.samples.size(); ++i) {
            out.samples[offset + i] = bar[i];
        }
    }
    return out;
}

}  // namespace teadapter::synth

// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#include "synth/corpus.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "common/error.hpp"
#include "common/rng.hpp"
#include "synth/synth.hpp"

namespace teadapter::synth {
namespace {

constexpr std::array<int, 7> kMajorScale = {0, 2, 4, 5, 7, 9, 11};
constexpr std::array<int, 7> kMinorScale = {0, 2, 3, 5, 7, 8, 10};
constexpr std::array<const char*, 5> kGenres = {"pop", "rock", "folk", "jazz", "electronic"};

// Scale-degree loops (0-based degrees).
constexpr std::array<std::array<int, 4>, 5> kLoops = {{
    {0, 4, 5, 3},
    {0, 5, 3, 4},
    {0, 3, 4, 0},
    {5, 3, 0, 4},
    {0, 3, 0, 4},
}};

void mix_into(std::vector<double>& out, const std::vector<double>& src, std::size_t offset, double gain) {
    for (std::size_t i = 0; i < src.size() && offset + i < out.size(); ++i) {
        out[offset + i] += gain * src[i];
    }
}

std::vector<double> drum_hit(bool kick, double sample_rate, Rng& rng) {
    const std::size_t n = static_cast<std::size_t>((kick ? 0.12 : 0.04) * sample_rate);
    std::vector<double> hit(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / sample_rate;
        const double env = std::exp(-t / (kick ? 0.03 : 0.008));
        hit[i] = kick ? env * std::sin(2.0 * std::numbers::pi * (50.0 + 60.0 * std::exp(-t / 0.02)) * t)
                      : env * (2.0 * rng.uniform() - 1.0);
    }
    return hit;
}

}  // namespace

std::string section_name(Section section) {
    switch (section) {
        case Section::kIntro: return "intro";
        case Section::kChorus: return "chorus";
        case Section::kOutro: return "outro";
        case Section::kGeneric: return "generic";
    }
    return "generic";
}

Section parse_section(const std::string& name) {
    for (Section s : {Section::kIntro, Section::kChorus, Section::kOutro, Section::kGeneric}) {
        if (name == section_name(s)) {
            return s;
        }
    }
    fail(ErrorCode::kInvalidArgument, "unknown section '" + name + "'");
}

SyntheticPiece synthesize_piece(const PieceOptions& options, std::uint64_t seed) {
    require(options.duration > 0.0, ErrorCode::kInvalidArgument, "piece duration must be positive");
    Rng rng(seed);
    SyntheticPiece piece;
    piece.section = options.section;
    piece.tempo_bpm = rng.uniform_int(80, 140);
    piece.major = rng.uniform() < 0.5;
    piece.genre = kGenres[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(kGenres.size()) - 1))];
    const auto& profiles = builtin_profiles();
    piece.instrument = options.instrument.empty()
                           ? profiles[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(profiles.size()) - 1))].name
                           : profile_for_label(options.instrument).name;
    const TimbreProfile& lead = builtin_profile(piece.instrument);
    const TimbreProfile& pad = builtin_profile(piece.instrument == "piano" ? "ukulele" : "piano");

    const int key = rng.uniform_int(0, 11);
    const auto& scale = piece.major ? kMajorScale : kMinorScale;
    const auto& loop = kLoops[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(kLoops.size()) - 1))];
    const double sr = options.sample_rate;
    const double beat = 60.0 / piece.tempo_bpm;
    const double bar = 4.0 * beat;
    const std::size_t total = static_cast<std::size_t>(std::llround(options.duration * sr));

    for (double t = 0.0; t < options.duration - 1e-9; t += beat) {
        piece.beats.beat_times.push_back(t);
    }
    for (std::size_t i = 0; i < piece.beats.beat_times.size(); i += 4) {
        piece.beats.downbeat_indices.push_back(static_cast<int>(i));
    }
    piece.beats.tempo_bpm = piece.tempo_bpm;

    // Chords: one diatonic triad per bar.
    const int bars = static_cast<int>(std::ceil(options.duration / bar));
    for (int b = 0; b < bars; ++b) {
        const int degree = loop[static_cast<std::size_t>(b % 4)];
        const int root = (key + scale[static_cast<std::size_t>(degree)]) % 12;
        const int third = (scale[static_cast<std::size_t>((degree + 2) % 7)] - scale[static_cast<std::size_t>(degree)] + 12) % 12;
        features::ChordEntry e;
        e.bar_index = b;
        e.start = b * bar;
        e.duration = std::min(bar, options.duration - e.start);
        e.root = root;
        e.quality = third == 4 ? features::ChordQuality::kMajor : features::ChordQuality::kMinor;
        if (e.duration > 0.0) {
            piece.chords.entries.push_back(e);
        }
    }

    // Melody: notes of one or two beats drawn from the scale, leaning on
    // chord tones on downbeats and moving by small steps otherwise.
    std::vector<double> melody(total, 0.0);
    std::vector<std::pair<double, int>> notes;  // (start time, pitch class)
    int degree = rng.uniform_int(0, 6);
    for (double t = 0.0; t < options.duration - 1e-9;) {
        const double len = std::min((rng.uniform() < 0.5 ? 1.0 : 2.0) * beat, options.duration - t);
        const int bar_index = static_cast<int>(t / bar);
        if (std::fmod(t, bar) < 1e-9) {
            const int chord_degree = loop[static_cast<std::size_t>(bar_index % 4)];
            degree = (chord_degree + 2 * rng.uniform_int(0, 2)) % 7;
        } else {
            degree = std::clamp(degree + rng.uniform_int(-2, 2), 0, 6);
        }
        const int pc = (key + scale[static_cast<std::size_t>(degree)]) % 12;
        const auto note = synthesize_note(pc, kMelodyOctave, len, lead, sr);
        mix_into(melody, note.samples, static_cast<std::size_t>(std::llround(t * sr)), 1.0);
        notes.emplace_back(t, pc);
        t += len;
    }
    const auto chords = render_chords(piece.chords, pad, sr);

    std::vector<double> drums(total, 0.0);
    if (options.drums) {
        for (std::size_t i = 0; i < piece.beats.beat_times.size(); ++i) {
            const auto offset = static_cast<std::size_t>(std::llround(piece.beats.beat_times[i] * sr));
            mix_into(drums, drum_hit(i % 2 == 0, sr, rng), offset, i % 4 == 0 ? 1.0 : 0.6);
        }
    }

    piece.mix.sample_rate = sr;
    piece.mix.samples.assign(total, 0.0);
    for (std::size_t i = 0; i < total; ++i) {
        const double t = static_cast<double>(i) / sr;
        const double u = t / options.duration;
        double gain = 1.0;
        double drum_gain = 1.0;
        if (options.section == Section::kIntro) {
            gain = 0.25 + 0.75 * u;
            drum_gain = u < 0.5 ? 0.0 : 1.0;
        } else if (options.section == Section::kOutro) {
            gain = std::max(0.05, 1.0 - 0.95 * u);
            drum_gain = u < 0.5 ? 1.0 : 0.0;
        }
        const double c = i < chords.samples.size() ? chords.samples[i] : 0.0;
        piece.mix.samples[i] = gain * (melody[i] + 0.3 * c + 0.35 * drum_gain * drums[i]);
    }
    double mx = 0.0;
    for (double s : piece.mix.samples) {
        mx = std::max(mx, std::abs(s));
    }
    if (mx > 0.0) {
        const double level = options.section == Section::kChorus || options.section == Section::kGeneric ? kPeakLevel : 0.6;
        for (auto& s : piece.mix.samples) {
            s *= level / mx;
        }
    }

    // Ground-truth melody on the chroma frame grid (frame centres).
    const int frames = static_cast<int>(1 + total / dsp::kDefaultChromaHop);
    piece.melody.hop_size = dsp::kDefaultChromaHop;
    piece.melody.sample_rate = sr;
    piece.melody.classes.assign(static_cast<std::size_t>(frames), features::kRest);
    for (int f = 0; f < frames; ++f) {
        const double t = f * static_cast<double>(dsp::kDefaultChromaHop) / sr;
        for (const auto& [start, pc] : notes) {
            if (start <= t) {
                piece.melody.classes[static_cast<std::size_t>(f)] = pc;
            }
        }
    }
    piece.caption = "generate a " + piece.genre + " music with " + piece.instrument;
    if (options.section != Section::kGeneric) {
        piece.caption += ", " + section_name(options.section);
    }
    return piece;
}

}  // namespace teadapter::synth

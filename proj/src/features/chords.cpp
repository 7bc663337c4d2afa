// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#include "features/chords.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "common/error.hpp"

namespace teadapter::features {
namespace {

constexpr std::array<const char*, 12> kNames = {"C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B"};

double pearson(const std::array<double, 12>& a, const std::array<double, 12>& b) {
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / 12.0;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / 12.0;
    double num = 0.0, da = 0.0, db = 0.0;
    for (int i = 0; i < 12; ++i) {
        const double x = a[static_cast<std::size_t>(i)] - ma;
        const double y = b[static_cast<std::size_t>(i)] - mb;
        num += x * y;
        da += x * x;
        db += y * y;
    }
    return num / std::sqrt(da * db);
}

}  // namespace

std::string pitch_class_name(int pc) {
    require(pc >= 0 && pc < 12, ErrorCode::kInvalidArgument, "pitch class out of range");
    return kNames[static_cast<std::size_t>(pc)];
}

std::string quality_name(ChordQuality quality) { return quality == ChordQuality::kMajor ? "MAJ" : "MIN"; }

std::string chord_name(int root, ChordQuality quality) { return pitch_class_name(root) + ":" + quality_name(quality); }

ChordQuality parse_quality(const std::string& name) {
    if (name == "MAJ") {
        return ChordQuality::kMajor;
    }
    if (name == "MIN") {
        return ChordQuality::kMinor;
    }
    fail(ErrorCode::kSchemaError, "unknown chord quality '" + name + "'");
}

int parse_pitch_class(const std::string& name) {
    for (std::size_t i = 0; i < kNames.size(); ++i) {
        if (name == kNames[i]) {
            return static_cast<int>(i);
        }
    }
    fail(ErrorCode::kSchemaError, "unknown pitch class '" + name + "'");
}

std::array<double, 12> triad_template(int root, ChordQuality quality) {
    std::array<double, 12> t{};
    const int third = quality == ChordQuality::kMajor ? 4 : 3;
    for (int step : {0, third, 7}) {
        t[static_cast<std::size_t>((root + step) % 12)] = 1.0;
    }
    return t;
}

bool match_triad(const dsp::ChromaFrame& profile, int& root, ChordQuality& quality) {
    const double mx = *std::max_element(profile.begin(), profile.end());
    const double mn = *std::min_element(profile.begin(), profile.end());
    if (!(mx > mn)) {
        return false;
    }
    double best = -2.0;
    for (int r = 0; r < 12; ++r) {
        for (ChordQuality q : {ChordQuality::kMajor, ChordQuality::kMinor}) {
            const double c = pearson(profile, triad_template(r, q));
            // Strict comparison keeps the earliest candidate on ties.
            if (c > best) {
                best = c;
                root = r;
                quality = q;
            }
        }
    }
    return true;
}

ChordProgression estimate_chords(const dsp::AudioClip& clip, const BeatGrid& grid) {
    dsp::validate(clip);
    require(!grid.downbeat_indices.empty(), ErrorCode::kInvalidArgument, "beat grid has no downbeats");
    const dsp::Chromagram chroma = dsp::chromagram(clip, kChordHop);
    const double frame_period = static_cast<double>(kChordHop) / chroma.sample_rate;
    const double beat = 60.0 / grid.tempo_bpm;

    ChordProgression prog;
    const std::size_t bars = grid.downbeat_indices.size();
    for (std::size_t bar = 0; bar < bars; ++bar) {
        const double start = grid.beat_times.at(static_cast<std::size_t>(grid.downbeat_indices[bar]));
        double end = 0.0;
        if (bar + 1 < bars) {
            end = grid.beat_times.at(static_cast<std::size_t>(grid.downbeat_indices[bar + 1]));
        } else {
            end = std::min(clip.duration(), start + 4.0 * beat);
        }
        dsp::ChromaFrame sum{};
        int used = 0;
        for (int f = 0; f < chroma.frames(); ++f) {
            const double t = f * frame_period;
            if (t >= start && t < end) {
                const auto& e = chroma.energies[static_cast<std::size_t>(f)];
                for (int pc = 0; pc < 12; ++pc) {
                    sum[static_cast<std::size_t>(pc)] += e[static_cast<std::size_t>(pc)];
                }
                ++used;
            }
        }
        ChordEntry entry;
        entry.bar_index = static_cast<int>(bar);
        entry.start = start;
        entry.duration = end - start;
        const double mx = *std::max_element(sum.begin(), sum.end());
        if (used == 0 || !(mx > 0.0) || entry.duration <= 0.0) {
            prog.skipped_bars.push_back(entry.bar_index);
            continue;
        }
        for (auto& v : sum) {
            v /= mx;
        }
        if (!match_triad(sum, entry.root, entry.quality)) {
            prog.skipped_bars.push_back(entry.bar_index);
            continue;
        }
        prog.entries.push_back(entry);
    }
    return prog;
}

}  // namespace teadapter::features

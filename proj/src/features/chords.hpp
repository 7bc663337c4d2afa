// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <string>
#include <vector>

#include "dsp/audio.hpp"
#include "dsp/chroma.hpp"
#include "features/beats.hpp"

namespace teadapter::features {

enum class ChordQuality { kMajor, kMinor };

struct ChordEntry {
    int bar_index = 0;
    double start = 0.0;     // seconds
    double duration = 0.0;  // seconds
    int root = 0;           // 0..11, C = 0
    ChordQuality quality = ChordQuality::kMajor;
};

struct ChordProgression {
    std::vector<ChordEntry> entries;
    // Bars that were skipped (no frames or no energy), by bar index.
    std::vector<int> skipped_bars;

    bool has_warnings() const { return !skipped_bars.empty(); }
};

std::string chord_name(int root, ChordQuality quality);  // "C:MAJ", "A:MIN"
std::string pitch_class_name(int pc);
std::string quality_name(ChordQuality quality);
ChordQuality parse_quality(const std::string& name);
int parse_pitch_class(const std::string& name);

// Binary {root, third, fifth} template.
std::array<double, 12> triad_template(int root, ChordQuality quality);

// Best of the 24 triads by Pearson correlation. Ties go to the lower root,
// then MAJ before MIN. Returns false for a flat (all-equal) profile.
bool match_triad(const dsp::ChromaFrame& profile, int& root, ChordQuality& quality);

inline constexpr int kChordHop = 512;

// Bars run from each downbeat to the next; the final bar ends at the clip end
// but spans at most four beats.
ChordProgression estimate_chords(const dsp::AudioClip& clip, const BeatGrid& grid);

}  // namespace teadapter::features

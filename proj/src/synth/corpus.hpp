// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>

#include "dsp/audio.hpp"
#include "features/beats.hpp"
#include "features/chords.hpp"
#include "features/melody.hpp"

namespace teadapter::synth {

enum class Section { kIntro, kChorus, kOutro, kGeneric };

std::string section_name(Section section);  // "intro", "chorus", "outro", "generic"
Section parse_section(const std::string& name);

struct PieceOptions {
    double duration = 10.0;
    double sample_rate = dsp::kDefaultSampleRate;
    Section section = Section::kGeneric;
    std::string instrument;  // empty: drawn at random from the built-ins
    bool drums = true;
};

// A procedurally composed clip with its ground truth: a diatonic chord loop
// (one chord per bar), a melody of scale tones, and a simple drum pattern.
// Intro clips fade in, outro clips decay, chorus clips play at full level.
struct SyntheticPiece {
    dsp::AudioClip mix;
    features::MelodyTrack melody;  // per chroma frame, hop 2048
    features::ChordProgression chords;
    features::BeatGrid beats;
    std::string caption;
    std::string instrument;
    std::string genre;
    Section section = Section::kGeneric;
    bool major = true;
    int tempo_bpm = 120;
};

SyntheticPiece synthesize_piece(const PieceOptions& options, std::uint64_t seed);

}  // namespace teadapter::synth

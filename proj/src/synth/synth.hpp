// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "dsp/audio.hpp"
#include "features/chords.hpp"
#include "features/melody.hpp"
#include "json.hpp"

namespace teadapter::synth {

inline constexpr double kPeakLevel = 0.8;
inline constexpr int kMelodyOctave = 4;
inline constexpr int kChordOctave = 3;

struct Adsr {
    double attack = 0.01;   // s
    double decay = 0.0;     // s
    double sustain = 1.0;   // level in [0, 1]
    double release = 0.02;  // s
};

struct TimbreProfile {
    std::string name;
    std::vector<double> harmonic_amps;  // partials 1..H, max normalized to 1
    Adsr adsr;
};

// Checks the invariants and rescales amplitudes so the largest is 1.
TimbreProfile make_profile(std::string name, std::vector<double> amps, Adsr adsr);

// sine, piano, violin, ukulele.
const std::vector<TimbreProfile>& builtin_profiles();
const TimbreProfile& builtin_profile(const std::string& name);

// Exact name, then a small alias table, then the closest name by edit distance.
const TimbreProfile& profile_for_label(const std::string& label);

TimbreProfile profile_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TimbreProfile& profile);

struct InstrumentLabel {
    std::string name;
    double confidence = 0.0;
};

struct InstrumentLabelSet {
    std::vector<InstrumentLabel> labels;

    // Highest confidence; earliest wins ties. Throws InvalidArgument when empty.
    const InstrumentLabel& primary() const;
};

// {"labels":[{"name":"violin","confidence":0.91}]}; duplicate names or
// non-finite confidences throw SchemaError.
InstrumentLabelSet labels_from_json(const nlohmann::json& j);

double midi_to_hz(int midi);
int midi_number(int pitch_class, int octave);

// Additive partials under an ADSR envelope that ends with the note, peak
// normalized to 0.8. Partials above Nyquist are dropped.
dsp::AudioClip synthesize_note(int pitch_class, int octave, double duration, const TimbreProfile& profile,
                               double sample_rate = dsp::kDefaultSampleRate);

// Same-class runs become single notes at octave 4; REST runs are silence.
// Output length is frames * hop.
dsp::AudioClip render_melody(const features::MelodyTrack& track, const TimbreProfile& profile);

// Each entry's triad with the root at octave 3, held for the entry duration.
dsp::AudioClip render_chords(const features::ChordProgression& prog, const TimbreProfile& profile,
                             double sample_rate = dsp::kDefaultSampleRate);

}  // namespace teadapter::synth

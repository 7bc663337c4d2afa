// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#include "adapter/conditions.hpp"

#include "features/beats.hpp"
#include "features/chords.hpp"
#include "features/condition.hpp"
#include "features/melody.hpp"

namespace teadapter::adapter {

dsp::AudioClip render_control(const dsp::AudioClip& teacher, ConditionType type,
                              const synth::TimbreProfile* instrument) {
    const synth::TimbreProfile& neutral = synth::builtin_profile(kNeutralProfile);
    switch (type) {
        case ConditionType::kMelody:
            return synth::render_melody(features::extract_melody(teacher), neutral);
        case ConditionType::kMelodyInstrument:
            return synth::render_melody(features::extract_melody(teacher), instrument ? *instrument : neutral);
        case ConditionType::kChord: {
            const features::BeatGrid grid = features::estimate_beats(teacher);
            return synth::render_chords(features::estimate_chords(teacher, grid), neutral, teacher.sample_rate);
        }
    }
    fail(ErrorCode::kInvalidArgument, "unknown condition type");
}

nn::Tensor teacher_condition(const dsp::AudioClip& teacher, ConditionType type, const dsp::MelConfig& mel,
                             int frames, const synth::TimbreProfile* instrument) {
    return features::controls_to_condition(render_control(teacher, type, instrument), mel, frames);
}

}  // namespace teadapter::adapter

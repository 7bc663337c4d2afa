// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "adapter/teadapter.hpp"
#include "dsp/audio.hpp"
#include "dsp/mel.hpp"
#include "synth/synth.hpp"

namespace teadapter::adapter {

// Timbre used to render melody and chord controls when no instrument is involved.
inline constexpr const char* kNeutralProfile = "piano";

// Extracts the control signal of `type` from teacher audio, renders it back
// to audio and returns its [frames, bins, 1] mel condition:
//   melody        extract_melody -> render_melody (neutral timbre)
//   melody_instr  extract_melody -> render_melody (instrument timbre)
//   chord         estimate_beats -> estimate_chords -> render_chords
// `instrument` is only consulted for melody_instr; null falls back to the
// neutral timbre.
nn::Tensor teacher_condition(const dsp::AudioClip& teacher, ConditionType type, const dsp::MelConfig& mel,
                             int frames, const synth::TimbreProfile* instrument = nullptr);

// The rendered control audio itself, before the mel front end.
dsp::AudioClip render_control(const dsp::AudioClip& teacher, ConditionType type,
                              const synth::TimbreProfile* instrument = nullptr);

}  // namespace teadapter::adapter

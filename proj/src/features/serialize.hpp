// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "json.hpp"
#include "features/beats.hpp"
#include "features/chords.hpp"
#include "features/melody.hpp"

namespace teadapter::features {

// Schemas "melody/v1", "chords/v1" and "beats/v1". REST is written as -1.
nlohmann::json to_json(const MelodyTrack& track);
nlohmann::json to_json(const ChordProgression& prog);
nlohmann::json to_json(const BeatGrid& grid);

// Throw SchemaError on a wrong schema tag or malformed fields.
MelodyTrack melody_from_json(const nlohmann::json& j);
ChordProgression chords_from_json(const nlohmann::json& j);
BeatGrid beats_from_json(const nlohmann::json& j);

// Structural validation used by tests and the CLI.
void validate_melody_json(const nlohmann::json& j);
void validate_chords_json(const nlohmann::json& j);
void validate_beats_json(const nlohmann::json& j);

}  // namespace teadapter::features

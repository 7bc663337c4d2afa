// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#include "features/serialize.hpp"

#include "common/error.hpp"

namespace teadapter::features {
namespace {

using nlohmann::json;

void expect_schema(const json& j, const char* name) {
    require(j.is_object() && j.contains("schema") && j["schema"] == name, ErrorCode::kSchemaError,
            std::string("expected schema ") + name);
}

template <typename T>
T field(const json& j, const char* key) {
    require(j.contains(key), ErrorCode::kSchemaError, std::string("missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        fail(ErrorCode::kSchemaError, std::string("bad field '") + key + "': " + e.what());
    }
}

}  // namespace

json to_json(const MelodyTrack& track) {
    return {{"schema", "melody/v1"},
            {"hop_size", track.hop_size},
            {"sample_rate", track.sample_rate},
            {"rest", kRest},
            {"classes", track.classes}};
}

json to_json(const ChordProgression& prog) {
    json entries = json::array();
    for (const auto& e : prog.entries) {
        entries.push_back({{"bar_index", e.bar_index},
                           {"start", e.start},
                           {"duration", e.duration},
                           {"root", e.root},
                           {"root_name", pitch_class_name(e.root)},
                           {"quality", quality_name(e.quality)}});
    }
    return {{"schema", "chords/v1"}, {"entries", entries}, {"skipped_bars", prog.skipped_bars}};
}

json to_json(const BeatGrid& grid) {
    return {{"schema", "beats/v1"},
            {"tempo_bpm", grid.tempo_bpm},
            {"beat_times", grid.beat_times},
            {"downbeat_indices", grid.downbeat_indices}};
}

void validate_melody_json(const json& j) { (void)melody_from_json(j); }
void validate_chords_json(const json& j) { (void)chords_from_json(j); }
void validate_beats_json(const json& j) { (void)beats_from_json(j); }

MelodyTrack melody_from_json(const json& j) {
    expect_schema(j, "melody/v1");
    MelodyTrack track;
    track.hop_size = field<int>(j, "hop_size");
    track.sample_rate = field<double>(j, "sample_rate");
    track.classes = field<std::vector<int>>(j, "classes");
    require(track.hop_size > 0 && track.sample_rate > 0.0, ErrorCode::kSchemaError, "melody hop and rate must be positive");
    for (int c : track.classes) {
        require(c == kRest || (c >= 0 && c < 12), ErrorCode::kSchemaError, "melody class out of range");
    }
    return track;
}

ChordProgression chords_from_json(const json& j) {
    expect_schema(j, "chords/v1");
    ChordProgression prog;
    const json entries = field<json>(j, "entries");
    require(entries.is_array(), ErrorCode::kSchemaError, "chord entries must be an array");
    double last_end = -1e300;
    for (const auto& item : entries) {
        ChordEntry e;
        e.bar_index = field<int>(item, "bar_index");
        e.start = field<double>(item, "start");
        e.duration = field<double>(item, "duration");
        e.root = field<int>(item, "root");
        e.quality = parse_quality(field<std::string>(item, "quality"));
        require(e.root >= 0 && e.root < 12, ErrorCode::kSchemaError, "chord root out of range");
        require(e.duration > 0.0, ErrorCode::kSchemaError, "chord duration must be positive");
        require(e.start >= last_end - 1e-9, ErrorCode::kSchemaError, "chord entries overlap or are unordered");
        last_end = e.start + e.duration;
        prog.entries.push_back(e);
    }
    if (j.contains("skipped_bars")) {
        prog.skipped_bars = field<std::vector<int>>(j, "skipped_bars");
    }
    return prog;
}

BeatGrid beats_from_json(const json& j) {
    expect_schema(j, "beats/v1");
    BeatGrid grid;
    grid.tempo_bpm = field<double>(j, "tempo_bpm");
    grid.beat_times = field<std::vector<double>>(j, "beat_times");
    grid.downbeat_indices = field<std::vector<int>>(j, "downbeat_indices");
    require(grid.tempo_bpm >= kMinTempo && grid.tempo_bpm <= kMaxTempo, ErrorCode::kSchemaError,
            "tempo outside [40, 240] BPM");
    for (std::size_t i = 1; i < grid.beat_times.size(); ++i) {
        require(grid.beat_times[i] > grid.beat_times[i - 1], ErrorCode::kSchemaError, "beat times not increasing");
    }
    for (std::size_t i = 0; i < grid.downbeat_indices.size(); ++i) {
        const int d = grid.downbeat_indices[i];
        require(d >= 0 && d < static_cast<int>(grid.beat_times.size()), ErrorCode::kSchemaError, "downbeat index out of range");
        require(i == 0 || d > grid.downbeat_indices[i - 1], ErrorCode::kSchemaError, "downbeats not increasing");
    }
    return grid;
}

}  // namespace teadapter::features

// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "dsp/mel.hpp"
#include "features/beats.hpp"
#include "features/chords.hpp"
#include "features/condition.hpp"
#include "features/melody.hpp"
#include "features/serialize.hpp"
#include "synth/corpus.hpp"
#include "synth/synth.hpp"
#include "test_util.hpp"

using namespace teadapter;
using testing::code_of;

namespace {

features::MelodyTrack stepwise_track(int frames_per_note, const std::vector<int>& classes) {
    features::MelodyTrack t;
    for (int pc : classes) {
        for (int k = 0; k < frames_per_note; ++k) {
            t.classes.push_back(pc);
        }
    }
    return t;
}

double agreement(const features::MelodyTrack& a, const features::MelodyTrack& b) {
    int hit = 0;
    int count = 0;
    for (int f = 0; f < std::min(a.frames(), b.frames()); ++f) {
        if (b.classes[f] == features::kRest) {
            continue;
        }
        ++count;
        hit += a.classes[f] == b.classes[f] ? 1 : 0;
    }
    return count > 0 ? static_cast<double>(hit) / count : 0.0;
}

}  // namespace

TEST_CASE("melody extraction recovers a rendered melody") {
    const auto truth = stepwise_track(8, {0, 4, 7, 11, 2, 5, 9, 0, 3, 8});
    const auto clip = synth::render_melody(truth, synth::builtin_profile("piano"));
    const auto got = features::extract_melody(clip);
    CHECK(got.frames() >= truth.frames() - 1);
    CHECK(agreement(got, truth) >= 0.85);
}

TEST_CASE("melody of silence is all REST") {
    dsp::AudioClip silence;
    silence.samples.assign(32000, 0.0);
    const auto m = features::extract_melody(silence);
    CHECK(m.frames() > 0);
    CHECK(m.voiced_frames() == 0);
}

TEST_CASE("melody is the same after a gain change") {
    const auto truth = stepwise_track(6, {9, 7, 5, 4, 2, 0});
    auto clip = synth::render_melody(truth, synth::builtin_profile("violin"));
    const auto a = features::extract_melody(clip);
    for (double& s : clip.samples) {
        s *= 0.1;
    }
    CHECK(features::extract_melody(clip).classes == a.classes);
}

TEST_CASE("beat tracking on click tracks") {
    for (double bpm : {120.0, 90.0}) {
        const double period = 60.0 / bpm;
        const auto clip = testing::clicks(testing::regular_times(0.25, period, 10.0), 10.0);
        const auto grid = features::estimate_beats(clip);
        CAPTURE(bpm);
        CHECK(grid.tempo_bpm == doctest::Approx(bpm).epsilon(0.03));
        REQUIRE(grid.beat_times.size() >= 8);
        for (std::size_t i = 2; i + 2 < grid.beat_times.size(); ++i) {
            CHECK(grid.beat_times[i + 1] - grid.beat_times[i] == doctest::Approx(period).epsilon(0.05));
        }
        for (std::size_t k = 1; k < grid.downbeat_indices.size(); ++k) {
            CHECK(grid.downbeat_indices[k] - grid.downbeat_indices[k - 1] == 4);
        }
    }
}

TEST_CASE("beat tracking error paths") {
    CHECK(code_of([] { features::estimate_beats(testing::clicks({0.1, 0.6}, 1.0)); }) == ErrorCode::kTooShort);
    dsp::AudioClip silence;
    silence.samples.assign(16000 * 4, 0.0);
    CHECK(code_of([&] { features::estimate_beats(silence); }) == ErrorCode::kNoBeats);
}

TEST_CASE("chords of a rendered progression are recovered bar by bar") {
    synth::PieceOptions po;
    po.duration = 10.0;
    po.instrument = "piano";
    const auto piece = synth::synthesize_piece(po, 21);
    const auto comp = synth::render_chords(piece.chords, synth::builtin_profile("piano"));
    const auto prog = features::estimate_chords(comp, piece.beats);
    REQUIRE(!prog.entries.empty());
    int hit = 0;
    int count = 0;
    for (const auto& e : prog.entries) {
        const double mid = e.start + e.duration / 2.0;
        for (const auto& t : piece.chords.entries) {
            if (mid >= t.start && mid < t.start + t.duration) {
                ++count;
                hit += (t.root == e.root && t.quality == e.quality) ? 1 : 0;
            }
        }
    }
    REQUIRE(count > 0);
    CHECK(static_cast<double>(hit) / count >= 0.8);
}

TEST_CASE("chord names") {
    CHECK(features::chord_name(0, features::ChordQuality::kMajor) == "C:MAJ");
    CHECK(features::chord_name(9, features::ChordQuality::kMinor) == "A:MIN");
    for (int pc = 0; pc < 12; ++pc) {
        CHECK(features::parse_pitch_class(features::pitch_class_name(pc)) == pc);
    }
}

TEST_CASE("feature documents round trip and validate") {
    synth::PieceOptions po;
    po.duration = 6.0;
    const auto piece = synth::synthesize_piece(po, 5);

    const auto mj = features::to_json(piece.melody);
    CHECK(mj.at("schema") == "melody/v1");
    features::validate_melody_json(mj);
    CHECK(features::melody_from_json(mj).classes == piece.melody.classes);

    const auto cj = features::to_json(piece.chords);
    CHECK(cj.at("schema") == "chords/v1");
    features::validate_chords_json(cj);
    const auto chords = features::chords_from_json(cj);
    REQUIRE(chords.entries.size() == piece.chords.entries.size());
    for (std::size_t i = 0; i < chords.entries.size(); ++i) {
        CHECK(chords.entries[i].root == piece.chords.entries[i].root);
        CHECK(chords.entries[i].quality == piece.chords.entries[i].quality);
    }

    const auto bj = features::to_json(piece.beats);
    CHECK(bj.at("schema") == "beats/v1");
    features::validate_beats_json(bj);
    CHECK(features::beats_from_json(bj).beat_times == piece.beats.beat_times);

    auto bad = mj;
    bad["schema"] = "melody/v2";
    CHECK(code_of([&] { features::validate_melody_json(bad); }) == ErrorCode::kSchemaError);
    bad = mj;
    bad.erase("schema");
    CHECK(code_of([&] { features::validate_melody_json(bad); }) == ErrorCode::kSchemaError);
}

TEST_CASE("condition tensors have the latent geometry") {
    dsp::MelConfig mel;
    const auto clip = testing::sine(440.0, 1.0);
    const auto cond = features::controls_to_condition(clip, mel, 120);
    CHECK(cond.shape() == nn::Shape{120, 64, 1});
    dsp::AudioClip empty;
    CHECK(code_of([&] { features::controls_to_condition(empty, mel, 10); }) == ErrorCode::kEmptyInput);
}

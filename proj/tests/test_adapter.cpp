// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#include "adapter/conditions.hpp"
#include "adapter/teadapter.hpp"
#include "diffusion/config.hpp"
#include "doctest.h"
#include "synth/corpus.hpp"
#include "synth/synth.hpp"
#include "test_util.hpp"

using namespace teadapter;
using testing::code_of;

namespace {

nn::Tensor random_tensor(nn::Shape shape, Rng& rng) {
    nn::Tensor t(std::move(shape));
    for (auto& v : t.data()) {
        v = static_cast<nn::Real>(rng.uniform(-1.0, 1.0));
    }
    return t;
}

void perturb(adapter::TEAdapter& a, Rng& rng) {
    for (nn::Parameter* p : a.parameters()) {
        for (auto& v : p->value.data()) {
            v += static_cast<nn::Real>(rng.uniform(-0.1, 0.1));
        }
    }
}

adapter::MultiScaleFeatures random_features(const adapter::ScalePlan& plan, Rng& rng) {
    adapter::MultiScaleFeatures f;
    const auto dims = plan.stage_dims();
    for (int s = 0; s < adapter::kStages; ++s) {
        const auto& d = dims[static_cast<std::size_t>(s)];
        f.maps.push_back(random_tensor({1, plan.channels[static_cast<std::size_t>(s)], d.height, d.width}, rng));
    }
    return f;
}

}  // namespace

TEST_CASE("adapter maps follow the scale plan") {
    for (const auto& config : {diffusion::paper_config(), diffusion::toy_config()}) {
        const auto& plan = config.plan();
        CAPTURE(config.name);
        adapter::TEAdapter a(plan, 1);
        const nn::Tensor cond(nn::Shape{1, 1, plan.frames, plan.bins}, nn::Real(0.5));
        const auto f = a.features(cond);
        REQUIRE(f.maps.size() == 4u);
        const auto dims = plan.stage_dims();
        for (int s = 0; s < 4; ++s) {
            const auto& d = dims[static_cast<std::size_t>(s)];
            CHECK(f.maps[static_cast<std::size_t>(s)].shape() ==
                  nn::Shape{1, plan.channels[static_cast<std::size_t>(s)], d.height, d.width});
        }
    }
    CHECK(diffusion::paper_config().plan().stage_dims()[3] == adapter::StageDims{32, 2});
}

TEST_CASE("a fresh adapter contributes exactly zero") {
    const auto plan = diffusion::toy_config().plan();
    adapter::TEAdapter a(plan, 3);
    Rng rng(3);
    const auto f = a.features(random_tensor({1, 1, plan.frames, plan.bins}, rng));
    for (const auto& m : f.maps) {
        for (auto v : m.data()) {
            CHECK(v == nn::Real(0));
        }
    }
}

TEST_CASE("group combination is a weighted sum per scale") {
    const auto plan = diffusion::toy_config().plan();
    Rng rng(4);
    const auto a = random_features(plan, rng);
    const auto b = random_features(plan, rng);
    const auto single = adapter::group_combine({a}, {1.0});
    for (int s = 0; s < 4; ++s) {
        CHECK(single.maps[static_cast<std::size_t>(s)] == a.maps[static_cast<std::size_t>(s)]);
    }
    const auto mixed = adapter::group_combine({a, b}, {0.25, 1.5});
    const auto swapped = adapter::group_combine({b, a}, {1.5, 0.25});
    const auto muted = adapter::group_combine({a, b}, {1.0, 0.0});
    for (int s = 0; s < 4; ++s) {
        const auto i = static_cast<std::size_t>(s);
        for (std::size_t k = 0; k < a.maps[i].numel(); ++k) {
            const double want = 0.25 * a.maps[i][k] + 1.5 * b.maps[i][k];
            CHECK(mixed.maps[i][k] == doctest::Approx(want).epsilon(1e-6));
            CHECK(swapped.maps[i][k] == doctest::Approx(want).epsilon(1e-6));
            CHECK(muted.maps[i][k] == a.maps[i][k]);
        }
    }
    auto bad = b;
    bad.maps[2] = random_tensor({1, 1, 1, 1}, rng);
    CHECK(code_of([&] { adapter::group_combine({a, bad}, {1.0, 1.0}); }) == ErrorCode::kShapeError);
    CHECK(code_of([&] { adapter::group_combine({a}, {1.0, 1.0}); }) != ErrorCode::kOk);
    CHECK(code_of([&] { adapter::inject(a, bad); }) == ErrorCode::kShapeError);
    const auto sum = adapter::inject(a, b);
    CHECK(sum.maps[1][3] == doctest::Approx(a.maps[1][3] + b.maps[1][3]));
}

TEST_CASE("running a group equals combining its members") {
    const auto plan = diffusion::toy_config().plan();
    Rng rng(5);
    adapter::TEAdapter a(plan, 10), b(plan, 11);
    perturb(a, rng);
    perturb(b, rng);
    const auto ca = random_tensor({1, 1, plan.frames, plan.bins}, rng);
    const auto cb = random_tensor({1, 1, plan.frames, plan.bins}, rng);
    adapter::AdapterGroup group{{{&a, ca, 0.7}, {&b, cb, 0.3}}};
    const auto run = adapter::group_combine(group);
    const auto manual = adapter::group_combine({a.features(ca), b.features(cb)}, {0.7, 0.3});
    for (int s = 0; s < 4; ++s) {
        CHECK(run.maps[static_cast<std::size_t>(s)] == manual.maps[static_cast<std::size_t>(s)]);
    }
}

TEST_CASE("adapters save and load with their tags") {
    const auto plan = diffusion::toy_config().plan();
    Rng rng(6);
    adapter::TEAdapter a(plan, 12);
    perturb(a, rng);
    const auto dir = testing::scratch_dir("adapter_ckpt");
    adapter::save_adapter(dir, a, {adapter::ConditionType::kChord, "outro"});
    adapter::AdapterTags tags;
    auto b = adapter::load_adapter(dir, &tags);
    CHECK(tags.condition == adapter::ConditionType::kChord);
    CHECK(tags.section == "outro");
    CHECK(b->plan() == plan);
    const auto cond = random_tensor({1, 1, plan.frames, plan.bins}, rng);
    const auto fa = a.features(cond), fb = b->features(cond);
    for (int s = 0; s < 4; ++s) {
        CHECK(fa.maps[static_cast<std::size_t>(s)] == fb.maps[static_cast<std::size_t>(s)]);
    }
    CHECK(code_of([&] { adapter::load_adapter(dir / "nothing"); }) == ErrorCode::kNotLoaded);
}

TEST_CASE("condition layout and names") {
    const auto plan = diffusion::toy_config().plan();
    const nn::Tensor hwc(nn::Shape{plan.frames, plan.bins, 1});
    CHECK(adapter::condition_to_nchw(hwc, plan).shape() == nn::Shape{1, 1, plan.frames, plan.bins});
    const nn::Tensor wrong(nn::Shape{plan.frames + 1, plan.bins, 1});
    CHECK(code_of([&] { adapter::condition_to_nchw(wrong, plan); }) == ErrorCode::kShapeError);
    const nn::Tensor longer(nn::Shape{plan.frames * 2, plan.bins, 1});
    CHECK(adapter::condition_to_nchw(longer, plan, true).shape() == nn::Shape{1, 1, plan.frames * 2, plan.bins});
    for (auto t : {adapter::ConditionType::kChord, adapter::ConditionType::kMelody,
                   adapter::ConditionType::kMelodyInstrument}) {
        CHECK(adapter::parse_condition(adapter::condition_name(t)) == t);
    }
    CHECK(code_of([] { adapter::parse_condition("rhythm"); }) != ErrorCode::kOk);
}

TEST_CASE("teacher conditions for every control type") {
    const auto config = diffusion::toy_config();
    synth::PieceOptions po;
    po.duration = config.clip_seconds();
    const auto piece = synth::synthesize_piece(po, 8);
    for (auto t : {adapter::ConditionType::kChord, adapter::ConditionType::kMelody,
                   adapter::ConditionType::kMelodyInstrument}) {
        CAPTURE(adapter::condition_name(t));
        const auto c = adapter::teacher_condition(piece.mix, t, config.mel, config.frames(),
                                                  &synth::builtin_profile("violin"));
        CHECK(c.shape() == nn::Shape{config.frames(), config.bins(), 1});
        CHECK(c.all_finite());
    }
    // The instrument only matters for melody_instr.
    const auto& ukulele = synth::builtin_profile("ukulele");
    CHECK(adapter::render_control(piece.mix, adapter::ConditionType::kMelody, &ukulele).samples ==
          adapter::render_control(piece.mix, adapter::ConditionType::kMelody).samples);
    CHECK(adapter::render_control(piece.mix, adapter::ConditionType::kMelodyInstrument, &ukulele).samples !=
          adapter::render_control(piece.mix, adapter::ConditionType::kMelodyInstrument).samples);
}

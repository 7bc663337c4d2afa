// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <cstdlib>

#include "doctest.h"
#include "dsp/audio.hpp"
#include "io/files.hpp"
#include "pipeline/pipeline.hpp"
#include "test_util.hpp"

using namespace teadapter;
using testing::code_of;

namespace {

io::AppConfig fast_app() {
    io::AppConfig app;
    app.model = diffusion::toy_config();
    app.model.steps = 10;
    app.model.batch_size = 2;
    return app;
}

}  // namespace

TEST_CASE("synthetic corpus to generation") {
    const auto dir = testing::scratch_dir("pipeline");
    ::setenv("TEADAPTER_CACHE_DIR", (dir / "cache").c_str(), 1);
    const io::AppConfig app = fast_app();
    pipeline::CorpusOptions corpus;
    corpus.count = 4;
    const auto manifest = pipeline::write_corpus(dir / "corpus", app.model, corpus, 3);
    CHECK(manifest == dir / "corpus" / "manifest.json");
    const auto doc = io::read_json(manifest);
    REQUIRE(doc.at("entries").size() == 4u);
    CHECK(doc["entries"][0].at("section") == "intro");
    CHECK(doc["entries"][1].at("section") == "chorus");
    CHECK(std::filesystem::exists(dir / "corpus" / "clip_000.melody.json"));

    diffusion::DiffusionModel model(app.model, 1);
    const auto all = pipeline::load_dataset(model, manifest);
    CHECK(all.clips.size() == 4u);
    CHECK(all.clips[0].audio.samples.size() == app.model.clip_samples());
    const auto outros = pipeline::load_dataset(model, manifest, synth::Section::kOutro);
    CHECK(outros.clips.size() == 1u);
    REQUIRE(pipeline::clip_instrument(all.clips[0], app) != nullptr);

    pipeline::fit_stats(model, all);
    CHECK(model.stats.stdev[3] != 1.0);
    const auto examples = pipeline::make_examples(
        model, all, {adapter::ConditionType::kMelody, adapter::ConditionType::kChord}, app);
    REQUIRE(examples.size() == 4u);
    CHECK(examples[0].conditions.size() == 2u);
    CHECK(examples[0].latent.shape() == nn::Shape{1, 1, 64, 16});
    CHECK(examples[0].conditions[1].shape() == nn::Shape{1, 1, 64, 16});

    int calls = 0;
    const auto pre = pipeline::pretrain(model, examples, 6, 2, [&](int, double) { ++calls; });
    CHECK(calls == 6);
    CHECK(pre.losses.size() == 6u);
    CHECK(std::isfinite(pre.final_loss()));
    CHECK(model.backbone().all_frozen());

    adapter::TEAdapter chord(model.config().plan(), 4);
    const auto before = model.backbone().parameters()[2]->value;
    const auto log = pipeline::train_adapter(model, chord, examples, 4, 5, 1);
    CHECK(log.losses.size() == 4u);
    CHECK(model.backbone().parameters()[2]->value == before);
    adapter::TEAdapter melody(model.config().plan(), 6);
    CHECK(pipeline::train_adapter(model, melody, examples, 2, 5, 0).losses.size() == 2u);
    CHECK(code_of([&] { pipeline::train_adapter(model, melody, examples, 1, 5, 2); }) ==
          ErrorCode::kInvalidArgument);

    const auto& teacher = all.clips[1].audio;
    const diffusion::TextCondition text{"generate a jazz music", std::nullopt, std::nullopt};
    const auto a = pipeline::generate(model, text, {{&teacher, &chord, adapter::ConditionType::kChord, 1.0, nullptr}}, 7);
    const auto b = pipeline::generate(model, text, {{&teacher, &chord, adapter::ConditionType::kChord, 1.0, nullptr}}, 7);
    CHECK(a.samples == b.samples);
    CHECK(a.sample_rate == 16000.0);
    CHECK(a.samples.size() > 16000u);

    auto loud = a;
    pipeline::normalize_peak(loud);
    CHECK(dsp::peak(loud) == doctest::Approx(0.8));
    ::unsetenv("TEADAPTER_CACHE_DIR");
}

TEST_CASE("training logs") {
    pipeline::TrainLog log;
    for (int i = 0; i < 20; ++i) {
        log.losses.push_back(i < 18 ? 5.0 : 1.0);
    }
    CHECK(log.final_loss() == doctest::Approx(1.0));
    pipeline::TrainLog one;
    one.losses = {2.5};
    CHECK(one.final_loss() == 2.5);
}

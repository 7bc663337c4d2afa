// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "adapter/teadapter.hpp"
#include "diffusion/config.hpp"
#include "diffusion/model.hpp"
#include "diffusion/schedule.hpp"
#include "diffusion/text_encoder.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace teadapter;
using testing::code_of;

namespace {

diffusion::DiffusionConfig fast_toy() {
    auto c = diffusion::toy_config();
    c.steps = 12;
    return c;
}

nn::Tensor random_tensor(nn::Shape shape, Rng& rng) {
    nn::Tensor t(std::move(shape));
    for (auto& v : t.data()) {
        v = static_cast<nn::Real>(rng.normal());
    }
    return t;
}

}  // namespace

TEST_CASE("linear schedule") {
    const auto s = diffusion::linear_schedule(5, 0.1, 0.5);
    REQUIRE(s.betas.size() == 5u);
    for (int t = 1; t <= 5; ++t) {
        CHECK(s.beta(t) == doctest::Approx(0.1 * t));
    }
    CHECK(s.alpha_bar(0) == 1.0);
    double bar = 1.0;
    for (int t = 1; t <= 5; ++t) {
        bar *= 1.0 - s.beta(t);
        CHECK(s.alpha_bar(t) == doctest::Approx(bar));
        CHECK(s.alpha(t) == doctest::Approx(1.0 - s.beta(t)));
        CHECK(s.posterior_variance(t) ==
              doctest::Approx((1.0 - s.alpha_bar(t - 1)) / (1.0 - s.alpha_bar(t)) * s.beta(t)));
        CHECK(s.alpha_bar(t) < s.alpha_bar(t - 1));
    }
    CHECK(s.posterior_variance(1) == 0.0);
    CHECK(code_of([] { diffusion::linear_schedule(0); }) == ErrorCode::kInvalidArgument);
    CHECK(code_of([] { diffusion::linear_schedule(10, 0.2, 0.1); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("forward diffusion mixes signal and noise") {
    Rng rng(1);
    const auto z0 = random_tensor({1, 1, 4, 3}, rng);
    const auto eps = random_tensor({1, 1, 4, 3}, rng);
    const auto s = diffusion::linear_schedule(10);
    const auto zt = diffusion::forward_diffuse(z0, 7, eps, s);
    const double a = std::sqrt(s.alpha_bar(7)), b = std::sqrt(1.0 - s.alpha_bar(7));
    for (std::size_t i = 0; i < z0.numel(); ++i) {
        CHECK(zt[i] == doctest::Approx(a * z0[i] + b * eps[i]).epsilon(1e-6));
    }
    CHECK(diffusion::forward_diffuse(z0, 1.0, eps) == z0);
}

TEST_CASE("global tags and tokens") {
    CHECK(diffusion::append_global_tags("a calm tune", diffusion::Mode::kMinor, 90) ==
          "a calm tune, in minor key, at 90 BPM");
    CHECK(diffusion::append_global_tags("x", std::nullopt, 120) == "x, at 120 BPM");
    CHECK(diffusion::append_global_tags("x", std::nullopt, std::nullopt) == "x");
    const std::string once = diffusion::append_global_tags("x", diffusion::Mode::kMajor, 100);
    CHECK(diffusion::append_global_tags(once, diffusion::Mode::kMajor, 100) == once);
    CHECK(diffusion::parse_mode("major") == diffusion::Mode::kMajor);
    CHECK(code_of([] { diffusion::parse_mode("dorian"); }) != ErrorCode::kOk);

    CHECK(diffusion::tokenize("Generate a JAZZ music, at 90 BPM") ==
          std::vector<std::string>{"generate", "a", "jazz", "music", "at", "90", "bpm"});
    const auto ids = diffusion::token_ids("one two one", 16);
    REQUIRE(ids.size() == 3u);
    CHECK(ids[0] == ids[2]);
    for (int id : ids) {
        CHECK(id >= 0);
        CHECK(id < 16);
    }
}

TEST_CASE("latent statistics standardize each bin") {
    const std::vector<std::vector<double>> mels{{1.0, 10.0, 3.0, 14.0}, {5.0, 12.0}};
    const auto s = diffusion::LatentStats::fit(mels, 2);
    CHECK(s.mean[0] == doctest::Approx(3.0));
    CHECK(s.mean[1] == doctest::Approx(12.0));
    CHECK(s.stdev[0] == doctest::Approx(std::sqrt(8.0 / 3.0)));
    CHECK(s.stdev[1] == doctest::Approx(std::sqrt(8.0 / 3.0)));
    CHECK(s.bound >= 1.0);
    CHECK(code_of([] { diffusion::LatentStats::fit({}, 2); }) == ErrorCode::kEmptyInput);

    diffusion::DiffusionModel model(fast_toy(), 1);
    const int frames = model.config().frames(), bins = model.config().bins();
    std::vector<double> mel(static_cast<std::size_t>(frames * bins));
    for (std::size_t i = 0; i < mel.size(); ++i) {
        mel[i] = std::sin(0.1 * static_cast<double>(i)) * 3.0 - 2.0;
    }
    model.stats = diffusion::LatentStats::fit({mel}, bins);
    const auto back = model.decode_mel(model.encode(mel, frames));
    for (std::size_t i = 0; i < mel.size(); ++i) {
        CHECK(back[i] == doctest::Approx(mel[i]).epsilon(1e-5));
    }
}

TEST_CASE("sampling is deterministic per seed and independent across the batch") {
    diffusion::DiffusionModel model(fast_toy(), 2);
    const auto toks = model.tokens("generate a jazz music");
    const auto a = diffusion::sample(model, {toks}, {5});
    const auto b = diffusion::sample(model, {toks}, {5});
    const auto c = diffusion::sample(model, {toks}, {6});
    CHECK(a == b);
    CHECK(a != c);
    CHECK(a.shape() == nn::Shape{1, 1, 64, 16});
    CHECK(a.all_finite());
    const auto batch = diffusion::sample(model, {toks, toks}, {6, 5});
    const std::size_t per = a.numel();
    for (std::size_t i = 0; i < per; ++i) {
        CHECK(batch[per + i] == doctest::Approx(a[i]).epsilon(1e-5));
    }
    CHECK(code_of([&] { diffusion::sample(model, {toks}, {1, 2}); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("a fresh adapter leaves sampling unchanged") {
    diffusion::DiffusionModel model(fast_toy(), 3);
    model.backbone().set_frozen(true);
    adapter::TEAdapter a(model.config().plan(), 9);
    Rng rng(3);
    adapter::AdapterGroup group{{{&a, random_tensor({1, 1, 64, 16}, rng), 1.0}}};
    const diffusion::TextCondition text{"generate a pop music", diffusion::Mode::kMajor, 120};
    CHECK(diffusion::sample(model, text, &group, 4) == diffusion::sample(model, text, nullptr, 4));
}

TEST_CASE("known-region sampling keeps unflagged frames") {
    diffusion::DiffusionModel model(fast_toy(), 4);
    Rng rng(4);
    diffusion::InpaintSpec spec{random_tensor({1, 1, 64, 16}, rng), std::vector<std::uint8_t>(64, 0), 9};
    for (int f = 20; f < 30; ++f) {
        spec.regenerate[static_cast<std::size_t>(f)] = 1;
    }
    diffusion::SampleOptions options;
    options.inpaint = &spec;
    const auto out = diffusion::sample(model, {{1, 2}}, {3}, options);
    int changed = 0;
    for (int f = 0; f < 64; ++f) {
        for (int b = 0; b < 16; ++b) {
            if (spec.regenerate[static_cast<std::size_t>(f)]) {
                changed += out.at(0, 0, f, b) != spec.known.at(0, 0, f, b) ? 1 : 0;
            } else {
                CHECK(out.at(0, 0, f, b) == spec.known.at(0, 0, f, b));
            }
        }
    }
    CHECK(changed > 100);
    spec.regenerate.pop_back();
    CHECK(code_of([&] { diffusion::sample(model, {{1}}, {3}, options); }) == ErrorCode::kShapeError);
}

TEST_CASE("adapter training requires a frozen backbone") {
    diffusion::DiffusionModel model(fast_toy(), 5);
    adapter::TEAdapter a(model.config().plan(), 1);
    Rng rng(5);
    diffusion::TrainingExample ex{random_tensor({1, 1, 64, 16}, rng), {1, 2}, {random_tensor({1, 1, 64, 16}, rng)}};
    nn::Adam opt(1e-3);
    CHECK(code_of([&] { diffusion::train_adapter_step(model, {&a}, {1.0}, {&ex}, opt, rng); }) ==
          ErrorCode::kContractViolation);
    model.backbone().set_frozen(true);
    const auto before = model.backbone().parameters().front()->value;
    const double loss = diffusion::train_adapter_step(model, {&a}, {1.0}, {&ex}, opt, rng);
    CHECK(std::isfinite(loss));
    CHECK(model.backbone().parameters().front()->value == before);
}

TEST_CASE("pretraining reduces the denoising loss") {
    diffusion::DiffusionModel model(fast_toy(), 6);
    Rng data(6);
    std::vector<diffusion::TrainingExample> examples;
    for (int i = 0; i < 4; ++i) {
        nn::Tensor z({1, 1, 64, 16});
        for (int f = 0; f < 64; ++f) {
            for (int b = 0; b < 16; ++b) {
                z.at(0, 0, f, b) = static_cast<nn::Real>(std::sin(0.3 * f + b + i));
            }
        }
        examples.push_back({z, {i}, {}});
    }
    std::vector<const diffusion::TrainingExample*> batch;
    for (const auto& e : examples) {
        batch.push_back(&e);
    }
    nn::Adam opt(2e-3);
    Rng rng(7);
    double first = 0.0, last = 0.0;
    for (int step = 0; step < 60; ++step) {
        const double l = diffusion::pretrain_step(model, batch, opt, rng);
        if (step < 10) {
            first += l;
        } else if (step >= 50) {
            last += l;
        }
    }
    CHECK(last < first);
}

TEST_CASE("models save and load") {
    auto config = fast_toy();
    diffusion::DiffusionModel model(config, 7);
    model.stats.mean.assign(16, 0.5);
    model.info = {{"note", "unit"}};
    const auto dir = testing::scratch_dir("model_ckpt");
    model.save(dir / "m");
    const auto loaded = diffusion::DiffusionModel::load(dir / "m");
    CHECK(loaded->config().name == "toy");
    CHECK(loaded->config().steps == 12);
    CHECK(loaded->stats.mean == model.stats.mean);
    CHECK(loaded->info.at("note") == "unit");
    CHECK(diffusion::sample(*loaded, {{3}}, {1}) == diffusion::sample(model, {{3}}, {1}));
    CHECK(code_of([&] { diffusion::DiffusionModel::load(dir / "absent"); }) == ErrorCode::kNotLoaded);
    adapter::TEAdapter a(config.plan(), 1);
    adapter::save_adapter(dir / "a", a, {});
    CHECK(code_of([&] { diffusion::DiffusionModel::load(dir / "a"); }) == ErrorCode::kSchemaError);
}

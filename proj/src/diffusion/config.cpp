// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#include "diffusion/config.hpp"

#include "common/error.hpp"

namespace teadapter::diffusion {

std::size_t DiffusionConfig::clip_samples() const {
    return static_cast<std::size_t>(frames() - 1) * static_cast<std::size_t>(mel.hop_size);
}

double DiffusionConfig::clip_seconds() const { return static_cast<double>(clip_samples()) / mel.sample_rate; }

void DiffusionConfig::validate() const {
    backbone.plan.validate();
    dsp::validate(mel);
    require(mel.n_mels == bins(), ErrorCode::kShapeError, "mel bins must equal the latent width");
    require(steps >= 1 && batch_size >= 1 && learning_rate > 0.0, ErrorCode::kInvalidArgument,
            "steps, batch size and learning rate must be positive");
    require(backbone.embed_dim > 0 && backbone.vocab > 0 && backbone.time_features % 2 == 0, ErrorCode::kInvalidArgument,
            "bad text or step embedding sizes");
}

DiffusionConfig paper_config() {
    DiffusionConfig c;
    c.name = "paper";
    c.backbone.plan = {1024, 64, 4, {16, 24, 32, 32}};
    c.mel.n_fft = 1024;
    c.mel.hop_size = 160;
    c.mel.n_mels = 64;
    c.mel.fmin = 0.0;
    c.mel.fmax = 8000.0;
    return c;
}

DiffusionConfig desk_config() {
    DiffusionConfig c;
    c.name = "desk";
    // Endpoints scaled by 1000 / T so 200 steps end near pure noise.
    c.beta_start = 5e-4;
    c.beta_end = 0.1;
    c.backbone.plan = {128, 64, 4, {32, 48, 64, 64}};
    c.mel.n_fft = 2048;
    c.mel.hop_size = 1024;
    c.mel.n_mels = 64;
    c.mel.fmin = 80.0;
    c.mel.fmax = 2500.0;
    c.learning_rate = 1e-3;
    c.batch_size = 8;
    c.train_steps = 2000;
    c.pretrain_steps = 1500;
    return c;
}

DiffusionConfig toy_config() {
    DiffusionConfig c;
    c.name = "toy";
    c.beta_start = 5e-4;
    c.beta_end = 0.1;
    c.backbone.plan = {64, 16, 2, {8, 16, 16, 16}};
    c.backbone.embed_dim = 32;
    c.backbone.vocab = 256;
    c.backbone.time_features = 16;
    c.mel.n_fft = 2048;
    c.mel.hop_size = 1024;
    c.mel.n_mels = 16;
    c.mel.fmin = 80.0;
    c.mel.fmax = 2500.0;
    c.learning_rate = 1e-3;
    c.batch_size = 4;
    c.train_steps = 50;
    c.pretrain_steps = 50;
    return c;
}

DiffusionConfig gradcheck_config() {
    DiffusionConfig c = toy_config();
    c.name = "gradcheck";
    c.backbone.plan = {4, 4, 1, {2, 3, 3, 2}};
    c.backbone.embed_dim = 4;
    c.backbone.vocab = 8;
    c.backbone.time_features = 4;
    c.mel.n_mels = 4;
    c.steps = 10;
    return c;
}

DiffusionConfig named_config(const std::string& name) {
    if (name == "paper") {
        return paper_config();
    }
    if (name == "desk") {
        return desk_config();
    }
    if (name == "toy") {
        return toy_config();
    }
    if (name == "gradcheck") {
        return gradcheck_config();
    }
    fail(ErrorCode::kInvalidArgument, "unknown config preset '" + name + "'");
}

nlohmann::json to_json(const DiffusionConfig& c) {
    return {{"schema", "config/v1"},
            {"name", c.name},
            {"plan", adapter::to_json(c.backbone.plan)},
            {"embed_dim", c.backbone.embed_dim},
            {"vocab", c.backbone.vocab},
            {"time_features", c.backbone.time_features},
            {"mel",
             {{"sample_rate", c.mel.sample_rate},
              {"n_fft", c.mel.n_fft},
              {"hop_size", c.mel.hop_size},
              {"n_mels", c.mel.n_mels},
              {"fmin", c.mel.fmin},
              {"fmax", c.mel.fmax},
              {"log_gain", c.mel.log_gain},
              {"griffin_lim_iterations", c.mel.griffin_lim_iterations}}},
            {"steps", c.steps},
            {"beta_start", c.beta_start},
            {"beta_end", c.beta_end},
            {"learning_rate", c.learning_rate},
            {"batch_size", c.batch_size},
            {"train_steps", c.train_steps},
            {"pretrain_steps", c.pretrain_steps},
            {"pretrain_learning_rate", c.pretrain_learning_rate}};
}

DiffusionConfig config_from_json(const nlohmann::json& j) {
    require(j.is_object(), ErrorCode::kSchemaError, "config must be a JSON object");
    if (j.contains("schema")) {
        require(j["schema"] == "config/v1", ErrorCode::kSchemaError, "expected schema config/v1");
    }
    try {
        DiffusionConfig c = named_config(j.value("base", j.value("name", std::string("desk"))));
        c.name = j.value("name", c.name);
        if (j.contains("plan")) {
            c.backbone.plan = adapter::plan_from_json(j["plan"]);
        }
        c.backbone.embed_dim = j.value("embed_dim", c.backbone.embed_dim);
        c.backbone.vocab = j.value("vocab", c.backbone.vocab);
        c.backbone.time_features = j.value("time_features", c.backbone.time_features);
        if (j.contains("mel")) {
            const auto& m = j["mel"];
            c.mel.sample_rate = m.value("sample_rate", c.mel.sample_rate);
            c.mel.n_fft = m.value("n_fft", c.mel.n_fft);
            c.mel.hop_size = m.value("hop_size", c.mel.hop_size);
            c.mel.n_mels = m.value("n_mels", c.mel.n_mels);
            c.mel.fmin = m.value("fmin", c.mel.fmin);
            c.mel.fmax = m.value("fmax", c.mel.fmax);
            c.mel.log_gain = m.value("log_gain", c.mel.log_gain);
            c.mel.griffin_lim_iterations = m.value("griffin_lim_iterations", c.mel.griffin_lim_iterations);
        }
        c.steps = j.value("steps", c.steps);
        c.beta_start = j.value("beta_start", c.beta_start);
        c.beta_end = j.value("beta_end", c.beta_end);
        c.learning_rate = j.value("learning_rate", c.learning_rate);
        c.batch_size = j.value("batch_size", c.batch_size);
        c.train_steps = j.value("train_steps", c.train_steps);
        c.pretrain_steps = j.value("pretrain_steps", c.pretrain_steps);
        c.pretrain_learning_rate = j.value("pretrain_learning_rate", c.pretrain_learning_rate);
        c.validate();
        return c;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::kSchemaError, std::string("bad config: ") + e.what());
    }
}

}  // namespace teadapter::diffusion

// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#include "pipeline/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "adapter/conditions.hpp"
#include "common/error.hpp"
#include "common/rng.hpp"
#include "dsp/mel.hpp"
#include "dsp/wav.hpp"
#include "features/serialize.hpp"
#include "io/files.hpp"

namespace teadapter::pipeline {
namespace {

std::string clip_stem(int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "clip_%03d", index);
    return buf;
}

std::vector<const diffusion::TrainingExample*> draw_batch(const std::vector<diffusion::TrainingExample>& examples,
                                                          int batch_size, Rng& rng) {
    std::vector<const diffusion::TrainingExample*> batch;
    batch.reserve(static_cast<std::size_t>(batch_size));
    for (int k = 0; k < batch_size; ++k) {
        batch.push_back(&examples[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(examples.size()) - 1))]);
    }
    return batch;
}

}  // namespace

std::filesystem::path write_corpus(const std::filesystem::path& dir, const diffusion::DiffusionConfig& config,
                                   const CorpusOptions& options, std::uint64_t seed) {
    require(options.count > 0, ErrorCode::kInvalidArgument, "corpus needs at least one clip");
    std::filesystem::create_directories(dir);
    static const synth::Section kCycle[] = {synth::Section::kIntro, synth::Section::kChorus, synth::Section::kOutro};
    nlohmann::json entries = nlohmann::json::array();
    for (int i = 0; i < options.count; ++i) {
        synth::PieceOptions po;
        po.duration = options.duration > 0.0 ? options.duration : config.clip_seconds();
        po.sample_rate = config.mel.sample_rate;
        po.section = options.section.value_or(kCycle[i % 3]);
        po.instrument = options.instrument;
        po.drums = options.drums;
        const synth::SyntheticPiece piece = synth::synthesize_piece(po, derive_seed(seed, static_cast<std::uint64_t>(i)));
        const std::string stem = clip_stem(i);
        dsp::write_wav(dir / (stem + ".wav"), piece.mix);
        io::write_json(dir / (stem + ".labels.json"),
                       {{"labels", nlohmann::json::array({{{"name", piece.instrument}, {"confidence", 1.0}}})}});
        io::write_json(dir / (stem + ".melody.json"), features::to_json(piece.melody));
        entries.push_back({{"wav", stem + ".wav"},
                           {"caption", piece.caption},
                           {"genre", piece.genre},
                           {"section", synth::section_name(piece.section)},
                           {"labels", stem + ".labels.json"}});
    }
    const std::filesystem::path manifest = dir / "manifest.json";
    io::write_json(manifest, {{"schema", "manifest/v1"}, {"entries", entries}});
    return manifest;
}

io::Dataset load_dataset(const diffusion::DiffusionModel& model, const std::filesystem::path& manifest,
                         std::optional<synth::Section> section) {
    io::IngestOptions options;
    options.sample_rate = model.config().mel.sample_rate;
    options.clip_seconds = model.config().clip_seconds();
    io::Dataset data = io::ingest(manifest, options);
    if (section) {
        std::erase_if(data.clips, [&](const io::IngestedClip& c) { return c.entry.section != section; });
        require(!data.clips.empty(), ErrorCode::kEmptyInput,
                "manifest has no " + synth::section_name(*section) + " clips");
    }
    require(!data.clips.empty(), ErrorCode::kEmptyInput, "manifest has no clips");
    return data;
}

void fit_stats(diffusion::DiffusionModel& model, const io::Dataset& data) {
    const auto& config = model.config();
    std::vector<std::vector<double>> mels;
    mels.reserve(data.clips.size());
    for (const auto& clip : data.clips) {
        mels.push_back(dsp::mel_features(clip.audio, config.mel, config.frames()));
    }
    model.stats = diffusion::LatentStats::fit(mels, config.bins());
}

const synth::TimbreProfile* clip_instrument(const io::IngestedClip& clip, const io::AppConfig& app) {
    if (!clip.labels || clip.labels->labels.empty()) {
        return nullptr;
    }
    return &app.profile(clip.labels->primary().name);
}

std::vector<diffusion::TrainingExample> make_examples(const diffusion::DiffusionModel& model, const io::Dataset& data,
                                                      const std::vector<adapter::ConditionType>& conditions,
                                                      const io::AppConfig& app) {
    const auto& config = model.config();
    std::vector<diffusion::TrainingExample> out;
    out.reserve(data.clips.size());
    for (const auto& clip : data.clips) {
        diffusion::TrainingExample e;
        e.latent = model.latent_of(clip.audio);
        e.tokens = model.tokens(clip.entry.caption);
        for (const adapter::ConditionType type : conditions) {
            const nn::Tensor cond =
                adapter::teacher_condition(clip.audio, type, config.mel, config.frames(), clip_instrument(clip, app));
            e.conditions.push_back(adapter::condition_to_nchw(cond, config.plan()));
        }
        out.push_back(std::move(e));
    }
    return out;
}

double TrainLog::final_loss() const {
    if (losses.empty()) {
        return 0.0;
    }
    const std::size_t tail = std::max<std::size_t>(1, losses.size() / 10);
    double sum = 0.0;
    for (std::size_t i = losses.size() - tail; i < losses.size(); ++i) {
        sum += losses[i];
    }
    return sum / static_cast<double>(tail);
}

TrainLog pretrain(diffusion::DiffusionModel& model, const std::vector<diffusion::TrainingExample>& examples,
                  int steps, std::uint64_t seed, const Progress& progress) {
    require(!examples.empty(), ErrorCode::kEmptyInput, "no training examples");
    require(steps >= 0, ErrorCode::kInvalidArgument, "negative step count");
    model.backbone().set_frozen(false);
    Rng rng(seed);
    nn::Adam optimizer(model.config().pretrain_learning_rate);
    TrainLog log;
    for (int s = 0; s < steps; ++s) {
        const double loss =
            diffusion::pretrain_step(model, draw_batch(examples, model.config().batch_size, rng), optimizer, rng);
        log.losses.push_back(loss);
        if (progress) {
            progress(s, loss);
        }
    }
    model.backbone().set_frozen(true);
    return log;
}

TrainLog train_adapter(diffusion::DiffusionModel& model, adapter::TEAdapter& adapter,
                       const std::vector<diffusion::TrainingExample>& examples, int steps, std::uint64_t seed,
                       std::size_t slot, const Progress& progress) {
    require(!examples.empty(), ErrorCode::kEmptyInput, "no training examples");
    require(steps >= 0, ErrorCode::kInvalidArgument, "negative step count");
    // The step function wants exactly one condition per example: the chosen slot.
    std::vector<diffusion::TrainingExample> view;
    view.reserve(examples.size());
    for (const auto& e : examples) {
        require(slot < e.conditions.size(), ErrorCode::kInvalidArgument, "condition slot out of range");
        view.push_back({e.latent, e.tokens, {e.conditions[slot]}});
    }
    model.backbone().set_frozen(true);
    Rng rng(seed);
    nn::Adam optimizer(model.config().learning_rate);
    TrainLog log;
    for (int s = 0; s < steps; ++s) {
        const double loss = diffusion::train_adapter_step(model, {&adapter}, {1.0},
                                                          draw_batch(view, model.config().batch_size, rng),
                                                          optimizer, rng);
        log.losses.push_back(loss);
        if (progress) {
            progress(s, loss);
        }
    }
    return log;
}

dsp::AudioClip generate(diffusion::DiffusionModel& model, const diffusion::TextCondition& text,
                        const std::vector<TeacherInput>& teachers, std::uint64_t seed) {
    const auto& config = model.config();
    adapter::AdapterGroup group;
    for (const auto& t : teachers) {
        require(t.audio != nullptr && t.adapter != nullptr, ErrorCode::kInvalidArgument,
                "teacher needs both audio and an adapter");
        group.members.push_back(
            {t.adapter, adapter::teacher_condition(*t.audio, t.condition, config.mel, config.frames(), t.instrument),
             t.weight});
    }
    const nn::Tensor latent = diffusion::sample(model, text, &group, seed);
    return model.decode_audio(latent, 0, derive_seed(seed, 1));
}

void normalize_peak(dsp::AudioClip& clip, double level) {
    const double p = dsp::peak(clip);
    if (p <= 0.0 || !std::isfinite(p)) {
        return;
    }
    const double gain = level / p;
    for (double& v : clip.samples) {
        v *= gain;
    }
}

}  // namespace teadapter::pipeline

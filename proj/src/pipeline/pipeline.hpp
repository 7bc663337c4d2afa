// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "adapter/teadapter.hpp"
#include "diffusion/model.hpp"
#include "io/config.hpp"
#include "io/dataset.hpp"
#include "synth/corpus.hpp"

namespace teadapter::pipeline {

// --- synthetic corpus on disk --------------------------------------------

struct CorpusOptions {
    int count = 16;
    double duration = 0.0;              // 0: the model clip length
    std::optional<synth::Section> section;  // unset: intro, chorus, outro in turn
    std::string instrument;             // empty: drawn per clip
    bool drums = true;
};

// Writes clip_NNN.wav, clip_NNN.labels.json and clip_NNN.melody.json (the
// rendered ground truth) plus manifest.json into `dir`. Returns the manifest
// path.
std::filesystem::path write_corpus(const std::filesystem::path& dir, const diffusion::DiffusionConfig& config,
                                   const CorpusOptions& options, std::uint64_t seed);

// --- training data -------------------------------------------------------

// Ingests the manifest at the model's sample rate and clip length.
io::Dataset load_dataset(const diffusion::DiffusionModel& model, const std::filesystem::path& manifest,
                         std::optional<synth::Section> section = std::nullopt);

// Fits the latent standardization on the clips' mel features.
void fit_stats(diffusion::DiffusionModel& model, const io::Dataset& data);

// Timbre for melody_instr conditions: the clip's highest-confidence label, or
// the neutral profile without labels.
const synth::TimbreProfile* clip_instrument(const io::IngestedClip& clip, const io::AppConfig& app);

// Latent, caption tokens and one teacher condition per requested type, with
// each clip acting as its own teacher.
std::vector<diffusion::TrainingExample> make_examples(const diffusion::DiffusionModel& model, const io::Dataset& data,
                                                      const std::vector<adapter::ConditionType>& conditions,
                                                      const io::AppConfig& app);

using Progress = std::function<void(int step, double loss)>;

struct TrainLog {
    std::vector<double> losses;
    // Mean over the last tenth of the run.
    double final_loss() const;
};

// Batches of config.batch_size drawn with replacement from `examples`.
TrainLog pretrain(diffusion::DiffusionModel& model, const std::vector<diffusion::TrainingExample>& examples,
                  int steps, std::uint64_t seed, const Progress& progress = {});

// Freezes the backbone, then trains `adapter` on condition slot `slot`.
TrainLog train_adapter(diffusion::DiffusionModel& model, adapter::TEAdapter& adapter,
                       const std::vector<diffusion::TrainingExample>& examples, int steps, std::uint64_t seed,
                       std::size_t slot = 0, const Progress& progress = {});

// --- generation ----------------------------------------------------------

struct TeacherInput {
    const dsp::AudioClip* audio = nullptr;
    adapter::TEAdapter* adapter = nullptr;
    adapter::ConditionType condition = adapter::ConditionType::kMelody;
    double weight = 1.0;
    const synth::TimbreProfile* instrument = nullptr;
};

// Samples one latent with the weighted teacher group and decodes it.
dsp::AudioClip generate(diffusion::DiffusionModel& model, const diffusion::TextCondition& text,
                        const std::vector<TeacherInput>& teachers, std::uint64_t seed);

// Scales the clip so its peak is `level`; silent clips are left alone.
void normalize_peak(dsp::AudioClip& clip, double level = synth::kPeakLevel);

}  // namespace teadapter::pipeline

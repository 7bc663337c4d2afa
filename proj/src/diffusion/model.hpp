// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <vector>

#include "adapter/teadapter.hpp"
#include "common/rng.hpp"
#include "diffusion/backbone.hpp"
#include "diffusion/config.hpp"
#include "diffusion/schedule.hpp"
#include "diffusion/text_encoder.hpp"
#include "dsp/audio.hpp"
#include "json.hpp"
#include "nn/layers.hpp"

namespace teadapter::diffusion {

// Per-bin affine standardization of log-mel features. The latent of a clip
// is its standardized mel; decoding inverts it.
struct LatentStats {
    std::vector<double> mean;
    std::vector<double> stdev;
    // Largest standardized magnitude seen in the fitted data (with margin);
    // the sampler clips its running clean-latent estimate to +-bound.
    double bound = kDefaultLatentBound;

    static constexpr double kDefaultLatentBound = 6.0;

    static LatentStats identity(int bins);
    // Frame-major mel arrays, each frames x bins.
    static LatentStats fit(const std::vector<std::vector<double>>& mels, int bins);
};

// Frozen (after pretraining) backbone plus everything needed to move between
// audio and latents.
class DiffusionModel {
public:
    explicit DiffusionModel(const DiffusionConfig& config, std::uint64_t seed = 0);

    const DiffusionConfig& config() const { return config_; }
    const DiffusionSchedule& schedule() const { return schedule_; }
    ToyBackbone& backbone() { return backbone_; }

    LatentStats stats;
    // Free-form record of how the backbone was produced (e.g. pretrain loss).
    nlohmann::json info = nlohmann::json::object();

    // [1, 1, frames, bins] latent from frame-major mel features.
    nn::Tensor encode(const std::vector<double>& mel, int frames) const;
    // Mel features of the clip at the configured latent length, standardized.
    nn::Tensor latent_of(const dsp::AudioClip& clip) const;
    // Item `index` of a [N, 1, frames, bins] latent back to mel features.
    std::vector<double> decode_mel(const nn::Tensor& latent, int index = 0) const;
    dsp::AudioClip decode_audio(const nn::Tensor& latent, int index = 0, std::uint64_t seed = 0) const;

    std::vector<int> tokens(const std::string& text) const;

    void save(const std::filesystem::path& dir);
    // Throws NotLoaded when there is no backbone checkpoint in `dir`.
    static std::unique_ptr<DiffusionModel> load(const std::filesystem::path& dir);

private:
    DiffusionConfig config_;
    DiffusionSchedule schedule_;
    ToyBackbone backbone_;
};

struct TrainingExample {
    nn::Tensor latent;                    // [1, 1, frames, bins]
    std::vector<int> tokens;
    std::vector<nn::Tensor> conditions;   // one [1, 1, frames, bins] per adapter
};

// One unconditional epsilon-prediction step on the backbone itself.
double pretrain_step(DiffusionModel& model, const std::vector<const TrainingExample*>& batch, nn::Adam& optimizer,
                     Rng& rng);

// One epsilon-prediction step through a frozen backbone with the weighted
// adapter group injected; only adapter parameters move. Throws
// ContractViolation if any backbone parameter is trainable.
double train_adapter_step(DiffusionModel& model, const std::vector<adapter::TEAdapter*>& adapters,
                          const std::vector<double>& weights, const std::vector<const TrainingExample*>& batch,
                          nn::Adam& optimizer, Rng& rng);

// Known-region replacement: frames flagged 1 are regenerated, frames flagged
// 0 are clamped to the re-noised known latent at every step and restored
// exactly at the end.
struct InpaintSpec {
    nn::Tensor known;                  // [N, 1, frames, bins]
    std::vector<std::uint8_t> regenerate;  // per frame
    std::uint64_t noise_seed = 0;
};

struct SampleOptions {
    const adapter::MultiScaleFeatures* features = nullptr;  // batched like the latent
    const InpaintSpec* inpaint = nullptr;
    int frames = 0;  // 0: the configured latent length
};

// Ancestral DDPM sampling from T down to 1, one seed per batch item. Each
// step forms the posterior mean from the clipped clean-latent estimate.
nn::Tensor sample(DiffusionModel& model, const std::vector<std::vector<int>>& tokens,
                  const std::vector<std::uint64_t>& seeds, const SampleOptions& options = {});

// Single-item convenience form; the group's features are computed once.
nn::Tensor sample(DiffusionModel& model, const TextCondition& text, adapter::AdapterGroup* group, std::uint64_t seed);

// Stacks single-item feature sets along the batch axis.
adapter::MultiScaleFeatures stack_features(const std::vector<adapter::MultiScaleFeatures>& items);

nn::Tensor stack_batch(const std::vector<const nn::Tensor*>& items);

}  // namespace teadapter::diffusion

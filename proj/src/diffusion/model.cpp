// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#include "diffusion/model.hpp"

#include <algorithm>
#include <cmath>

#include "common/error.hpp"
#include "common/fpenv.hpp"
#include "dsp/mel.hpp"
#include "nn/serialize.hpp"

namespace teadapter::diffusion {
namespace {

constexpr double kMinStdev = 1e-3;
constexpr double kBoundMargin = 1.1;

std::size_t item_size(const nn::Tensor& t) { return t.numel() / static_cast<std::size_t>(t.dim(0)); }

nn::Tensor gaussian_like(const nn::Tensor& like, Rng& rng) {
    nn::Tensor out(like.shape());
    for (auto& v : out.data()) {
        v = static_cast<nn::Real>(rng.normal());
    }
    return out;
}

struct NoisedBatch {
    nn::Tensor z0;
    nn::Tensor noise;
    nn::Tensor zt;
    std::vector<int> steps;
    std::vector<std::vector<int>> tokens;
};

NoisedBatch noise_batch(const DiffusionModel& model, const std::vector<const TrainingExample*>& batch, Rng& rng) {
    require(!batch.empty(), ErrorCode::kInvalidArgument, "training batch is empty");
    std::vector<const nn::Tensor*> latents;
    NoisedBatch nb;
    for (const TrainingExample* ex : batch) {
        latents.push_back(&ex->latent);
        nb.tokens.push_back(ex->tokens);
        nb.steps.push_back(rng.uniform_int(1, model.schedule().steps));
    }
    nb.z0 = stack_batch(latents);
    nb.noise = gaussian_like(nb.z0, rng);
    nb.zt = nn::Tensor(nb.z0.shape());
    const std::size_t per = item_size(nb.z0);
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const double ab = model.schedule().alpha_bar(nb.steps[i]);
        const double a = std::sqrt(ab), b = std::sqrt(1.0 - ab);
        for (std::size_t k = i * per; k < (i + 1) * per; ++k) {
            nb.zt[k] = static_cast<nn::Real>(a * nb.z0[k] + b * nb.noise[k]);
        }
    }
    return nb;
}

}  // namespace

LatentStats LatentStats::identity(int bins) {
    return {std::vector<double>(static_cast<std::size_t>(bins), 0.0), std::vector<double>(static_cast<std::size_t>(bins), 1.0)};
}

LatentStats LatentStats::fit(const std::vector<std::vector<double>>& mels, int bins) {
    require(!mels.empty(), ErrorCode::kEmptyInput, "no mel arrays to fit latent statistics");
    LatentStats s = identity(bins);
    std::vector<double> sum(static_cast<std::size_t>(bins), 0.0), sq(static_cast<std::size_t>(bins), 0.0);
    double count = 0.0;
    for (const auto& mel : mels) {
        require(mel.size() % static_cast<std::size_t>(bins) == 0, ErrorCode::kShapeError, "mel size not a multiple of bins");
        for (std::size_t i = 0; i < mel.size(); ++i) {
            sum[i % static_cast<std::size_t>(bins)] += mel[i];
        }
        count += static_cast<double>(mel.size() / static_cast<std::size_t>(bins));
    }
    for (int b = 0; b < bins; ++b) {
        s.mean[static_cast<std::size_t>(b)] = sum[static_cast<std::size_t>(b)] / count;
    }
    for (const auto& mel : mels) {
        for (std::size_t i = 0; i < mel.size(); ++i) {
            const double d = mel[i] - s.mean[i % static_cast<std::size_t>(bins)];
            sq[i % static_cast<std::size_t>(bins)] += d * d;
        }
    }
    for (int b = 0; b < bins; ++b) {
        s.stdev[static_cast<std::size_t>(b)] = std::max(kMinStdev, std::sqrt(sq[static_cast<std::size_t>(b)] / count));
    }
    double peak = 0.0;
    for (const auto& mel : mels) {
        for (std::size_t i = 0; i < mel.size(); ++i) {
            const std::size_t b = i % static_cast<std::size_t>(bins);
            peak = std::max(peak, std::abs(mel[i] - s.mean[b]) / s.stdev[b]);
        }
    }
    s.bound = std::max(1.0, kBoundMargin * peak);
    return s;
}

DiffusionModel::DiffusionModel(const DiffusionConfig& config, std::uint64_t seed)
    : stats(LatentStats::identity(config.bins())),
      config_(config),
      schedule_(linear_schedule(config.steps, config.beta_start, config.beta_end)),
      backbone_(config.backbone, seed) {
    config_.validate();
}

nn::Tensor DiffusionModel::encode(const std::vector<double>& mel, int frames) const {
    const int bins = config_.bins();
    require(mel.size() == static_cast<std::size_t>(frames) * bins, ErrorCode::kShapeError, "mel size mismatch");
    nn::Tensor z({1, 1, frames, bins});
    for (std::size_t i = 0; i < mel.size(); ++i) {
        const std::size_t b = i % static_cast<std::size_t>(bins);
        z[i] = static_cast<nn::Real>((mel[i] - stats.mean[b]) / stats.stdev[b]);
    }
    return z;
}

nn::Tensor DiffusionModel::latent_of(const dsp::AudioClip& clip) const {
    return encode(dsp::mel_features(clip, config_.mel, config_.frames()), config_.frames());
}

std::vector<double> DiffusionModel::decode_mel(const nn::Tensor& latent, int index) const {
    require(latent.rank() == 4 && latent.dim(1) == 1 && latent.dim(3) == config_.bins() && index >= 0 &&
                index < latent.dim(0),
            ErrorCode::kShapeError, "cannot decode latent " + nn::shape_string(latent.shape()));
    const int bins = config_.bins();
    const std::size_t per = item_size(latent);
    std::vector<double> mel(per);
    for (std::size_t i = 0; i < per; ++i) {
        const std::size_t b = i % static_cast<std::size_t>(bins);
        mel[i] = latent[static_cast<std::size_t>(index) * per + i] * stats.stdev[b] + stats.mean[b];
    }
    return mel;
}

dsp::AudioClip DiffusionModel::decode_audio(const nn::Tensor& latent, int index, std::uint64_t seed) const {
    return dsp::mel_to_audio(decode_mel(latent, index), latent.dim(2), config_.mel, seed);
}

std::vector<int> DiffusionModel::tokens(const std::string& text) const { return token_ids(text, config_.backbone.vocab); }

void DiffusionModel::save(const std::filesystem::path& dir) {
    nlohmann::json meta = {{"kind", "backbone"},
                           {"config", to_json(config_)},
                           {"latent_mean", stats.mean},
                           {"latent_std", stats.stdev},
                           {"latent_bound", stats.bound},
                           {"info", info}};
    nn::save_checkpoint(dir, backbone_.parameters(), meta);
}

std::unique_ptr<DiffusionModel> DiffusionModel::load(const std::filesystem::path& dir) {
    const nlohmann::json manifest = nn::read_manifest(dir);
    const nlohmann::json& meta = manifest.at("meta");
    require(meta.value("kind", "") == "backbone", ErrorCode::kSchemaError, dir.string() + " is not a backbone checkpoint");
    auto model = std::make_unique<DiffusionModel>(config_from_json(meta.at("config")), 0);
    nn::load_checkpoint(dir, model->backbone_.parameters());
    model->stats.mean = meta.at("latent_mean").get<std::vector<double>>();
    model->stats.stdev = meta.at("latent_std").get<std::vector<double>>();
    model->stats.bound = meta.value("latent_bound", LatentStats::kDefaultLatentBound);
    model->info = meta.value("info", nlohmann::json::object());
    require(static_cast<int>(model->stats.mean.size()) == model->config_.bins() &&
                model->stats.stdev.size() == model->stats.mean.size(),
            ErrorCode::kSchemaError, "latent statistics do not match the latent width");
    return model;
}

nn::Tensor stack_batch(const std::vector<const nn::Tensor*>& items) {
    require(!items.empty(), ErrorCode::kInvalidArgument, "nothing to stack");
    const nn::Shape& first = items.front()->shape();
    require(first.size() == 4 && first[0] == 1, ErrorCode::kShapeError, "stack expects [1, C, H, W] items");
    nn::Shape shape = first;
    shape[0] = static_cast<int>(items.size());
    nn::Tensor out(shape);
    const std::size_t per = items.front()->numel();
    for (std::size_t i = 0; i < items.size(); ++i) {
        require(items[i]->shape() == first, ErrorCode::kShapeError, "stacked items differ in shape");
        std::copy(items[i]->storage().begin(), items[i]->storage().end(),
                  out.storage().begin() + static_cast<long>(i * per));
    }
    return out;
}

adapter::MultiScaleFeatures stack_features(const std::vector<adapter::MultiScaleFeatures>& items) {
    require(!items.empty(), ErrorCode::kInvalidArgument, "nothing to stack");
    adapter::MultiScaleFeatures out;
    for (std::size_t j = 0; j < items.front().maps.size(); ++j) {
        std::vector<const nn::Tensor*> maps;
        for (const auto& f : items) {
            maps.push_back(&f.maps.at(j));
        }
        out.maps.push_back(stack_batch(maps));
    }
    return out;
}

double pretrain_step(DiffusionModel& model, const std::vector<const TrainingExample*>& batch, nn::Adam& optimizer,
                     Rng& rng) {
    const ScopedFlushDenormals flush;
    const auto params = model.backbone().parameters();
    NoisedBatch nb = noise_batch(model, batch, rng);
    nn::zero_grads(params);
    nn::Tape tape;
    const nn::Var pred = model.backbone().forward(tape, tape.constant(nb.zt), nb.steps, nb.tokens);
    const nn::Var loss = nn::mse_loss(pred, tape.constant(nb.noise));
    tape.backward(loss);
    optimizer.step(params);
    return loss.value()[0];
}

double train_adapter_step(DiffusionModel& model, const std::vector<adapter::TEAdapter*>& adapters,
                          const std::vector<double>& weights, const std::vector<const TrainingExample*>& batch,
                          nn::Adam& optimizer, Rng& rng) {
    const ScopedFlushDenormals flush;
    require(model.backbone().all_frozen(), ErrorCode::kContractViolation,
            "backbone has trainable parameters; freeze it before adapter training");
    require(!adapters.empty() && adapters.size() == weights.size(), ErrorCode::kInvalidArgument,
            "one weight per adapter");
    std::vector<nn::Parameter*> params;
    for (auto* a : adapters) {
        const auto p = a->parameters();
        params.insert(params.end(), p.begin(), p.end());
    }
    NoisedBatch nb = noise_batch(model, batch, rng);
    nn::zero_grads(params);
    nn::Tape tape;
    std::vector<std::vector<nn::Var>> features;
    for (std::size_t i = 0; i < adapters.size(); ++i) {
        std::vector<const nn::Tensor*> conds;
        for (const TrainingExample* ex : batch) {
            require(ex->conditions.size() == adapters.size(), ErrorCode::kShapeError,
                    "each example needs one condition per adapter");
            conds.push_back(&ex->conditions[i]);
        }
        features.push_back(adapters[i]->forward(tape, tape.constant(stack_batch(conds))));
    }
    const auto injection = adapter::combine_vars(features, weights);
    const nn::Var pred = model.backbone().forward(tape, tape.constant(nb.zt), nb.steps, nb.tokens, &injection);
    const nn::Var loss = nn::mse_loss(pred, tape.constant(nb.noise));
    tape.backward(loss);
    optimizer.step(params);
    return loss.value()[0];
}

nn::Tensor sample(DiffusionModel& model, const std::vector<std::vector<int>>& tokens,
                  const std::vector<std::uint64_t>& seeds, const SampleOptions& options) {
    const ScopedFlushDenormals flush;
    const int n = static_cast<int>(seeds.size());
    require(n > 0 && tokens.size() == seeds.size(), ErrorCode::kInvalidArgument, "one token list per seed");
    const int frames = options.frames > 0 ? options.frames : model.config().frames();
    const int bins = model.config().bins();
    const DiffusionSchedule& sched = model.schedule();
    nn::Tensor z({n, 1, frames, bins});
    const std::size_t per = z.numel() / static_cast<std::size_t>(n);
    const std::size_t row = static_cast<std::size_t>(bins);

    std::vector<Rng> rngs;
    std::vector<Rng> known_rngs;
    for (std::uint64_t s : seeds) {
        rngs.emplace_back(s);
    }
    const InpaintSpec* inpaint = options.inpaint;
    if (inpaint != nullptr) {
        require(inpaint->known.shape() == z.shape(), ErrorCode::kShapeError, "inpaint known latent shape mismatch");
        require(inpaint->regenerate.size() == static_cast<std::size_t>(frames), ErrorCode::kShapeError,
                "inpaint mask length must equal the latent frame count");
        for (int i = 0; i < n; ++i) {
            known_rngs.emplace_back(derive_seed(inpaint->noise_seed, static_cast<std::uint64_t>(i)));
        }
    }
    for (int i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < per; ++k) {
            z[static_cast<std::size_t>(i) * per + k] = static_cast<nn::Real>(rngs[static_cast<std::size_t>(i)].normal());
        }
    }
    auto clamp_known = [&](int t) {
        for (int i = 0; i < n; ++i) {
            Rng& rng = known_rngs[static_cast<std::size_t>(i)];
            const double a = t == 0 ? 1.0 : std::sqrt(sched.alpha_bar(t));
            const double b = t == 0 ? 0.0 : std::sqrt(1.0 - sched.alpha_bar(t));
            for (int f = 0; f < frames; ++f) {
                if (inpaint->regenerate[static_cast<std::size_t>(f)]) {
                    continue;
                }
                const std::size_t base = static_cast<std::size_t>(i) * per + static_cast<std::size_t>(f) * row;
                for (std::size_t k = base; k < base + row; ++k) {
                    z[k] = t == 0 ? inpaint->known[k]
                                  : static_cast<nn::Real>(a * inpaint->known[k] + b * rng.normal());
                }
            }
        }
    };

    std::vector<std::vector<int>> toks = tokens;
    for (int t = sched.steps; t >= 1; --t) {
        if (inpaint != nullptr) {
            clamp_known(t);
        }
        nn::Tape tape(false);
        std::vector<nn::Var> injection;
        if (options.features != nullptr) {
            for (const auto& m : options.features->maps) {
                injection.push_back(tape.constant(m));
            }
        }
        const std::vector<int> steps(static_cast<std::size_t>(n), t);
        const nn::Var eps = model.backbone().forward(tape, tape.constant(z), steps, toks,
                                                     options.features != nullptr ? &injection : nullptr);
        const nn::Tensor& e = eps.value();
        // Posterior q(z_{t-1} | z_t, x0) with x0 recovered from the noise
        // estimate and clipped to the data range.
        const double ab = sched.alpha_bar(t);
        const double ab_prev = sched.alpha_bar(t - 1);
        const double beta = sched.beta(t);
        const double c_x0 = std::sqrt(ab_prev) * beta / (1.0 - ab);
        const double c_zt = std::sqrt(sched.alpha(t)) * (1.0 - ab_prev) / (1.0 - ab);
        const double sigma = t > 1 ? std::sqrt(sched.posterior_variance(t)) : 0.0;
        const double bound = model.stats.bound;
        for (int i = 0; i < n; ++i) {
            Rng& rng = rngs[static_cast<std::size_t>(i)];
            for (std::size_t k = static_cast<std::size_t>(i) * per; k < static_cast<std::size_t>(i + 1) * per; ++k) {
                const double x0 = std::clamp((z[k] - std::sqrt(1.0 - ab) * e[k]) / std::sqrt(ab), -bound, bound);
                double v = c_x0 * x0 + c_zt * z[k];
                if (t > 1) {
                    v += sigma * rng.normal();
                }
                z[k] = static_cast<nn::Real>(v);
            }
        }
    }
    if (inpaint != nullptr) {
        clamp_known(0);
    }
    return z;
}

nn::Tensor sample(DiffusionModel& model, const TextCondition& text, adapter::AdapterGroup* group, std::uint64_t seed) {
    SampleOptions options;
    adapter::MultiScaleFeatures features;
    if (group != nullptr && !group->members.empty()) {
        features = adapter::group_combine(*group);
        options.features = &features;
    }
    return sample(model, {model.tokens(text.text())}, {seed}, options);
}

}  // namespace teadapter::diffusion

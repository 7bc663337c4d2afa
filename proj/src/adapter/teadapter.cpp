// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#include "adapter/teadapter.hpp"

#include "common/error.hpp"
#include "common/rng.hpp"
#include "nn/serialize.hpp"

namespace teadapter::adapter {

std::string condition_name(ConditionType type) {
    switch (type) {
        case ConditionType::kChord: return "chord";
        case ConditionType::kMelody: return "melody";
        case ConditionType::kMelodyInstrument: return "melody_instr";
    }
    return "melody";
}

ConditionType parse_condition(const std::string& name) {
    if (name == "chord") {
        return ConditionType::kChord;
    }
    if (name == "melody") {
        return ConditionType::kMelody;
    }
    if (name == "melody_instr" || name == "melody+instrument") {
        return ConditionType::kMelodyInstrument;
    }
    fail(ErrorCode::kInvalidArgument, "unknown condition type '" + name + "'");
}

TEAdapter::TEAdapter(const ScalePlan& plan, std::uint64_t seed) : plan_(plan) {
    plan_.validate();
    Rng rng(seed);
    const auto& ch = plan_.channels;
    conv_in_ = nn::Conv2d("adapter.conv_in", plan_.input_channels(), ch[0], 3, 1, 1, rng);
    for (int s = 0; s < kStages; ++s) {
        const int in = s == 0 ? ch[0] : ch[static_cast<std::size_t>(s - 1)];
        const int out = ch[static_cast<std::size_t>(s)];
        const std::string name = "adapter.block" + std::to_string(s);
        if (s > 0) {
            down_.emplace_back("adapter.down" + std::to_string(s), in, in, 3, 2, 1, rng);
        }
        blocks_.emplace_back(name, in, out, rng);
        out_.emplace_back(name + ".out", out, out, 1, 1, 0, rng, nn::Init::kZero);
    }
}

std::vector<nn::Var> TEAdapter::forward(nn::Tape& tape, const nn::Var& condition, bool any_length) {
    const auto& shape = condition.shape();
    const bool length_ok = shape.size() == 4 &&
                           (any_length ? shape[2] > 0 && shape[2] % plan_.unshuffle == 0 : shape[2] == plan_.frames);
    require(length_ok && shape[1] == 1 && shape[3] == plan_.bins,
            ErrorCode::kShapeError,
            "adapter expects [N, 1, " + std::to_string(plan_.frames) + ", " + std::to_string(plan_.bins) + "], got " +
                nn::shape_string(shape));
    nn::Var h = conv_in_(tape, nn::pixel_unshuffle(condition, plan_.unshuffle));
    std::vector<nn::Var> maps;
    for (int s = 0; s < kStages; ++s) {
        if (s > 0) {
            h = down_[static_cast<std::size_t>(s - 1)](tape, h);
        }
        h = blocks_[static_cast<std::size_t>(s)](tape, h);
        maps.push_back(out_[static_cast<std::size_t>(s)](tape, h));
    }
    return maps;
}

MultiScaleFeatures TEAdapter::features(const nn::Tensor& condition, bool any_length) {
    nn::Tape tape(false);
    const auto maps = forward(tape, tape.constant(condition_to_nchw(condition, plan_, any_length)), any_length);
    MultiScaleFeatures out;
    for (const auto& m : maps) {
        out.maps.push_back(m.value());
    }
    return out;
}

std::vector<nn::Parameter*> TEAdapter::parameters() {
    std::vector<nn::Parameter*> params;
    conv_in_.collect(params);
    for (int s = 0; s < kStages; ++s) {
        if (s > 0) {
            down_[static_cast<std::size_t>(s - 1)].collect(params);
        }
        blocks_[static_cast<std::size_t>(s)].collect(params);
        out_[static_cast<std::size_t>(s)].collect(params);
    }
    return params;
}

nn::Tensor condition_to_nchw(const nn::Tensor& condition, const ScalePlan& plan, bool any_length) {
    const auto& s = condition.shape();
    if (s.size() == 3 && (any_length || s[0] == plan.frames) && s[1] == plan.bins && s[2] == 1) {
        return condition.reshaped({1, 1, s[0], plan.bins});
    }
    require(s.size() == 4 && s[1] == 1 && (any_length || s[2] == plan.frames) && s[3] == plan.bins, ErrorCode::kShapeError,
            "condition shape " + nn::shape_string(s) + " does not match latent " + std::to_string(plan.frames) + "x" +
                std::to_string(plan.bins));
    return condition;
}

MultiScaleFeatures group_combine(const std::vector<MultiScaleFeatures>& features, const std::vector<double>& weights) {
    require(!features.empty() && features.size() == weights.size(), ErrorCode::kInvalidArgument,
            "group needs one weight per member and at least one member");
    MultiScaleFeatures out;
    const auto& first = features.front().maps;
    for (std::size_t j = 0; j < first.size(); ++j) {
        nn::Tensor acc = nn::Tensor::zeros_like(first[j]);
        for (std::size_t i = 0; i < features.size(); ++i) {
            require(features[i].maps.size() == first.size(), ErrorCode::kShapeError, "members emit different map counts");
            const nn::Tensor& m = features[i].maps[j];
            nn::require_same_shape(acc, m, "group_combine");
            const auto w = static_cast<nn::Real>(weights[i]);
            for (std::size_t k = 0; k < acc.numel(); ++k) {
                acc[k] += w * m[k];
            }
        }
        out.maps.push_back(std::move(acc));
    }
    return out;
}

MultiScaleFeatures group_combine(AdapterGroup& group) {
    std::vector<MultiScaleFeatures> features;
    std::vector<double> weights;
    for (auto& m : group.members) {
        require(m.adapter != nullptr, ErrorCode::kNotLoaded, "adapter group member has no adapter");
        features.push_back(m.adapter->features(m.condition));
        weights.push_back(m.weight);
    }
    return group_combine(features, weights);
}

MultiScaleFeatures inject(const MultiScaleFeatures& encoder_maps, const MultiScaleFeatures& features) {
    require(encoder_maps.maps.size() == features.maps.size(), ErrorCode::kShapeError, "inject needs equal map counts");
    MultiScaleFeatures out = encoder_maps;
    for (std::size_t j = 0; j < out.maps.size(); ++j) {
        nn::require_same_shape(out.maps[j], features.maps[j], "inject");
        out.maps[j] += features.maps[j];
    }
    return out;
}

std::vector<nn::Var> combine_vars(const std::vector<std::vector<nn::Var>>& features, const std::vector<double>& weights) {
    require(!features.empty() && features.size() == weights.size(), ErrorCode::kInvalidArgument,
            "group needs one weight per member and at least one member");
    std::vector<nn::Var> out;
    for (std::size_t j = 0; j < features.front().size(); ++j) {
        nn::Var acc = nn::scale(features[0][j], static_cast<nn::Real>(weights[0]));
        for (std::size_t i = 1; i < features.size(); ++i) {
            acc = nn::add(acc, nn::scale(features[i][j], static_cast<nn::Real>(weights[i])));
        }
        out.push_back(acc);
    }
    return out;
}

void save_adapter(const std::filesystem::path& dir, TEAdapter& adapter, const AdapterTags& tags) {
    const nlohmann::json meta = {{"kind", "teadapter"},
                                 {"condition", condition_name(tags.condition)},
                                 {"section", tags.section},
                                 {"plan", to_json(adapter.plan())}};
    nn::save_checkpoint(dir, adapter.parameters(), meta);
}

std::unique_ptr<TEAdapter> load_adapter(const std::filesystem::path& dir, AdapterTags* tags) {
    const nlohmann::json manifest = nn::read_manifest(dir);
    const nlohmann::json& meta = manifest.at("meta");
    require(meta.value("kind", "") == "teadapter", ErrorCode::kSchemaError, dir.string() + " is not an adapter checkpoint");
    auto adapter = std::make_unique<TEAdapter>(plan_from_json(meta.at("plan")), 0);
    nn::load_checkpoint(dir, adapter->parameters());
    if (tags != nullptr) {
        tags->condition = parse_condition(meta.at("condition").get<std::string>());
        tags->section = meta.at("section").get<std::string>();
    }
    return adapter;
}

}  // namespace teadapter::adapter

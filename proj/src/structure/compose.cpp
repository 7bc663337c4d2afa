// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#include "structure/compose.hpp"

#include <algorithm>
#include <cmath>

#include "adapter/conditions.hpp"
#include "common/error.hpp"
#include "common/rng.hpp"
#include "dsp/mel.hpp"

namespace teadapter::structure {
namespace {

constexpr std::uint64_t kJunctionStream = 1000;

nn::Tensor slice_frames(const nn::Tensor& latent, int begin, int end) {
    const int bins = latent.dim(3);
    nn::Tensor out({1, 1, end - begin, bins});
    std::copy(latent.storage().begin() + static_cast<long>(begin) * bins,
              latent.storage().begin() + static_cast<long>(end) * bins, out.storage().begin());
    return out;
}

nn::Tensor concat_frames(const std::vector<nn::Tensor>& parts) {
    int frames = 0;
    for (const auto& p : parts) {
        frames += p.dim(2);
    }
    nn::Tensor out({1, 1, frames, parts.front().dim(3)});
    auto it = out.storage().begin();
    for (const auto& p : parts) {
        it = std::copy(p.storage().begin(), p.storage().end(), it);
    }
    return out;
}

void check_section(const SectionSpec& s) {
    require(s.type != synth::Section::kGeneric, ErrorCode::kSchemaError,
            "plan sections must be intro, chorus or outro");
    require(std::isfinite(s.duration) && s.duration > 0.0, ErrorCode::kSchemaError,
            "section duration must be positive");
    for (const auto& t : s.teachers) {
        require(!t.path.empty(), ErrorCode::kSchemaError, "teacher reference without a path");
        require(std::isfinite(t.weight), ErrorCode::kSchemaError, "teacher weight must be finite");
    }
}

}  // namespace

nlohmann::json to_json(const SegmentPlan& plan) {
    nlohmann::json sections = nlohmann::json::array();
    for (const auto& s : plan.sections) {
        nlohmann::json teachers = nlohmann::json::array();
        for (const auto& t : s.teachers) {
            nlohmann::json tj = {{"path", t.path}, {"condition", adapter::condition_name(t.condition)}, {"weight", t.weight}};
            if (!t.instrument.empty()) {
                tj["instrument"] = t.instrument;
            }
            teachers.push_back(tj);
        }
        nlohmann::json sj = {{"section", synth::section_name(s.type)},
                             {"duration", s.duration},
                             {"prompt", s.prompt},
                             {"teachers", teachers}};
        if (s.mode) {
            sj["mode"] = diffusion::mode_name(*s.mode);
        }
        if (s.tempo_bpm) {
            sj["tempo"] = *s.tempo_bpm;
        }
        sections.push_back(sj);
    }
    return {{"schema", "plan/v1"}, {"sections", sections}};
}

SegmentPlan plan_from_json(const nlohmann::json& j) {
    try {
        require(j.is_object() && j.value("schema", "") == "plan/v1", ErrorCode::kSchemaError,
                "expected a plan/v1 document");
        SegmentPlan plan;
        for (const auto& sj : j.at("sections")) {
            SectionSpec s;
            s.type = synth::parse_section(sj.at("section").get<std::string>());
            s.duration = sj.at("duration").get<double>();
            s.prompt = sj.value("prompt", "");
            if (sj.contains("mode")) {
                s.mode = diffusion::parse_mode(sj.at("mode").get<std::string>());
            }
            if (sj.contains("tempo")) {
                s.tempo_bpm = sj.at("tempo").get<int>();
            }
            for (const auto& tj : sj.value("teachers", nlohmann::json::array())) {
                TeacherRef t;
                t.path = tj.at("path").get<std::string>();
                t.condition = adapter::parse_condition(tj.at("condition").get<std::string>());
                t.weight = tj.value("weight", 1.0);
                t.instrument = tj.value("instrument", "");
                s.teachers.push_back(t);
            }
            check_section(s);
            plan.sections.push_back(std::move(s));
        }
        require(!plan.sections.empty(), ErrorCode::kSchemaError, "plan has no sections");
        return plan;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::kSchemaError, std::string("malformed plan: ") + e.what());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::kSchemaError) {
            throw;
        }
        fail(ErrorCode::kSchemaError, std::string("invalid plan: ") + e.what());
    }
}

InpaintMask junction_mask(int total_frames, int junction, int half_width, int window_frames) {
    require(total_frames > 0 && junction >= 0 && junction <= total_frames && half_width >= 0,
            ErrorCode::kInvalidArgument, "junction outside the latent");
    require(window_frames > 0, ErrorCode::kInvalidArgument, "inpaint window must be positive");
    InpaintMask mask;
    mask.regenerate.assign(static_cast<std::size_t>(total_frames), 0);
    const int window = std::min(window_frames, total_frames);
    mask.window_start = std::clamp(junction - window / 2, 0, total_frames - window);
    mask.window_end = mask.window_start + window;
    const int lo = std::max(mask.window_start, junction - half_width);
    const int hi = std::min(mask.window_end, junction + half_width);
    for (int f = lo; f < hi; ++f) {
        mask.regenerate[static_cast<std::size_t>(f)] = 1;
    }
    return mask;
}

nn::Tensor inpaint(diffusion::DiffusionModel& model, const nn::Tensor& latent, const InpaintMask& mask,
                   const std::vector<int>& tokens, std::uint64_t seed, const adapter::MultiScaleFeatures* features) {
    require(latent.rank() == 4 && latent.dim(0) == 1 && latent.dim(1) == 1, ErrorCode::kShapeError,
            "inpaint expects a [1, 1, frames, bins] latent");
    require(mask.frames() == latent.dim(2), ErrorCode::kShapeError,
            "mask covers " + std::to_string(mask.frames()) + " frames, latent has " + std::to_string(latent.dim(2)));
    require(0 <= mask.window_start && mask.window_start < mask.window_end && mask.window_end <= mask.frames(),
            ErrorCode::kShapeError, "mask window outside the latent");
    for (int f = 0; f < mask.frames(); ++f) {
        require(!mask.regenerate[static_cast<std::size_t>(f)] || (f >= mask.window_start && f < mask.window_end),
                ErrorCode::kShapeError, "mask flags a frame outside its window");
    }
    if (std::none_of(mask.regenerate.begin(), mask.regenerate.end(), [](std::uint8_t v) { return v != 0; })) {
        return latent;
    }
    int start = mask.window_start, end = mask.window_end;
    if (features == nullptr) {
        // Widen to a length the backbone can downsample; the added frames are
        // unflagged, so they come back as the known latent.
        const int width = std::min(mask.frames() / kFrameQuantum * kFrameQuantum,
                                   (end - start + kFrameQuantum - 1) / kFrameQuantum * kFrameQuantum);
        if (width >= end - start) {
            end = std::min(mask.frames(), start + width);
            start = end - width;
        }
    }
    diffusion::InpaintSpec spec;
    spec.known = slice_frames(latent, start, end);
    spec.regenerate.assign(mask.regenerate.begin() + start, mask.regenerate.begin() + end);
    spec.noise_seed = derive_seed(seed, 1);
    diffusion::SampleOptions options;
    options.inpaint = &spec;
    options.features = features;
    options.frames = end - start;
    const nn::Tensor window = diffusion::sample(model, {tokens}, {seed}, options);
    // Unflagged window frames are copied back from the input so they stay
    // bit-exact whatever the sampler's final step does.
    nn::Tensor out = latent;
    const int bins = latent.dim(3);
    for (int f = start; f < end; ++f) {
        if (mask.regenerate[static_cast<std::size_t>(f)]) {
            std::copy_n(window.storage().begin() + static_cast<long>(f - start) * bins, bins,
                        out.storage().begin() + static_cast<long>(f) * bins);
        }
    }
    return out;
}

void AdapterLibrary::add(const std::string& section, adapter::ConditionType condition,
                         std::unique_ptr<adapter::TEAdapter> a) {
    require(a != nullptr, ErrorCode::kInvalidArgument, "null adapter");
    adapters_[{section, condition}] = std::move(a);
}

bool AdapterLibrary::contains(const std::string& section, adapter::ConditionType condition) const {
    return adapters_.count({section, condition}) > 0;
}

adapter::TEAdapter& AdapterLibrary::get(const std::string& section, adapter::ConditionType condition) const {
    auto it = adapters_.find({section, condition});
    if (it == adapters_.end()) {
        // Adapters trained on every clip serve sections without their own.
        it = adapters_.find({synth::section_name(synth::Section::kGeneric), condition});
    }
    require(it != adapters_.end(), ErrorCode::kNotLoaded,
            "no " + adapter::condition_name(condition) + " adapter for section " + section);
    return *it->second;
}

int section_frames(const diffusion::DiffusionConfig& config, double seconds) {
    require(seconds > 0.0, ErrorCode::kInvalidArgument, "section duration must be positive");
    const int natural = static_cast<int>(std::lround(seconds * config.mel.sample_rate / config.mel.hop_size)) + 1;
    return (natural + kFrameQuantum - 1) / kFrameQuantum * kFrameQuantum;
}

ComposeResult compose(diffusion::DiffusionModel& model, const SegmentPlan& plan,
                      const std::vector<std::vector<dsp::AudioClip>>& teacher_audio, const AdapterLibrary& library,
                      std::uint64_t seed, const ComposeOptions& options) {
    require(!plan.sections.empty(), ErrorCode::kInvalidArgument, "plan has no sections");
    require(teacher_audio.size() == plan.sections.size(), ErrorCode::kInvalidArgument,
            "teacher audio must be given per section");
    const auto& config = model.config();
    std::vector<nn::Tensor> parts;
    ComposeResult result;
    int offset = 0;
    for (std::size_t i = 0; i < plan.sections.size(); ++i) {
        const SectionSpec& section = plan.sections[i];
        check_section(section);
        require(teacher_audio[i].size() == section.teachers.size(), ErrorCode::kInvalidArgument,
                "section " + std::to_string(i) + " needs one clip per teacher");
        const int frames = section_frames(config, section.duration);
        const std::string type = synth::section_name(section.type);
        std::vector<adapter::MultiScaleFeatures> member_features;
        std::vector<double> weights;
        for (std::size_t k = 0; k < section.teachers.size(); ++k) {
            const TeacherRef& ref = section.teachers[k];
            adapter::TEAdapter& a = library.get(type, ref.condition);
            const synth::TimbreProfile* profile =
                ref.instrument.empty() ? nullptr : &synth::profile_for_label(ref.instrument);
            const nn::Tensor cond =
                adapter::teacher_condition(teacher_audio[i][k], ref.condition, config.mel, frames, profile);
            member_features.push_back(a.features(cond, true));
            weights.push_back(ref.weight);
        }
        adapter::MultiScaleFeatures features;
        diffusion::SampleOptions sample_options;
        sample_options.frames = frames;
        if (!member_features.empty()) {
            features = adapter::group_combine(member_features, weights);
            sample_options.features = &features;
        }
        parts.push_back(diffusion::sample(model, {model.tokens(section.text().text())}, {derive_seed(seed, i)},
                                          sample_options));
        if (i > 0) {
            result.junctions.push_back(offset);
        }
        offset += frames;
    }
    result.raw_latent = concat_frames(parts);
    result.latent = result.raw_latent;
    const int total = result.raw_latent.dim(2);
    const int half_width = static_cast<int>(
        std::lround(options.junction_seconds / 2.0 * config.mel.sample_rate / config.mel.hop_size));
    if (options.inpaint_junctions) {
        for (std::size_t j = 0; j < result.junctions.size(); ++j) {
            const InpaintMask mask = junction_mask(total, result.junctions[j], half_width, config.frames());
            const std::string text = plan.sections[j].text().text() + " " + plan.sections[j + 1].text().text();
            result.latent = inpaint(model, result.latent, mask, model.tokens(text), derive_seed(seed, kJunctionStream + j));
        }
    }
    const int bins = config.bins();
    const auto env_before = mel_envelope(model.decode_mel(result.raw_latent), bins);
    const auto env_after = mel_envelope(model.decode_mel(result.latent), bins);
    for (int junction : result.junctions) {
        result.smoothness_before.push_back(junction_smoothness(env_before, junction));
        result.smoothness_after.push_back(junction_smoothness(env_after, junction));
    }

    double seconds = 0.0;
    for (const auto& s : plan.sections) {
        seconds += s.duration;
    }
    result.audio = model.decode_audio(result.latent, 0, options.decode_seed);
    result.audio.samples.resize(static_cast<std::size_t>(std::lround(seconds * result.audio.sample_rate)), 0.0);
    return result;
}

std::vector<double> mel_envelope(const std::vector<double>& mel, int bins) {
    require(bins > 0 && mel.size() % static_cast<std::size_t>(bins) == 0, ErrorCode::kShapeError,
            "mel size is not a multiple of the bin count");
    const std::size_t frames = mel.size() / static_cast<std::size_t>(bins);
    std::vector<double> env(frames, 0.0);
    for (std::size_t f = 0; f < frames; ++f) {
        for (int b = 0; b < bins; ++b) {
            env[f] += mel[f * static_cast<std::size_t>(bins) + static_cast<std::size_t>(b)];
        }
        env[f] /= bins;
    }
    return env;
}

double junction_smoothness(const std::vector<double>& envelope, int junction, int radius) {
    const int n = static_cast<int>(envelope.size());
    require(radius >= 1, ErrorCode::kInvalidArgument, "smoothness radius must be >= 1");
    const int lo = std::max(0, junction - radius);
    const int hi = std::min(n - 1, junction + radius);
    require(lo < hi, ErrorCode::kInvalidArgument, "junction leaves no frame pairs to compare");
    double total = 0.0;
    for (int f = lo; f < hi; ++f) {
        total += std::abs(envelope[static_cast<std::size_t>(f + 1)] - envelope[static_cast<std::size_t>(f)]);
    }
    return total / (hi - lo);
}

}  // namespace teadapter::structure

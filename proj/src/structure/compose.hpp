// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "adapter/teadapter.hpp"
#include "diffusion/model.hpp"
#include "json.hpp"
#include "synth/corpus.hpp"

namespace teadapter::structure {

// Width of the regenerated region around each junction.
inline constexpr double kJunctionSeconds = 2.0;
// Section latents are padded to a multiple of this many frames.
inline constexpr int kFrameQuantum = 32;
// Envelope frames on each side of a junction used by the smoothness metric.
inline constexpr int kSmoothnessRadius = 2;

struct TeacherRef {
    std::string path;
    adapter::ConditionType condition = adapter::ConditionType::kMelody;
    double weight = 1.0;
    std::string instrument;  // melody_instr only; empty -> neutral timbre
};

struct SectionSpec {
    synth::Section type = synth::Section::kChorus;
    double duration = 10.0;
    std::string prompt;
    std::optional<diffusion::Mode> mode;
    std::optional<int> tempo_bpm;
    std::vector<TeacherRef> teachers;

    diffusion::TextCondition text() const { return {prompt, mode, tempo_bpm}; }
};

// Ordered sections, each intro, chorus or outro.
struct SegmentPlan {
    std::vector<SectionSpec> sections;
};

// "plan/v1". Throws SchemaError on malformed input, non-positive durations or
// section types outside {intro, chorus, outro}.
nlohmann::json to_json(const SegmentPlan& plan);
SegmentPlan plan_from_json(const nlohmann::json& j);

// Per-frame regeneration flags over a latent, nonzero only inside
// [window_start, window_end). The window is what the sampler sees.
struct InpaintMask {
    std::vector<std::uint8_t> regenerate;
    int window_start = 0;
    int window_end = 0;

    int frames() const { return static_cast<int>(regenerate.size()); }
};

// Mask over `total_frames` flagging `half_width` frames on each side of the
// junction, inside a window of `window_frames` centred on it (shifted to stay
// in range).
InpaintMask junction_mask(int total_frames, int junction, int half_width, int window_frames);

// Regenerates the flagged frames of `latent` ([1, 1, frames, bins]) inside the
// mask window by known-region replacement; everything else is returned
// bit-exactly. An all-zero mask is the identity.
nn::Tensor inpaint(diffusion::DiffusionModel& model, const nn::Tensor& latent, const InpaintMask& mask,
                   const std::vector<int>& tokens, std::uint64_t seed,
                   const adapter::MultiScaleFeatures* features = nullptr);

// Trained adapters keyed by (section, condition).
class AdapterLibrary {
public:
    void add(const std::string& section, adapter::ConditionType condition, std::unique_ptr<adapter::TEAdapter> a);
    bool contains(const std::string& section, adapter::ConditionType condition) const;
    // Throws NotLoaded when absent.
    adapter::TEAdapter& get(const std::string& section, adapter::ConditionType condition) const;
    std::size_t size() const { return adapters_.size(); }

private:
    std::map<std::pair<std::string, adapter::ConditionType>, std::unique_ptr<adapter::TEAdapter>> adapters_;
};

struct ComposeOptions {
    bool inpaint_junctions = true;
    double junction_seconds = kJunctionSeconds;
    std::uint64_t decode_seed = 0;
};

struct ComposeResult {
    dsp::AudioClip audio;
    nn::Tensor latent;         // after junction inpainting
    nn::Tensor raw_latent;     // plain concatenation
    std::vector<int> junctions;  // frame index of each section boundary
    std::vector<double> smoothness_before;
    std::vector<double> smoothness_after;
};

// Latent frames used for a section of `seconds`, rounded up to kFrameQuantum.
int section_frames(const diffusion::DiffusionConfig& config, double seconds);

// Generates every section with its section-specific adapter group, joins the
// latents and inpaints each junction left to right. teacher_audio[i] holds
// the clips of plan.sections[i].teachers in order. Missing adapters throw
// NotLoaded. The output is cropped to the summed section durations.
ComposeResult compose(diffusion::DiffusionModel& model, const SegmentPlan& plan,
                      const std::vector<std::vector<dsp::AudioClip>>& teacher_audio, const AdapterLibrary& library,
                      std::uint64_t seed, const ComposeOptions& options = {});

// Per-frame mean of a frame-major mel.
std::vector<double> mel_envelope(const std::vector<double>& mel, int bins);

// Mean |e[f + 1] - e[f]| of the envelope for f in [junction - r, junction + r).
// Lower is smoother.
double junction_smoothness(const std::vector<double>& envelope, int junction, int radius = kSmoothnessRadius);

}  // namespace teadapter::structure

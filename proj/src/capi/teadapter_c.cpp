// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#include "teadapter/teadapter.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "adapter/teadapter.hpp"
#include "common/error.hpp"
#include "common/rng.hpp"
#include "diffusion/config.hpp"
#include "diffusion/model.hpp"
#include "dsp/audio.hpp"
#include "dsp/wav.hpp"
#include "features/beats.hpp"
#include "features/chords.hpp"
#include "features/melody.hpp"
#include "features/serialize.hpp"
#include "io/config.hpp"
#include "io/dataset.hpp"
#include "io/files.hpp"
#include "metrics/controllability.hpp"
#include "nn/serialize.hpp"
#include "pipeline/pipeline.hpp"
#include "structure/compose.hpp"

using namespace teadapter;
namespace fs = std::filesystem;

struct teadapter_audio {
    dsp::AudioClip clip;
};

struct teadapter_model {
    std::unique_ptr<diffusion::DiffusionModel> model;
    io::AppConfig app;
};

struct teadapter_adapter {
    std::unique_ptr<adapter::TEAdapter> adapter;
    adapter::AdapterTags tags;
};

namespace {

thread_local std::string g_last_error;

static_assert(static_cast<int>(ErrorCode::kInternal) == TEADAPTER_E_INTERNAL, "status codes mirror ErrorCode");

template <typename F>
teadapter_status guarded(F&& body) {
    try {
        body();
        g_last_error.clear();
        return TEADAPTER_OK;
    } catch (const Error& e) {
        g_last_error = e.what();
        return static_cast<teadapter_status>(e.code());
    } catch (const nlohmann::json::exception& e) {
        g_last_error = e.what();
        return TEADAPTER_E_SCHEMA;
    } catch (const fs::filesystem_error& e) {
        g_last_error = e.what();
        return TEADAPTER_E_IO;
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return TEADAPTER_E_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return TEADAPTER_E_INTERNAL;
    }
}

void need(const void* p, const char* what) {
    require(p != nullptr, ErrorCode::kInvalidArgument, std::string(what) + " must not be null");
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out == nullptr) {
        throw std::bad_alloc();
    }
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

pipeline::Progress progress_of(teadapter_progress_fn fn, void* user) {
    if (fn == nullptr) {
        return {};
    }
    return [fn, user](int step, double loss) { fn(step, loss, user); };
}

void validate_document(const nlohmann::json& j) {
    require(j.is_object() && j.contains("schema") && j["schema"].is_string(), ErrorCode::kSchemaError,
            "document has no schema field");
    const std::string schema = j["schema"].get<std::string>();
    if (schema == "melody/v1") {
        features::validate_melody_json(j);
    } else if (schema == "chords/v1") {
        features::validate_chords_json(j);
    } else if (schema == "beats/v1") {
        features::validate_beats_json(j);
    } else if (schema == "manifest/v1") {
        io::manifest_from_json(j, ".");
    } else if (schema == "plan/v1") {
        structure::plan_from_json(j);
    } else if (schema == "report/v1") {
        metrics::report_from_json(j);
    } else if (schema == "config/v1") {
        io::app_config_from_json(j);
    } else {
        fail(ErrorCode::kSchemaError, "unknown schema " + schema);
    }
}

dsp::AudioClip read_conformed(const fs::path& path, double sample_rate) {
    return dsp::resample(dsp::read_wav(path), sample_rate);
}

}  // namespace

extern "C" {

const char* teadapter_version(void) { return "0.1.0"; }

const char* teadapter_status_name(teadapter_status status) {
    if (status < TEADAPTER_OK || status > TEADAPTER_E_INTERNAL) {
        return "Unknown";
    }
    return error_code_name(static_cast<ErrorCode>(status)).data();
}

const char* teadapter_last_error(void) { return g_last_error.c_str(); }

void teadapter_string_free(char* text) { std::free(text); }

// --- audio -----------------------------------------------------------------

teadapter_status teadapter_audio_read(const char* path, teadapter_audio** out) {
    return guarded([&] {
        need(path, "path");
        need(out, "out");
        auto a = std::make_unique<teadapter_audio>();
        a->clip = dsp::read_wav(path);
        *out = a.release();
    });
}

teadapter_status teadapter_audio_write(const teadapter_audio* audio, const char* path) {
    return guarded([&] {
        need(audio, "audio");
        need(path, "path");
        io::write_bytes(path, dsp::encode_wav(audio->clip));
    });
}

teadapter_status teadapter_audio_from_samples(const double* samples, size_t count, double sample_rate,
                                              teadapter_audio** out) {
    return guarded([&] {
        need(out, "out");
        require(samples != nullptr || count == 0, ErrorCode::kInvalidArgument, "samples must not be null");
        auto a = std::make_unique<teadapter_audio>();
        a->clip.samples.assign(samples, samples + count);
        a->clip.sample_rate = sample_rate;
        dsp::validate(a->clip);
        *out = a.release();
    });
}

size_t teadapter_audio_length(const teadapter_audio* audio) { return audio ? audio->clip.samples.size() : 0; }

double teadapter_audio_sample_rate(const teadapter_audio* audio) { return audio ? audio->clip.sample_rate : 0.0; }

const double* teadapter_audio_samples(const teadapter_audio* audio) {
    return audio ? audio->clip.samples.data() : nullptr;
}

teadapter_status teadapter_audio_normalize(teadapter_audio* audio, double peak) {
    return guarded([&] {
        need(audio, "audio");
        require(peak > 0.0 && peak <= 1.0, ErrorCode::kInvalidArgument, "peak must be in (0, 1]");
        pipeline::normalize_peak(audio->clip, peak);
    });
}

void teadapter_audio_free(teadapter_audio* audio) { delete audio; }

// --- analysis --------------------------------------------------------------

teadapter_status teadapter_extract(const teadapter_audio* audio, const char* kind, char** json) {
    return guarded([&] {
        need(audio, "audio");
        need(kind, "kind");
        need(json, "json");
        const std::string k = kind;
        const dsp::AudioClip clip = dsp::resample(audio->clip, dsp::kDefaultSampleRate);
        nlohmann::json doc;
        if (k == "melody") {
            doc = features::to_json(features::extract_melody(clip));
        } else if (k == "chords") {
            doc = features::to_json(features::estimate_chords(clip, features::estimate_beats(clip)));
        } else if (k == "beats") {
            doc = features::to_json(features::estimate_beats(clip));
        } else {
            fail(ErrorCode::kInvalidArgument, "unknown extraction '" + k + "' (melody, chords, beats)");
        }
        *json = dup_string(doc.dump(2));
    });
}

teadapter_status teadapter_validate_json(const char* json) {
    return guarded([&] {
        need(json, "json");
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(json);
        } catch (const nlohmann::json::parse_error& e) {
            fail(ErrorCode::kSchemaError, e.what());
        }
        validate_document(j);
    });
}

// --- corpus ----------------------------------------------------------------

teadapter_status teadapter_synth_corpus(const char* dir, const char* config_path, int count, const char* section,
                                        const char* instrument, uint64_t seed, char** manifest_path) {
    return guarded([&] {
        need(dir, "dir");
        const io::AppConfig app = io::load_app_config(config_path ? config_path : "");
        pipeline::CorpusOptions options;
        options.count = count;
        if (section != nullptr) {
            options.section = synth::parse_section(section);
        }
        if (instrument != nullptr) {
            options.instrument = instrument;
        }
        const fs::path manifest = pipeline::write_corpus(dir, app.model, options, seed);
        if (manifest_path != nullptr) {
            *manifest_path = dup_string(manifest.string());
        }
    });
}

// --- backbone --------------------------------------------------------------

teadapter_status teadapter_model_create(const char* config_path, uint64_t seed, teadapter_model** out) {
    return guarded([&] {
        need(out, "out");
        auto m = std::make_unique<teadapter_model>();
        m->app = io::load_app_config(config_path ? config_path : "");
        m->model = std::make_unique<diffusion::DiffusionModel>(m->app.model, seed);
        *out = m.release();
    });
}

teadapter_status teadapter_model_load(const char* dir, const char* config_path, teadapter_model** out) {
    return guarded([&] {
        need(dir, "dir");
        need(out, "out");
        auto m = std::make_unique<teadapter_model>();
        m->app = io::load_app_config(config_path ? config_path : "");
        m->model = diffusion::DiffusionModel::load(dir);
        m->app.model = m->model->config();
        *out = m.release();
    });
}

teadapter_status teadapter_model_save(teadapter_model* model, const char* dir) {
    return guarded([&] {
        need(model, "model");
        need(dir, "dir");
        model->model->save(dir);
    });
}

teadapter_status teadapter_model_pretrain(teadapter_model* model, const char* manifest_path, int steps, uint64_t seed,
                                          teadapter_progress_fn progress, void* user, double* final_loss) {
    return guarded([&] {
        need(model, "model");
        need(manifest_path, "manifest_path");
        diffusion::DiffusionModel& m = *model->model;
        const int n = steps > 0 ? steps : m.config().pretrain_steps;
        const io::Dataset data = pipeline::load_dataset(m, manifest_path);
        pipeline::fit_stats(m, data);
        const auto examples = pipeline::make_examples(m, data, {}, model->app);
        const pipeline::TrainLog log = pipeline::pretrain(m, examples, n, seed, progress_of(progress, user));
        m.info["pretrain"] = {{"steps", n}, {"seed", seed}, {"clips", data.clips.size()},
                              {"final_loss", log.final_loss()}};
        if (final_loss != nullptr) {
            *final_loss = log.final_loss();
        }
    });
}

teadapter_status teadapter_model_info(teadapter_model* model, char** json) {
    return guarded([&] {
        need(model, "model");
        need(json, "json");
        const diffusion::DiffusionModel& m = *model->model;
        const nlohmann::json j = {{"kind", "backbone"},
                                  {"config", diffusion::to_json(m.config())},
                                  {"parameters", nn::count_values(model->model->backbone().parameters())},
                                  {"frozen", model->model->backbone().all_frozen()},
                                  {"info", m.info}};
        *json = dup_string(j.dump(2));
    });
}

void teadapter_model_free(teadapter_model* model) { delete model; }

// --- adapters --------------------------------------------------------------

teadapter_status teadapter_adapter_train(teadapter_model* model, const char* manifest_path, const char* condition,
                                         const char* section, int steps, uint64_t seed,
                                         teadapter_progress_fn progress, void* user, teadapter_adapter** out,
                                         double* final_loss) {
    return guarded([&] {
        need(model, "model");
        need(manifest_path, "manifest_path");
        need(condition, "condition");
        need(out, "out");
        diffusion::DiffusionModel& m = *model->model;
        auto a = std::make_unique<teadapter_adapter>();
        a->tags.condition = adapter::parse_condition(condition);
        std::optional<synth::Section> filter;
        if (section != nullptr) {
            filter = synth::parse_section(section);
            require(*filter != synth::Section::kGeneric, ErrorCode::kInvalidArgument,
                    "section must be intro, chorus or outro");
            a->tags.section = section;
        }
        const int n = steps > 0 ? steps : m.config().train_steps;
        const io::Dataset data = pipeline::load_dataset(m, manifest_path, filter);
        const auto examples = pipeline::make_examples(m, data, {a->tags.condition}, model->app);
        a->adapter = std::make_unique<adapter::TEAdapter>(m.config().plan(), derive_seed(seed, 0));
        const pipeline::TrainLog log =
            pipeline::train_adapter(m, *a->adapter, examples, n, derive_seed(seed, 1), 0, progress_of(progress, user));
        if (final_loss != nullptr) {
            *final_loss = log.final_loss();
        }
        *out = a.release();
    });
}

teadapter_status teadapter_adapter_load(const char* dir, teadapter_adapter** out) {
    return guarded([&] {
        need(dir, "dir");
        need(out, "out");
        auto a = std::make_unique<teadapter_adapter>();
        a->adapter = adapter::load_adapter(dir, &a->tags);
        *out = a.release();
    });
}

teadapter_status teadapter_adapter_save(teadapter_adapter* adapter, const char* dir) {
    return guarded([&] {
        need(adapter, "adapter");
        need(dir, "dir");
        adapter::save_adapter(dir, *adapter->adapter, adapter->tags);
    });
}

teadapter_status teadapter_adapter_info(teadapter_adapter* adapter, char** json) {
    return guarded([&] {
        need(adapter, "adapter");
        need(json, "json");
        const nlohmann::json j = {{"kind", "teadapter"},
                                  {"condition", adapter::condition_name(adapter->tags.condition)},
                                  {"section", adapter->tags.section},
                                  {"plan", adapter::to_json(adapter->adapter->plan())},
                                  {"parameters", nn::count_values(adapter->adapter->parameters())}};
        *json = dup_string(j.dump(2));
    });
}

void teadapter_adapter_free(teadapter_adapter* adapter) { delete adapter; }

// --- generation ------------------------------------------------------------

teadapter_status teadapter_generate(teadapter_model* model, const char* prompt, const char* mode, int tempo_bpm,
                                    const teadapter_teacher* teachers, size_t teacher_count, uint64_t seed,
                                    teadapter_audio** out) {
    return guarded([&] {
        need(model, "model");
        need(prompt, "prompt");
        need(out, "out");
        require(teachers != nullptr || teacher_count == 0, ErrorCode::kInvalidArgument, "teachers must not be null");
        diffusion::DiffusionModel& m = *model->model;
        diffusion::TextCondition text{prompt, std::nullopt, std::nullopt};
        if (mode != nullptr) {
            text.mode = diffusion::parse_mode(mode);
        }
        if (tempo_bpm > 0) {
            text.tempo_bpm = tempo_bpm;
        }
        std::vector<dsp::AudioClip> clips;
        clips.reserve(teacher_count);
        std::vector<pipeline::TeacherInput> inputs;
        for (size_t i = 0; i < teacher_count; ++i) {
            const teadapter_teacher& t = teachers[i];
            need(t.audio, "teacher audio");
            need(t.adapter, "teacher adapter");
            require(t.adapter->adapter->plan() == m.config().plan(), ErrorCode::kShapeError,
                    "adapter was trained for a different latent geometry");
            clips.push_back(dsp::resample(t.audio->clip, m.config().mel.sample_rate));
        }
        for (size_t i = 0; i < teacher_count; ++i) {
            const teadapter_teacher& t = teachers[i];
            pipeline::TeacherInput in;
            in.audio = &clips[i];
            in.adapter = t.adapter->adapter.get();
            in.condition = t.adapter->tags.condition;
            in.weight = t.weight;
            in.instrument = t.instrument ? &model->app.profile(t.instrument) : nullptr;
            inputs.push_back(in);
        }
        auto a = std::make_unique<teadapter_audio>();
        a->clip = pipeline::generate(m, text, inputs, seed);
        *out = a.release();
    });
}

teadapter_status teadapter_compose(teadapter_model* model, const char* plan_path, const char* const* adapter_dirs,
                                   size_t adapter_count, uint64_t seed, int inpaint, teadapter_audio** out,
                                   char** report) {
    return guarded([&] {
        need(model, "model");
        need(plan_path, "plan_path");
        need(out, "out");
        require(adapter_dirs != nullptr || adapter_count == 0, ErrorCode::kInvalidArgument,
                "adapter_dirs must not be null");
        diffusion::DiffusionModel& m = *model->model;
        const structure::SegmentPlan plan = structure::plan_from_json(io::read_json(plan_path));
        const fs::path base = fs::path(plan_path).parent_path();
        std::vector<std::vector<dsp::AudioClip>> teachers;
        for (const auto& section : plan.sections) {
            std::vector<dsp::AudioClip> clips;
            for (const auto& ref : section.teachers) {
                const fs::path p = fs::path(ref.path).is_absolute() ? fs::path(ref.path) : base / ref.path;
                require(fs::exists(p), ErrorCode::kIngestError, "missing file: " + p.string());
                clips.push_back(read_conformed(p, m.config().mel.sample_rate));
            }
            teachers.push_back(std::move(clips));
        }
        structure::AdapterLibrary library;
        for (size_t i = 0; i < adapter_count; ++i) {
            need(adapter_dirs[i], "adapter dir");
            adapter::AdapterTags tags;
            auto a = adapter::load_adapter(adapter_dirs[i], &tags);
            require(a->plan() == m.config().plan(), ErrorCode::kShapeError,
                    std::string(adapter_dirs[i]) + " was trained for a different latent geometry");
            library.add(tags.section, tags.condition, std::move(a));
        }
        structure::ComposeOptions options;
        options.inpaint_junctions = inpaint != 0;
        options.decode_seed = derive_seed(seed, 2);
        structure::ComposeResult result = structure::compose(m, plan, teachers, library, seed, options);
        if (report != nullptr) {
            const nlohmann::json j = {{"sections", plan.sections.size()},
                                      {"duration", result.audio.duration()},
                                      {"junctions", result.junctions},
                                      {"inpainted", options.inpaint_junctions},
                                      {"smoothness_before", result.smoothness_before},
                                      {"smoothness_after", result.smoothness_after}};
            *report = dup_string(j.dump(2));
        }
        auto a = std::make_unique<teadapter_audio>();
        a->clip = std::move(result.audio);
        *out = a.release();
    });
}

// --- evaluation ------------------------------------------------------------

teadapter_status teadapter_evaluate(const char* gen_dir, const char* ref_dir, char** json, char** csv) {
    return guarded([&] {
        need(gen_dir, "gen_dir");
        need(ref_dir, "ref_dir");
        need(json, "json");
        require(fs::is_directory(gen_dir), ErrorCode::kIngestError, std::string("missing directory: ") + gen_dir);
        require(fs::is_directory(ref_dir), ErrorCode::kIngestError, std::string("missing directory: ") + ref_dir);
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(gen_dir)) {
            if (e.is_regular_file() && e.path().extension() == ".wav") {
                files.push_back(e.path());
            }
        }
        std::sort(files.begin(), files.end());
        require(!files.empty(), ErrorCode::kEmptyInput, std::string("no WAV files in ") + gen_dir);
        std::vector<metrics::ClipScore> scores;
        for (const fs::path& gen : files) {
            const fs::path ref = fs::path(ref_dir) / gen.filename();
            require(fs::exists(ref), ErrorCode::kIngestError, "missing file: " + ref.string());
            scores.push_back(metrics::score_clip(gen.filename().string(), dsp::read_wav(gen), dsp::read_wav(ref)));
        }
        const metrics::ControllabilityReport r = metrics::make_report(std::move(scores));
        *json = dup_string(metrics::to_json(r).dump(2));
        if (csv != nullptr) {
            *csv = dup_string(metrics::to_csv(r));
        }
    });
}

teadapter_status teadapter_inspect_checkpoint(const char* dir, char** json) {
    return guarded([&] {
        need(dir, "dir");
        need(json, "json");
        const nlohmann::json manifest = nn::read_manifest(dir);
        std::size_t values = 0;
        std::size_t frozen = 0;
        for (const auto& t : manifest.at("tensors")) {
            std::size_t n = 1;
            for (const auto& d : t.at("shape")) {
                n *= d.get<std::size_t>();
            }
            values += n;
            frozen += t.value("frozen", false) ? 1 : 0;
        }
        const nlohmann::json& meta = manifest.at("meta");
        const nlohmann::json j = {{"path", dir},
                                  {"schema", manifest.at("schema")},
                                  {"kind", meta.value("kind", "unknown")},
                                  {"tensors", manifest.at("tensors").size()},
                                  {"frozen_tensors", frozen},
                                  {"parameters", values},
                                  {"meta", meta}};
        *json = dup_string(j.dump(2));
    });
}

}  // extern "C"

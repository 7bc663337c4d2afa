// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end. Everything goes through the C API.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "teadapter/teadapter.h"

namespace {

constexpr double kOutputPeak = 0.8;

// Failed C calls unwind to main as this.
struct Failure {
    teadapter_status status;
    std::string message;
    bool usage = false;
};

void check(teadapter_status s) {
    if (s != TEADAPTER_OK) {
        throw Failure{s, teadapter_last_error()};
    }
}

[[noreturn]] void usage_failure(const std::string& message) { throw Failure{TEADAPTER_E_INVALID_ARGUMENT, message, true}; }

struct StringDeleter {
    void operator()(char* p) const { teadapter_string_free(p); }
};
struct AudioDeleter {
    void operator()(teadapter_audio* p) const { teadapter_audio_free(p); }
};
struct ModelDeleter {
    void operator()(teadapter_model* p) const { teadapter_model_free(p); }
};
struct AdapterDeleter {
    void operator()(teadapter_adapter* p) const { teadapter_adapter_free(p); }
};
using String = std::unique_ptr<char, StringDeleter>;
using Audio = std::unique_ptr<teadapter_audio, AudioDeleter>;
using Model = std::unique_ptr<teadapter_model, ModelDeleter>;
using Adapter = std::unique_ptr<teadapter_adapter, AdapterDeleter>;

const char* opt(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    f << text;
    if (!f) {
        throw Failure{TEADAPTER_E_IO, "cannot write " + path};
    }
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        throw Failure{TEADAPTER_E_IO, "cannot read " + path};
    }
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// Text to a file, or stdout without a path.
void emit(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text << "\n";
    } else {
        write_file(path, text + "\n");
    }
}

Audio read_audio(const std::string& path) {
    teadapter_audio* a = nullptr;
    check(teadapter_audio_read(path.c_str(), &a));
    return Audio(a);
}

void write_audio(teadapter_audio* audio, const std::string& path) {
    check(teadapter_audio_normalize(audio, kOutputPeak));
    check(teadapter_audio_write(audio, path.c_str()));
}

Model load_model(const std::string& dir, const std::string& config) {
    if (dir.empty()) {
        throw Failure{TEADAPTER_E_NOT_LOADED, "no backbone checkpoint given (--model)"};
    }
    teadapter_model* m = nullptr;
    check(teadapter_model_load(dir.c_str(), opt(config), &m));
    return Model(m);
}

struct ProgressPrinter {
    int every = 50;
    int total = 0;
    const char* label = "step";

    static void callback(int step, double loss, void* user) {
        const auto* p = static_cast<const ProgressPrinter*>(user);
        if (p->every > 0 && ((step + 1) % p->every == 0 || step + 1 == p->total)) {
            std::fprintf(stderr, "%s %d/%d loss %.5f\n", p->label, step + 1, p->total, loss);
        }
    }
};

// WAV:ADAPTER_DIR[:WEIGHT[:INSTRUMENT]]
struct TeacherArg {
    std::string wav;
    std::string adapter;
    double weight = 1.0;
    std::string instrument;
};

TeacherArg parse_teacher(const std::string& spec) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ':')) {
        parts.push_back(item);
    }
    if (parts.size() < 2 || parts.size() > 4 || parts[0].empty() || parts[1].empty()) {
        usage_failure("--teacher expects WAV:ADAPTER_DIR[:WEIGHT[:INSTRUMENT]], got '" + spec + "'");
    }
    TeacherArg t{parts[0], parts[1], 1.0, ""};
    if (parts.size() >= 3) {
        try {
            t.weight = std::stod(parts[2]);
        } catch (const std::exception&) {
            usage_failure("bad teacher weight '" + parts[2] + "'");
        }
    }
    if (parts.size() == 4) {
        t.instrument = parts[3];
    }
    return t;
}

struct Common {
    std::uint64_t seed = 0;
    std::string config;
    std::string out;
};

// --seed, --config and --out on every subcommand; returns --out.
CLI::Option* add_common(CLI::App* cmd, Common& c, const std::string& out_help) {
    cmd->add_option("--seed", c.seed, "Random seed")->capture_default_str();
    cmd->add_option("--config", c.config, "Config file (config/v1)")->check(CLI::ExistingFile);
    return cmd->add_option("--out", c.out, out_help);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"TEAdapter: controllable music generation with teacher audio"};
    app.require_subcommand(1);
    app.set_version_flag("--version", teadapter_version());
    bool quiet = false;
    app.add_flag("-q,--quiet", quiet, "No progress output");

    // extract
    Common extract_c;
    std::string extract_kind, extract_wav, extract_json;
    auto* extract = app.add_subcommand("extract", "Extract melody, chords or beats from a WAV file");
    extract->add_option("kind", extract_kind, "melody | chords | beats")
        ->required()
        ->check(CLI::IsMember({"melody", "chords", "beats"}));
    extract->add_option("wav", extract_wav, "Input WAV")->required()->check(CLI::ExistingFile);
    extract->add_option("--json", extract_json, "Output JSON (default: stdout)");
    add_common(extract, extract_c, "Output JSON (same as --json)");

    // validate
    std::vector<std::string> validate_files;
    auto* validate = app.add_subcommand("validate", "Check JSON documents against their declared schema");
    validate->add_option("files", validate_files, "JSON files")->required()->check(CLI::ExistingFile);

    // synth-corpus
    Common corpus_c;
    int corpus_count = 16;
    std::string corpus_section, corpus_instrument;
    auto* corpus = app.add_subcommand("synth-corpus", "Write a synthetic captioned corpus with a manifest");
    corpus->add_option("--count", corpus_count, "Number of clips")->capture_default_str()->check(CLI::PositiveNumber);
    corpus->add_option("--section", corpus_section, "Section label for every clip (default: cycle)")
        ->check(CLI::IsMember({"intro", "chorus", "outro"}));
    corpus->add_option("--instrument", corpus_instrument, "Instrument for every clip (default: random)");
    add_common(corpus, corpus_c, "Output directory")->required();

    // pretrain
    Common pre_c;
    std::string pre_data;
    int pre_steps = 0;
    auto* pre = app.add_subcommand("pretrain", "Pretrain the backbone on a manifest and save it frozen");
    pre->add_option("--data", pre_data, "Dataset manifest")->required()->check(CLI::ExistingFile);
    pre->add_option("--steps", pre_steps, "Training steps (default: config)");
    add_common(pre, pre_c, "Backbone checkpoint directory")->required();

    // train
    Common train_c;
    std::string train_model, train_data, train_condition = "melody", train_section;
    int train_steps = 0;
    auto* train = app.add_subcommand("train", "Train an adapter against a frozen backbone");
    train->add_option("--model", train_model, "Backbone checkpoint directory");
    train->add_option("--data", train_data, "Dataset manifest")->required()->check(CLI::ExistingFile);
    train->add_option("--adapter", train_condition, "Condition type")
        ->capture_default_str()
        ->check(CLI::IsMember({"melody", "melody_instr", "chord"}));
    train->add_option("--section", train_section, "Train on one section type only")
        ->check(CLI::IsMember({"intro", "chorus", "outro"}));
    train->add_option("--steps", train_steps, "Training steps (default: config)");
    add_common(train, train_c, "Adapter checkpoint directory")->required();

    // generate
    Common gen_c;
    std::string gen_model, gen_prompt, gen_mode;
    int gen_tempo = 0;
    std::vector<std::string> gen_teachers;
    auto* gen = app.add_subcommand("generate", "Generate a clip from a prompt and optional teacher music");
    gen->add_option("--model", gen_model, "Backbone checkpoint directory");
    gen->add_option("--prompt", gen_prompt, "Text prompt")->required();
    gen->add_option("--mode", gen_mode, "Global mode tag")->check(CLI::IsMember({"major", "minor"}));
    gen->add_option("--tempo", gen_tempo, "Global tempo tag (BPM)")->check(CLI::Range(1, 400));
    gen->add_option("--teacher", gen_teachers, "WAV:ADAPTER_DIR[:WEIGHT[:INSTRUMENT]], repeatable");
    add_common(gen, gen_c, "Output WAV")->required();

    // compose
    Common comp_c;
    std::string comp_model, comp_plan, comp_report;
    std::vector<std::string> comp_adapters;
    bool comp_no_inpaint = false;
    auto* comp = app.add_subcommand("compose", "Generate a multi-section piece from a plan");
    comp->add_option("--model", comp_model, "Backbone checkpoint directory");
    comp->add_option("--plan", comp_plan, "Plan file (plan/v1)")->required()->check(CLI::ExistingFile);
    comp->add_option("--adapters", comp_adapters, "Adapter checkpoint directories");
    comp->add_flag("--no-inpaint", comp_no_inpaint, "Join sections without junction inpainting");
    comp->add_option("--report", comp_report, "Junction report JSON");
    add_common(comp, comp_c, "Output WAV")->required();

    // evaluate
    Common eval_c;
    std::string eval_gen, eval_ref, eval_json, eval_csv;
    auto* eval = app.add_subcommand("evaluate", "Score generated clips against their references");
    eval->add_option("--gen-dir", eval_gen, "Generated WAVs")->required()->check(CLI::ExistingDirectory);
    eval->add_option("--ref-dir", eval_ref, "Reference WAVs with the same names")
        ->required()
        ->check(CLI::ExistingDirectory);
    eval->add_option("--json", eval_json, "Report JSON (default: stdout)");
    eval->add_option("--csv", eval_csv, "Per-clip CSV");
    add_common(eval, eval_c, "Report JSON (same as --json)");

    // inspect-checkpoint
    Common insp_c;
    std::string insp_dir;
    auto* insp = app.add_subcommand("inspect-checkpoint", "Summarize a backbone or adapter checkpoint");
    insp->add_option("dir", insp_dir, "Checkpoint directory")->required();
    add_common(insp, insp_c, "Summary JSON (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*extract) {
            const std::string out = extract_json.empty() ? extract_c.out : extract_json;
            Audio audio = read_audio(extract_wav);
            char* json = nullptr;
            check(teadapter_extract(audio.get(), extract_kind.c_str(), &json));
            String holder(json);
            emit(out, json);
        } else if (*validate) {
            for (const auto& f : validate_files) {
                const teadapter_status s = teadapter_validate_json(read_file(f).c_str());
                if (s != TEADAPTER_OK) {
                    throw Failure{s, f + ": " + teadapter_last_error()};
                }
                if (!quiet) {
                    std::fprintf(stderr, "%s: ok\n", f.c_str());
                }
            }
        } else if (*corpus) {
            char* manifest = nullptr;
            check(teadapter_synth_corpus(corpus_c.out.c_str(), opt(corpus_c.config), corpus_count,
                                         opt(corpus_section), opt(corpus_instrument), corpus_c.seed, &manifest));
            String holder(manifest);
            std::cout << manifest << "\n";
        } else if (*pre) {
            teadapter_model* raw = nullptr;
            check(teadapter_model_create(opt(pre_c.config), pre_c.seed, &raw));
            Model model(raw);
            char* info = nullptr;
            check(teadapter_model_info(model.get(), &info));
            const int total = pre_steps > 0 ? pre_steps
                                            : nlohmann::json::parse(info)["config"]["pretrain_steps"].get<int>();
            teadapter_string_free(info);
            ProgressPrinter printer{quiet ? 0 : 50, total, "pretrain"};
            double loss = 0.0;
            check(teadapter_model_pretrain(model.get(), pre_data.c_str(), pre_steps, pre_c.seed,
                                           &ProgressPrinter::callback, &printer, &loss));
            check(teadapter_model_save(model.get(), pre_c.out.c_str()));
            if (!quiet) {
                std::fprintf(stderr, "saved backbone to %s (final loss %.5f)\n", pre_c.out.c_str(), loss);
            }
        } else if (*train) {
            Model model = load_model(train_model, train_c.config);
            char* info = nullptr;
            check(teadapter_model_info(model.get(), &info));
            const int total =
                train_steps > 0 ? train_steps : nlohmann::json::parse(info)["config"]["train_steps"].get<int>();
            teadapter_string_free(info);
            ProgressPrinter printer{quiet ? 0 : 50, total, "train"};
            teadapter_adapter* raw = nullptr;
            double loss = 0.0;
            check(teadapter_adapter_train(model.get(), train_data.c_str(), train_condition.c_str(),
                                          opt(train_section), train_steps, train_c.seed, &ProgressPrinter::callback,
                                          &printer, &raw, &loss));
            Adapter adapter(raw);
            check(teadapter_adapter_save(adapter.get(), train_c.out.c_str()));
            if (!quiet) {
                std::fprintf(stderr, "saved %s adapter to %s (final loss %.5f)\n", train_condition.c_str(),
                             train_c.out.c_str(), loss);
            }
        } else if (*gen) {
            std::vector<TeacherArg> args;
            for (const auto& spec : gen_teachers) {
                args.push_back(parse_teacher(spec));
            }
            Model model = load_model(gen_model, gen_c.config);
            std::vector<Audio> audios;
            std::vector<Adapter> adapters;
            std::vector<teadapter_teacher> teachers;
            for (const auto& t : args) {
                audios.push_back(read_audio(t.wav));
                teadapter_adapter* raw = nullptr;
                check(teadapter_adapter_load(t.adapter.c_str(), &raw));
                adapters.emplace_back(raw);
            }
            for (std::size_t i = 0; i < args.size(); ++i) {
                teachers.push_back({audios[i].get(), adapters[i].get(), args[i].weight, opt(args[i].instrument)});
            }
            teadapter_audio* raw = nullptr;
            check(teadapter_generate(model.get(), gen_prompt.c_str(), opt(gen_mode), gen_tempo, teachers.data(),
                                     teachers.size(), gen_c.seed, &raw));
            Audio out(raw);
            write_audio(out.get(), gen_c.out);
        } else if (*comp) {
            Model model = load_model(comp_model, comp_c.config);
            std::vector<const char*> dirs;
            for (const auto& d : comp_adapters) {
                dirs.push_back(d.c_str());
            }
            teadapter_audio* raw = nullptr;
            char* report = nullptr;
            check(teadapter_compose(model.get(), comp_plan.c_str(), dirs.data(), dirs.size(), comp_c.seed,
                                    comp_no_inpaint ? 0 : 1, &raw, &report));
            Audio out(raw);
            String holder(report);
            write_audio(out.get(), comp_c.out);
            if (!comp_report.empty()) {
                write_file(comp_report, std::string(report) + "\n");
            }
        } else if (*eval) {
            const std::string out = eval_json.empty() ? eval_c.out : eval_json;
            char* json = nullptr;
            char* csv = nullptr;
            check(teadapter_evaluate(eval_gen.c_str(), eval_ref.c_str(), &json, eval_csv.empty() ? nullptr : &csv));
            String json_holder(json);
            String csv_holder(csv);
            emit(out, json);
            if (!eval_csv.empty()) {
                write_file(eval_csv, csv);
            }
        } else if (*insp) {
            char* json = nullptr;
            check(teadapter_inspect_checkpoint(insp_dir.c_str(), &json));
            String holder(json);
            emit(insp_c.out, json);
        }
    } catch (const Failure& f) {
        const nlohmann::json err = {{"error", teadapter_status_name(f.status)},
                                    {"status", static_cast<int>(f.status)},
                                    {"message", f.message}};
        std::cerr << err.dump() << "\n";
        return f.usage ? 2 : 1;
    }
    return 0;
}

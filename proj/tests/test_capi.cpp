// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0
//
// Exercises the shared library through its C header only.

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "teadapter/teadapter.h"

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("teadapter_capi_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// Takes ownership of a library string.
nlohmann::json take_json(char* text) {
    REQUIRE(text != nullptr);
    const auto j = nlohmann::json::parse(text);
    teadapter_string_free(text);
    return j;
}

std::string toy_config(const fs::path& dir) {
    const fs::path path = dir / "toy.json";
    std::ofstream(path) << R"({"schema": "config/v1", "base": "toy", "steps": 8, "batch_size": 2})";
    return path.string();
}

teadapter_audio* sine(double hz, double seconds) {
    std::vector<double> s(static_cast<std::size_t>(seconds * 16000.0));
    for (std::size_t i = 0; i < s.size(); ++i) {
        s[i] = 0.5 * std::sin(2.0 * 3.141592653589793 * hz * static_cast<double>(i) / 16000.0);
    }
    teadapter_audio* a = nullptr;
    REQUIRE(teadapter_audio_from_samples(s.data(), s.size(), 16000.0, &a) == TEADAPTER_OK);
    return a;
}

}  // namespace

TEST_CASE("status names and errors") {
    CHECK(std::strlen(teadapter_version()) > 0);
    CHECK(std::string(teadapter_status_name(TEADAPTER_OK)) == "Ok");
    CHECK(std::string(teadapter_status_name(TEADAPTER_E_NOT_LOADED)) == "NotLoaded");
    CHECK(std::string(teadapter_status_name(TEADAPTER_E_SCHEMA)) == "SchemaError");
    CHECK(std::string(teadapter_status_name(static_cast<teadapter_status>(999))) == "Unknown");

    const fs::path dir = scratch("errors");
    teadapter_model* model = nullptr;
    CHECK(teadapter_model_load((dir / "absent").c_str(), nullptr, &model) == TEADAPTER_E_NOT_LOADED);
    CHECK(model == nullptr);
    CHECK(std::strlen(teadapter_last_error()) > 0);
    teadapter_adapter* ad = nullptr;
    CHECK(teadapter_adapter_load((dir / "absent").c_str(), &ad) == TEADAPTER_E_NOT_LOADED);
    CHECK(teadapter_model_create(nullptr, 0, nullptr) == TEADAPTER_E_INVALID_ARGUMENT);
    teadapter_audio* audio = nullptr;
    CHECK(teadapter_audio_read((dir / "none.wav").c_str(), &audio) != TEADAPTER_OK);
    CHECK(teadapter_audio_from_samples(nullptr, 0, 16000.0, &audio) != TEADAPTER_OK);
}

TEST_CASE("document validation") {
    CHECK(teadapter_validate_json(R"({"schema": "plan/v1", "sections": [{"section": "intro", "duration": 4}]})") ==
          TEADAPTER_OK);
    CHECK(teadapter_validate_json(R"({"schema": "plan/v1", "sections": []})") == TEADAPTER_E_SCHEMA);
    CHECK(teadapter_validate_json(R"({"schema": "nothing/v1"})") == TEADAPTER_E_SCHEMA);
    CHECK(teadapter_validate_json("{ broken") == TEADAPTER_E_SCHEMA);
    CHECK(teadapter_validate_json(R"({"schema": "config/v1", "base": "toy"})") == TEADAPTER_OK);
}

TEST_CASE("audio handles and feature extraction") {
    const fs::path dir = scratch("audio");
    teadapter_audio* a = sine(440.0, 3.0);
    CHECK(teadapter_audio_length(a) == 48000u);
    CHECK(teadapter_audio_sample_rate(a) == 16000.0);
    CHECK(teadapter_audio_normalize(a, 0.25) == TEADAPTER_OK);
    double peak = 0.0;
    for (std::size_t i = 0; i < teadapter_audio_length(a); ++i) {
        peak = std::max(peak, std::abs(teadapter_audio_samples(a)[i]));
    }
    CHECK(peak == doctest::Approx(0.25));
    const std::string path = (dir / "a.wav").string();
    CHECK(teadapter_audio_write(a, path.c_str()) == TEADAPTER_OK);
    teadapter_audio* b = nullptr;
    REQUIRE(teadapter_audio_read(path.c_str(), &b) == TEADAPTER_OK);
    CHECK(teadapter_audio_length(b) == 48000u);

    char* text = nullptr;
    REQUIRE(teadapter_extract(b, "melody", &text) == TEADAPTER_OK);
    const auto melody = take_json(text);
    CHECK(melody.at("schema") == "melody/v1");
    CHECK(teadapter_validate_json(melody.dump().c_str()) == TEADAPTER_OK);
    REQUIRE(teadapter_extract(b, "beats", &text) == TEADAPTER_OK);
    CHECK(take_json(text).at("schema") == "beats/v1");
    const std::vector<double> zeros(64000, 0.0);
    teadapter_audio* quiet = nullptr;
    REQUIRE(teadapter_audio_from_samples(zeros.data(), zeros.size(), 16000.0, &quiet) == TEADAPTER_OK);
    CHECK(teadapter_extract(quiet, "beats", &text) == TEADAPTER_E_NO_BEATS);
    teadapter_audio_free(quiet);
    CHECK(teadapter_extract(b, "timbre", &text) == TEADAPTER_E_INVALID_ARGUMENT);
    teadapter_audio_free(a);
    teadapter_audio_free(b);
}

TEST_CASE("models and adapters end to end") {
    const fs::path dir = scratch("pipeline");
    const std::string config = toy_config(dir);
    char* manifest = nullptr;
    REQUIRE(teadapter_synth_corpus((dir / "corpus").c_str(), config.c_str(), 3, nullptr, nullptr, 1, &manifest) ==
            TEADAPTER_OK);
    const std::string manifest_path = manifest;
    teadapter_string_free(manifest);

    teadapter_model* model = nullptr;
    REQUIRE(teadapter_model_create(config.c_str(), 2, &model) == TEADAPTER_OK);
    int calls = 0;
    auto count = [](int, double, void* user) { ++*static_cast<int*>(user); };
    double loss = 0.0;
    REQUIRE(teadapter_model_pretrain(model, manifest_path.c_str(), 3, 3, count, &calls, &loss) == TEADAPTER_OK);
    CHECK(calls == 3);
    CHECK(std::isfinite(loss));
    char* text = nullptr;
    REQUIRE(teadapter_model_info(model, &text) == TEADAPTER_OK);
    const auto info = take_json(text);
    CHECK(info.at("frozen") == true);
    CHECK(info.at("info").at("pretrain").at("steps") == 3);

    teadapter_adapter* chord = nullptr;
    CHECK(teadapter_adapter_train(model, manifest_path.c_str(), "rhythm", nullptr, 2, 4, nullptr, nullptr, &chord,
                                  nullptr) != TEADAPTER_OK);
    REQUIRE(teadapter_adapter_train(model, manifest_path.c_str(), "melody", nullptr, 2, 4, nullptr, nullptr, &chord,
                                    &loss) == TEADAPTER_OK);
    REQUIRE(teadapter_adapter_info(chord, &text) == TEADAPTER_OK);
    CHECK(take_json(text).at("condition") == "melody");
    REQUIRE(teadapter_adapter_save(chord, (dir / "melody").c_str()) == TEADAPTER_OK);
    REQUIRE(teadapter_model_save(model, (dir / "model").c_str()) == TEADAPTER_OK);

    teadapter_model* loaded = nullptr;
    REQUIRE(teadapter_model_load((dir / "model").c_str(), nullptr, &loaded) == TEADAPTER_OK);
    teadapter_adapter* again = nullptr;
    REQUIRE(teadapter_adapter_load((dir / "melody").c_str(), &again) == TEADAPTER_OK);

    teadapter_audio* teacher = sine(330.0, 4.0);
    const teadapter_teacher t{teacher, again, 1.0, nullptr};
    teadapter_audio* x = nullptr;
    teadapter_audio* y = nullptr;
    REQUIRE(teadapter_generate(model, "generate a pop music", "major", 100, &t, 1, 9, &x) == TEADAPTER_OK);
    REQUIRE(teadapter_generate(loaded, "generate a pop music", "major", 100, &t, 1, 9, &y) == TEADAPTER_OK);
    REQUIRE(teadapter_audio_length(x) == teadapter_audio_length(y));
    CHECK(std::memcmp(teadapter_audio_samples(x), teadapter_audio_samples(y),
                      teadapter_audio_length(x) * sizeof(double)) == 0);
    CHECK(teadapter_generate(model, "x", "lydian", 0, nullptr, 0, 1, &x) != TEADAPTER_OK);

    REQUIRE(teadapter_inspect_checkpoint((dir / "model").c_str(), &text) == TEADAPTER_OK);
    const auto summary = take_json(text);
    CHECK(summary.at("kind") == "backbone");
    CHECK(summary.at("parameters").get<long>() > 0);
    CHECK(summary.at("frozen_tensors") == summary.at("tensors"));
    CHECK(teadapter_inspect_checkpoint((dir / "absent").c_str(), &text) == TEADAPTER_E_NOT_LOADED);

    fs::create_directories(dir / "gen");
    fs::create_directories(dir / "ref");
    teadapter_audio_write(x, (dir / "gen" / "a.wav").c_str());
    teadapter_audio_write(teacher, (dir / "ref" / "a.wav").c_str());
    char* csv = nullptr;
    REQUIRE(teadapter_evaluate((dir / "gen").c_str(), (dir / "ref").c_str(), &text, &csv) == TEADAPTER_OK);
    CHECK(take_json(text).at("schema") == "report/v1");
    CHECK(std::string(csv).rfind("name,", 0) == 0);
    teadapter_string_free(csv);
    teadapter_audio_write(x, (dir / "gen" / "b.wav").c_str());
    CHECK(teadapter_evaluate((dir / "gen").c_str(), (dir / "ref").c_str(), &text, nullptr) == TEADAPTER_E_INGEST);

    teadapter_audio_free(x);
    teadapter_audio_free(y);
    teadapter_audio_free(teacher);
    teadapter_adapter_free(chord);
    teadapter_adapter_free(again);
    teadapter_model_free(loaded);
    teadapter_model_free(model);
}

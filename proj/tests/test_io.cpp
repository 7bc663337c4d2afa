// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>

#include "doctest.h"
#include "dsp/wav.hpp"
#include "io/config.hpp"
#include "io/dataset.hpp"
#include "io/files.hpp"
#include "test_util.hpp"

using namespace teadapter;
using testing::code_of;
namespace fs = std::filesystem;

namespace {

// Restores an environment variable on scope exit.
class EnvGuard {
public:
    explicit EnvGuard(const char* name) : name_(name) {
        if (const char* v = std::getenv(name)) {
            old_ = v;
        }
    }
    ~EnvGuard() {
        if (old_) {
            ::setenv(name_, old_->c_str(), 1);
        } else {
            ::unsetenv(name_);
        }
    }
    EnvGuard(const EnvGuard&) = delete;
    EnvGuard& operator=(const EnvGuard&) = delete;

private:
    const char* name_;
    std::optional<std::string> old_;
};

void write_manifest(const fs::path& path, const nlohmann::json& entries) {
    io::write_json(path, {{"schema", "manifest/v1"}, {"entries", entries}});
}

}  // namespace

TEST_CASE("manifest parsing") {
    const auto dir = testing::scratch_dir("manifest_parse");
    const auto m = io::manifest_from_json(
        {{"schema", "manifest/v1"},
         {"entries",
          {{{"wav", "a.wav"}, {"caption", "slow piano"}, {"section", "intro"}, {"labels", "a.labels.json"}},
           {{"wav", "/abs/b.wav"}, {"genre", "jazz"}},
           {{"wav", "c.wav"}}}}},
        dir);
    REQUIRE(m.entries.size() == 3u);
    CHECK(m.entries[0].wav == dir / "a.wav");
    CHECK(m.entries[0].caption == "slow piano");
    CHECK(m.entries[0].section == synth::Section::kIntro);
    CHECK(m.entries[0].labels == dir / "a.labels.json");
    CHECK(m.entries[1].wav == fs::path("/abs/b.wav"));
    CHECK(m.entries[1].caption == "generate a jazz music");
    CHECK(m.entries[2].caption == "generate a music");
    CHECK(!m.entries[2].section);
    const auto again = io::manifest_from_json(io::to_json(m, dir), dir);
    CHECK(again.entries[1].caption == m.entries[1].caption);
    CHECK(again.entries[0].wav == m.entries[0].wav);

    CHECK(code_of([&] {
              io::manifest_from_json({{"schema", "manifest/v1"}, {"entries", {{{"wav", "a.wav"}, {"section", "generic"}}}}},
                                     dir);
          }) == ErrorCode::kSchemaError);
    CHECK(code_of([&] { io::manifest_from_json({{"schema", "manifest/v1"}, {"entries", {{{"caption", "x"}}}}}, dir); }) ==
          ErrorCode::kSchemaError);
    CHECK(code_of([&] { io::manifest_from_json({{"entries", nlohmann::json::array()}}, dir); }) ==
          ErrorCode::kSchemaError);
}

TEST_CASE("ingest conforms rate, channels and length") {
    const auto dir = testing::scratch_dir("ingest");
    // 44.1 kHz stereo: a 440 Hz tone on the left, silence on the right.
    std::vector<double> left, right;
    for (int i = 0; i < 44100 * 2; ++i) {
        left.push_back(0.5 * std::sin(2.0 * std::numbers::pi * 440.0 * i / 44100.0));
        right.push_back(0.0);
    }
    dsp::write_wav_pcm16_multichannel(dir / "stereo.wav", {left, right}, 44100.0);
    const auto conforming = testing::sine(330.0, 10.0, 0.4);
    dsp::write_wav(dir / "exact.wav", conforming);
    dsp::write_wav(dir / "short.wav", testing::sine(220.0, 3.0, 0.4));
    write_manifest(dir / "manifest.json",
                   {{{"wav", "stereo.wav"}}, {{"wav", "exact.wav"}}, {{"wav", "short.wav"}, {"caption", "tone"}}});

    io::IngestOptions opts;
    opts.cache_dir = dir / "cache";
    const auto data = io::ingest(dir / "manifest.json", opts);
    REQUIRE(data.clips.size() == 3u);
    for (const auto& c : data.clips) {
        CHECK(c.audio.sample_rate == 16000.0);
        CHECK(c.audio.samples.size() == 160000u);
    }
    // Downmix halves the tone; after 2 s the clip is zero padded.
    const auto& st = data.clips[0].audio.samples;
    double peak = 0.0;
    for (std::size_t i = 1000; i < 31000; ++i) {
        peak = std::max(peak, std::abs(st[i]));
    }
    CHECK(peak == doctest::Approx(0.25).epsilon(0.02));
    CHECK(st[40000] == 0.0);
    // An already conforming file comes through bit for bit.
    CHECK(data.clips[1].audio.samples == dsp::read_wav(dir / "exact.wav").samples);
    const auto& sh = data.clips[2].audio.samples;
    CHECK(sh[100] == dsp::read_wav(dir / "short.wav").samples[100]);
    CHECK(sh[48000] == 0.0);
    CHECK(sh.back() == 0.0);
    CHECK(data.clips[2].entry.caption == "tone");
}

TEST_CASE("ingest error paths") {
    const auto dir = testing::scratch_dir("ingest_errors");
    io::IngestOptions opts;
    opts.cache_dir = dir / "cache";
    write_manifest(dir / "missing.json", {{{"wav", "nowhere.wav"}}});
    CHECK(code_of([&] { io::ingest(dir / "missing.json", opts); }) == ErrorCode::kIngestError);
    CHECK(code_of([&] { io::ingest(dir / "no_manifest.json", opts); }) == ErrorCode::kIngestError);
    {
        std::ofstream(dir / "corrupt.wav") << "RIFF this is not a wave file";
    }
    write_manifest(dir / "corrupt.json", {{{"wav", "corrupt.wav"}}});
    CHECK(code_of([&] { io::ingest(dir / "corrupt.json", opts); }) == ErrorCode::kDecodeError);
    {
        std::ofstream(dir / "bad.json") << "{ not json";
    }
    CHECK(code_of([&] { io::ingest(dir / "bad.json", opts); }) == ErrorCode::kSchemaError);
}

TEST_CASE("clip cache reuses entries and detects collisions") {
    const auto dir = testing::scratch_dir("cache");
    dsp::write_wav(dir / "a.wav", testing::sine(500.0, 1.0));
    io::ClipCache cache(dir / "store");
    const auto first = cache.conform(dir / "a.wav", 16000.0, 20000);
    CHECK(cache.misses() == 1u);
    std::vector<fs::path> entries;
    for (const auto& e : fs::directory_iterator(dir / "store")) {
        entries.push_back(e.path());
    }
    REQUIRE(entries.size() == 2u);
    const auto stamp = fs::last_write_time(entries[0]);
    const auto second = cache.conform(dir / "a.wav", 16000.0, 20000);
    CHECK(cache.hits() == 1u);
    CHECK(second.samples == first.samples);
    CHECK(fs::last_write_time(entries[0]) == stamp);
    // A different length is a different key.
    cache.conform(dir / "a.wav", 16000.0, 16000);
    CHECK(cache.misses() == 2u);

    for (const auto& p : entries) {
        if (p.extension() == ".json") {
            auto meta = io::read_json(p);
            meta["source_sha256"] = std::string(64, '0');
            io::write_json(p, meta);
        }
    }
    CHECK(code_of([&] { cache.conform(dir / "a.wav", 16000.0, 20000); }) == ErrorCode::kCacheCollision);
}

TEST_CASE("environment settings") {
    EnvGuard cache("TEADAPTER_CACHE_DIR"), xdg("XDG_CACHE_HOME"), threads("TEADAPTER_THREADS");
    ::setenv("TEADAPTER_CACHE_DIR", "/tmp/td-cache", 1);
    CHECK(io::cache_dir_from_env() == fs::path("/tmp/td-cache"));
    ::unsetenv("TEADAPTER_CACHE_DIR");
    ::setenv("XDG_CACHE_HOME", "/tmp/xdg", 1);
    CHECK(io::cache_dir_from_env() == fs::path("/tmp/xdg/teadapter"));
    ::unsetenv("TEADAPTER_THREADS");
    CHECK(io::thread_count_from_env() == 1);
    ::setenv("TEADAPTER_THREADS", "3", 1);
    CHECK(io::thread_count_from_env() == 3);
    for (const char* bad : {"0", "-2", "four", "2x"}) {
        ::setenv("TEADAPTER_THREADS", bad, 1);
        CHECK(code_of([] { io::thread_count_from_env(); }) == ErrorCode::kInvalidArgument);
    }
}

TEST_CASE("parallel ingest gives the same clips") {
    const auto dir = testing::scratch_dir("ingest_parallel");
    nlohmann::json entries = nlohmann::json::array();
    for (int i = 0; i < 4; ++i) {
        const std::string name = "t" + std::to_string(i) + ".wav";
        dsp::write_wav(dir / name, testing::sine(200.0 + 50.0 * i, 2.0));
        entries.push_back({{"wav", name}});
    }
    write_manifest(dir / "m.json", entries);
    io::IngestOptions one;
    one.clip_seconds = 2.0;
    one.cache_dir = dir / "c1";
    one.threads = 1;
    io::IngestOptions many = one;
    many.cache_dir = dir / "c2";
    many.threads = 3;
    const auto a = io::ingest(dir / "m.json", one), b = io::ingest(dir / "m.json", many);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(a.clips[i].audio.samples == b.clips[i].audio.samples);
    }
}

TEST_CASE("config files") {
    CHECK(io::load_app_config({}).model.name == "desk");
    const auto c = io::app_config_from_json(
        {{"base", "toy"},
         {"steps", 25},
         {"learning_rate", 5e-4},
         {"profiles", {{{"name", "bell"}, {"harmonic_amps", {1.0, 0.0, 0.6}},
                        {"adsr", {{"attack", 0.001}, {"decay", 0.3}, {"sustain", 0.0}, {"release", 0.2}}}}}}});
    CHECK(c.model.name == "toy");
    CHECK(c.model.steps == 25);
    CHECK(c.model.learning_rate == 5e-4);
    CHECK(c.model.frames() == 64);
    CHECK(c.profile("bell").harmonic_amps.size() == 3u);
    CHECK(c.profile("piano").name == "piano");
    CHECK(code_of([] { io::app_config_from_json({{"schema", "config/v2"}}); }) == ErrorCode::kSchemaError);
    CHECK(code_of([] { io::app_config_from_json({{"steps", "many"}}); }) == ErrorCode::kSchemaError);
    CHECK(code_of([] { io::app_config_from_json({{"profiles", {{{"name", "x"}}}}}); }) == ErrorCode::kSchemaError);
    CHECK(code_of([] { io::load_app_config("/nonexistent/config.json"); }) == ErrorCode::kIoError);
}

TEST_CASE("atomic writes and digests") {
    const auto dir = testing::scratch_dir("files");
    io::write_text(dir / "x.txt", "abc");
    CHECK(io::read_bytes(dir / "x.txt") == std::vector<std::uint8_t>{'a', 'b', 'c'});
    CHECK(io::sha256_hex(std::string("abc")) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    int stray = 0;
    for (const auto& e : fs::directory_iterator(dir)) {
        stray += e.path().filename() != "x.txt" ? 1 : 0;
    }
    CHECK(stray == 0);
}

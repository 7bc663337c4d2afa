// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dsp/audio.hpp"
#include "json.hpp"
#include "synth/corpus.hpp"
#include "synth/synth.hpp"

namespace teadapter::io {

inline constexpr double kDefaultClipSeconds = 10.0;

struct ManifestEntry {
    std::filesystem::path wav;  // resolved against the manifest directory
    std::string caption;
    std::optional<synth::Section> section;
    std::optional<std::filesystem::path> labels;  // InstrumentLabelSet JSON
};

// "manifest/v1":
//   {"schema": "manifest/v1", "entries": [{"wav": "a.wav", "caption": "...",
//     "genre": "jazz", "section": "intro", "labels": "a.labels.json"}]}
// Entries without a caption get "generate a {genre} music" ("generate a
// music" without a genre). Relative paths resolve against `base_dir`.
struct DatasetManifest {
    std::vector<ManifestEntry> entries;
};

std::string default_caption(const std::string& genre);

DatasetManifest manifest_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
nlohmann::json to_json(const DatasetManifest& manifest, const std::filesystem::path& base_dir);
// Parses and checks every referenced file exists (IngestError naming the path).
DatasetManifest load_manifest(const std::filesystem::path& path);

struct IngestOptions {
    double sample_rate = dsp::kDefaultSampleRate;
    double clip_seconds = kDefaultClipSeconds;
    std::filesystem::path cache_dir;  // empty: cache_dir_from_env()
    int threads = 0;                  // 0: thread_count_from_env()
};

// Content-addressed store of conformed clips. The key hashes the source bytes
// together with the target rate and length; each entry keeps a sidecar with
// the full source digest, and a key whose sidecar disagrees is rejected as a
// collision.
class ClipCache {
public:
    explicit ClipCache(std::filesystem::path dir);

    const std::filesystem::path& dir() const { return dir_; }

    // Mono clip at the target rate and exactly `length` samples. Reuses the
    // cached entry when present (no rewrite). Throws DecodeError for corrupt
    // audio and CacheCollision for a mismatching entry.
    dsp::AudioClip conform(const std::filesystem::path& wav, double sample_rate, std::size_t length);

    std::size_t hits() const { return hits_; }
    std::size_t misses() const { return misses_; }

private:
    std::filesystem::path dir_;
    std::size_t hits_ = 0;
    std::size_t misses_ = 0;
};

// Downmix, band-limited resample, then zero-pad or truncate.
dsp::AudioClip conform_clip(const dsp::AudioClip& clip, double sample_rate, std::size_t length);

struct IngestedClip {
    ManifestEntry entry;
    dsp::AudioClip audio;
    std::optional<synth::InstrumentLabelSet> labels;
};

struct Dataset {
    std::vector<IngestedClip> clips;
};

Dataset ingest(const std::filesystem::path& manifest_path, const IngestOptions& options = {});

}  // namespace teadapter::io

// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#include "io/dataset.hpp"

#include <cmath>
#include <sstream>

#include "common/error.hpp"
#include "common/parallel.hpp"
#include "dsp/wav.hpp"
#include "io/files.hpp"
#include "nn/serialize.hpp"

namespace teadapter::io {
namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
}

std::string relative_to(const std::filesystem::path& p, const std::filesystem::path& base) {
    std::error_code ec;
    const auto rel = std::filesystem::relative(p, base, ec);
    return ec || rel.empty() ? p.string() : rel.generic_string();
}

void require_file(const std::filesystem::path& p) {
    require(std::filesystem::is_regular_file(p), ErrorCode::kIngestError, "missing file: " + p.string());
}

}  // namespace

std::string default_caption(const std::string& genre) {
    return genre.empty() ? "generate a music" : "generate a " + genre + " music";
}

DatasetManifest manifest_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
    try {
        require(j.is_object() && j.value("schema", "") == "manifest/v1", ErrorCode::kSchemaError,
                "expected a manifest/v1 document");
        DatasetManifest m;
        for (const auto& ej : j.at("entries")) {
            ManifestEntry e;
            e.wav = resolve(base_dir, ej.at("wav").get<std::string>());
            e.caption = ej.value("caption", "");
            if (e.caption.empty()) {
                e.caption = default_caption(ej.value("genre", ""));
            }
            if (ej.contains("section") && !ej.at("section").is_null()) {
                const auto section = synth::parse_section(ej.at("section").get<std::string>());
                require(section != synth::Section::kGeneric, ErrorCode::kSchemaError,
                        "manifest section labels must be intro, chorus or outro");
                e.section = section;
            }
            if (ej.contains("labels") && !ej.at("labels").is_null()) {
                e.labels = resolve(base_dir, ej.at("labels").get<std::string>());
            }
            m.entries.push_back(std::move(e));
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::kSchemaError, std::string("malformed manifest: ") + e.what());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::kSchemaError) {
            throw;
        }
        fail(ErrorCode::kSchemaError, std::string("invalid manifest: ") + e.what());
    }
}

nlohmann::json to_json(const DatasetManifest& manifest, const std::filesystem::path& base_dir) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : manifest.entries) {
        nlohmann::json ej = {{"wav", relative_to(e.wav, base_dir)}, {"caption", e.caption}};
        if (e.section) {
            ej["section"] = synth::section_name(*e.section);
        }
        if (e.labels) {
            ej["labels"] = relative_to(*e.labels, base_dir);
        }
        entries.push_back(ej);
    }
    return {{"schema", "manifest/v1"}, {"entries", entries}};
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
    require_file(path);
    DatasetManifest m = manifest_from_json(read_json(path), path.parent_path());
    for (const auto& e : m.entries) {
        require_file(e.wav);
        if (e.labels) {
            require_file(*e.labels);
        }
    }
    return m;
}

dsp::AudioClip conform_clip(const dsp::AudioClip& clip, double sample_rate, std::size_t length) {
    return dsp::fit_length(dsp::resample(clip, sample_rate), length);
}

ClipCache::ClipCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    require(!ec, ErrorCode::kIoError, "cannot create cache directory " + dir_.string() + ": " + ec.message());
}

dsp::AudioClip ClipCache::conform(const std::filesystem::path& wav, double sample_rate, std::size_t length) {
    require_file(wav);
    const std::vector<std::uint8_t> bytes = read_bytes(wav);
    const std::string source = sha256_hex(bytes);
    std::ostringstream params;
    params << source << ':' << std::lround(sample_rate) << ':' << length;
    const std::string key = sha256_hex(params.str());
    const auto tensor_path = dir_ / (key + ".tnsr");
    const auto meta_path = dir_ / (key + ".json");

    if (std::filesystem::exists(meta_path) && std::filesystem::exists(tensor_path)) {
        const nlohmann::json meta = read_json(meta_path);
        require(meta.value("source_sha256", "") == source && meta.value("length", std::size_t{0}) == length &&
                    meta.value("sample_rate", 0.0) == sample_rate,
                ErrorCode::kCacheCollision, "cache entry " + key + " belongs to different content");
        const nn::Tensor t = nn::read_tnsr(tensor_path);
        require(t.numel() == length, ErrorCode::kCacheCollision, "cache entry " + key + " has the wrong length");
        ++hits_;
        dsp::AudioClip clip;
        clip.sample_rate = sample_rate;
        clip.samples.assign(t.storage().begin(), t.storage().end());
        return clip;
    }

    dsp::AudioClip decoded;
    try {
        decoded = dsp::decode_wav(bytes);
    } catch (const Error& e) {
        fail(ErrorCode::kDecodeError, wav.string() + ": " + e.what());
    }
    const dsp::AudioClip clip = conform_clip(decoded, sample_rate, length);
    nn::Tensor t(nn::Shape{static_cast<int>(length)});
    for (std::size_t i = 0; i < length; ++i) {
        t[i] = static_cast<nn::Real>(clip.samples[i]);
    }
    write_bytes(tensor_path, nn::encode_tnsr(t));
    write_json(meta_path, {{"schema", "cache-entry/v1"},
                           {"source", wav.string()},
                           {"source_sha256", source},
                           {"sample_rate", sample_rate},
                           {"length", length}});
    ++misses_;
    dsp::AudioClip out;
    out.sample_rate = sample_rate;
    out.samples.assign(t.storage().begin(), t.storage().end());
    return out;
}

Dataset ingest(const std::filesystem::path& manifest_path, const IngestOptions& options) {
    require(options.sample_rate > 0.0 && options.clip_seconds > 0.0, ErrorCode::kInvalidArgument,
            "ingest needs a positive rate and clip length");
    const DatasetManifest manifest = load_manifest(manifest_path);
    const auto length = static_cast<std::size_t>(std::lround(options.sample_rate * options.clip_seconds));
    const int threads = options.threads > 0 ? options.threads : thread_count_from_env();
    const std::filesystem::path cache_dir = options.cache_dir.empty() ? cache_dir_from_env() : options.cache_dir;

    Dataset data;
    data.clips.resize(manifest.entries.size());
    parallel_for(manifest.entries.size(), threads, [&](std::size_t i) {
        ClipCache cache(cache_dir);
        IngestedClip& c = data.clips[i];
        c.entry = manifest.entries[i];
        c.audio = cache.conform(c.entry.wav, options.sample_rate, length);
        if (c.entry.labels) {
            c.labels = synth::labels_from_json(read_json(*c.entry.labels));
        }
    });
    return data;
}

}  // namespace teadapter::io

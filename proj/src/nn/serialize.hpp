// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "nn/autograd.hpp"

namespace teadapter::nn {

// TNSR1: "TNSR1" magic, u8 rank, rank x u32 LE extents, f32 LE payload.
std::vector<std::uint8_t> encode_tnsr(const Tensor& tensor);
Tensor decode_tnsr(const std::vector<std::uint8_t>& bytes);

void write_tnsr(const std::filesystem::path& path, const Tensor& tensor);
Tensor read_tnsr(const std::filesystem::path& path);

// A checkpoint is a directory holding one TNSR1 file per parameter plus
// manifest.json (schema "checkpoint/v1") with names, shapes, frozen flags and
// a free-form "meta" object.
void save_checkpoint(const std::filesystem::path& dir, const std::vector<Parameter*>& params,
                     const nlohmann::json& meta);

// Loads values into `params` by name; every parameter must be present with a
// matching shape. Returns the manifest's "meta" object.
nlohmann::json load_checkpoint(const std::filesystem::path& dir, const std::vector<Parameter*>& params);

nlohmann::json read_manifest(const std::filesystem::path& dir);

}  // namespace teadapter::nn

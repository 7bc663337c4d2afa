// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace teadapter::io {

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);
// Parse errors become SchemaError; unreadable files IoError.
nlohmann::json read_json(const std::filesystem::path& path);
// Writes through a temporary sibling and renames, so readers never see a
// partial file.
void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);
void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

// Lower-case hex SHA-256.
std::string sha256_hex(const std::vector<std::uint8_t>& bytes);
std::string sha256_hex(const std::string& text);

// TEADAPTER_CACHE_DIR, else $XDG_CACHE_HOME/teadapter, else ~/.cache/teadapter,
// else ./.teadapter-cache.
std::filesystem::path cache_dir_from_env();
// TEADAPTER_THREADS (>= 1), else 1.
int thread_count_from_env();

}  // namespace teadapter::io

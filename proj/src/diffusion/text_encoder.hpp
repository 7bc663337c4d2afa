// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

namespace teadapter::diffusion {

enum class Mode { kMajor, kMinor };

std::string mode_name(Mode mode);
Mode parse_mode(const std::string& name);

struct TextCondition {
    std::string prompt;
    std::optional<Mode> mode;
    std::optional<int> tempo_bpm;

    // Prompt with the global tags appended.
    std::string text() const;
};

// Appends ", in <mode> key" and ", at <tempo> BPM" for the tags that are set.
// A suffix already at the end of the prompt is not added again.
std::string append_global_tags(const std::string& prompt, std::optional<Mode> mode, std::optional<int> tempo_bpm);

// Lower-cased alphanumeric tokens.
std::vector<std::string> tokenize(const std::string& text);

// Bag of hashed token ids in [0, vocab). FNV-1a keeps ids stable across builds.
std::vector<int> token_ids(const std::string& text, int vocab);

}  // namespace teadapter::diffusion

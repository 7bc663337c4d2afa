// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#include "diffusion/text_encoder.hpp"

#include <cctype>
#include <cstdint>

#include "common/error.hpp"

namespace teadapter::diffusion {
namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace

std::string mode_name(Mode mode) { return mode == Mode::kMajor ? "major" : "minor"; }

Mode parse_mode(const std::string& name) {
    if (name == "major") {
        return Mode::kMajor;
    }
    if (name == "minor") {
        return Mode::kMinor;
    }
    fail(ErrorCode::kInvalidArgument, "mode must be 'major' or 'minor', got '" + name + "'");
}

std::string TextCondition::text() const { return append_global_tags(prompt, mode, tempo_bpm); }

std::string append_global_tags(const std::string& prompt, std::optional<Mode> mode, std::optional<int> tempo_bpm) {
    const std::string mode_tag = mode ? ", in " + mode_name(*mode) + " key" : "";
    const std::string tempo_tag = tempo_bpm ? ", at " + std::to_string(*tempo_bpm) + " BPM" : "";
    std::string out = prompt;
    if (ends_with(out, mode_tag + tempo_tag)) {
        return out;
    }
    if (!mode_tag.empty() && !ends_with(out, mode_tag)) {
        out += mode_tag;
    }
    if (!tempo_tag.empty() && !ends_with(out, tempo_tag)) {
        out += tempo_tag;
    }
    return out;
}

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) {
        tokens.push_back(std::move(cur));
    }
    return tokens;
}

std::vector<int> token_ids(const std::string& text, int vocab) {
    require(vocab > 0, ErrorCode::kInvalidArgument, "vocabulary size must be positive");
    std::vector<int> ids;
    for (const auto& tok : tokenize(text)) {
        ids.push_back(static_cast<int>(fnv1a(tok) % static_cast<std::uint64_t>(vocab)));
    }
    return ids;
}

}  // namespace teadapter::diffusion

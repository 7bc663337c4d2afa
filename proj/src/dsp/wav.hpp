// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "dsp/audio.hpp"

namespace teadapter::dsp {

enum class WavFormat { kPcm16, kFloat32 };

// RIFF/WAVE reader for PCM (8/16/24/32-bit) and IEEE float32, any channel
// count; multichannel input is averaged down to mono. Throws DecodeError.
AudioClip decode_wav(const std::vector<std::uint8_t>& bytes);
AudioClip read_wav(const std::filesystem::path& path);

// Mono little-endian writer. PCM16 clips to [-1, 1].
std::vector<std::uint8_t> encode_wav(const AudioClip& clip, WavFormat format = WavFormat::kPcm16);
void write_wav(const std::filesystem::path& path, const AudioClip& clip, WavFormat format = WavFormat::kPcm16);

// Writes an interleaved multichannel PCM16 file; used to produce stereo test fixtures.
void write_wav_pcm16_multichannel(const std::filesystem::path& path, const std::vector<std::vector<double>>& channels,
                                  double sample_rate);

}  // namespace teadapter::dsp

// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#include "dsp/wav.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "common/error.hpp"

namespace teadapter::dsp {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t le32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t le16(const std::uint8_t* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
    }
}

void put_tag(std::vector<std::uint8_t>& out, const char* tag) { out.insert(out.end(), tag, tag + 4); }

double decode_sample(const std::uint8_t* p, std::uint16_t format, std::uint16_t bits) {
    if (format == kFormatFloat) {
        return static_cast<double>(std::bit_cast<float>(le32(p)));
    }
    switch (bits) {
        case 8:
            return (static_cast<double>(p[0]) - 128.0) / 128.0;
        case 16:
            return static_cast<double>(static_cast<std::int16_t>(le16(p))) / 32768.0;
        case 24: {
            std::int32_t v = static_cast<std::int32_t>(p[0] | (p[1] << 8) | (p[2] << 16));
            if (v & 0x800000) {
                v |= ~0xFFFFFF;
            }
            return static_cast<double>(v) / 8388608.0;
        }
        case 32:
            return static_cast<double>(static_cast<std::int32_t>(le32(p))) / 2147483648.0;
        default:
            fail(ErrorCode::kDecodeError, "unsupported PCM bit depth " + std::to_string(bits));
    }
}

std::vector<std::uint8_t> header_and_payload(std::uint16_t format, std::uint16_t channels, std::uint32_t rate,
                                             std::uint16_t bits, const std::vector<std::uint8_t>& payload) {
    std::vector<std::uint8_t> out;
    out.reserve(44 + payload.size());
    put_tag(out, "RIFF");
    put32(out, static_cast<std::uint32_t>(36 + payload.size()));
    put_tag(out, "WAVE");
    put_tag(out, "fmt ");
    put32(out, 16);
    put16(out, format);
    put16(out, channels);
    put32(out, rate);
    const std::uint16_t block = static_cast<std::uint16_t>(channels * bits / 8);
    put32(out, rate * block);
    put16(out, block);
    put16(out, bits);
    put_tag(out, "data");
    put32(out, static_cast<std::uint32_t>(payload.size()));
    out.insert(out.end(), payload.begin(), payload.end());
    return out;
}

std::int16_t to_pcm16(double s) {
    const double clipped = std::clamp(s, -1.0, 1.0);
    return static_cast<std::int16_t>(std::lround(clipped * 32767.0));
}

void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), ErrorCode::kIoError, "cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

AudioClip decode_wav(const std::vector<std::uint8_t>& bytes) {
    require(bytes.size() >= 12 && std::memcmp(bytes.data(), "RIFF", 4) == 0 &&
                std::memcmp(bytes.data() + 8, "WAVE", 4) == 0,
            ErrorCode::kDecodeError, "not a RIFF/WAVE stream");
    std::uint16_t format = 0, channels = 0, bits = 0;
    std::uint32_t rate = 0;
    const std::uint8_t* data = nullptr;
    std::size_t data_size = 0;
    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const std::uint8_t* chunk = bytes.data() + pos;
        const std::uint32_t size = le32(chunk + 4);
        const std::size_t body = pos + 8;
        const std::size_t available = std::min<std::size_t>(size, bytes.size() - body);
        if (std::memcmp(chunk, "fmt ", 4) == 0) {
            require(available >= 16, ErrorCode::kDecodeError, "fmt chunk too small");
            format = le16(chunk + 8);
            channels = le16(chunk + 10);
            rate = le32(chunk + 12);
            bits = le16(chunk + 22);
            if (format == kFormatExtensible && available >= 26) {
                format = le16(chunk + 32);
            }
        } else if (std::memcmp(chunk, "data", 4) == 0) {
            data = bytes.data() + body;
            data_size = available;
        }
        pos = body + size + (size & 1u);
    }
    require(format != 0 && data != nullptr, ErrorCode::kDecodeError, "missing fmt or data chunk");
    require(format == kFormatPcm || (format == kFormatFloat && bits == 32), ErrorCode::kDecodeError,
            "unsupported WAV sample format " + std::to_string(format));
    require(channels > 0 && rate > 0 && bits % 8 == 0 && bits > 0, ErrorCode::kDecodeError, "invalid fmt header");
    const std::size_t sample_bytes = bits / 8;
    const std::size_t frame_bytes = sample_bytes * channels;
    const std::size_t frames = data_size / frame_bytes;
    AudioClip clip;
    clip.sample_rate = static_cast<double>(rate);
    clip.samples.resize(frames);
    for (std::size_t i = 0; i < frames; ++i) {
        double acc = 0.0;
        for (std::size_t c = 0; c < channels; ++c) {
            acc += decode_sample(data + i * frame_bytes + c * sample_bytes, format, bits);
        }
        clip.samples[i] = channels == 1 ? acc : acc / static_cast<double>(channels);
    }
    return clip;
}

AudioClip read_wav(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), ErrorCode::kIoError, "cannot open " + path.string());
    std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    try {
        return decode_wav(bytes);
    } catch (const Error& e) {
        fail(e.code(), path.string() + ": " + e.what());
    }
}

std::vector<std::uint8_t> encode_wav(const AudioClip& clip, WavFormat format) {
    const auto rate = static_cast<std::uint32_t>(std::lround(clip.sample_rate));
    std::vector<std::uint8_t> payload;
    if (format == WavFormat::kPcm16) {
        payload.reserve(clip.samples.size() * 2);
        for (double s : clip.samples) {
            put16(payload, static_cast<std::uint16_t>(to_pcm16(s)));
        }
        return header_and_payload(kFormatPcm, 1, rate, 16, payload);
    }
    payload.reserve(clip.samples.size() * 4);
    for (double s : clip.samples) {
        put32(payload, std::bit_cast<std::uint32_t>(static_cast<float>(s)));
    }
    return header_and_payload(kFormatFloat, 1, rate, 32, payload);
}

void write_wav(const std::filesystem::path& path, const AudioClip& clip, WavFormat format) {
    write_bytes(path, encode_wav(clip, format));
}

void write_wav_pcm16_multichannel(const std::filesystem::path& path, const std::vector<std::vector<double>>& channels,
                                  double sample_rate) {
    require(!channels.empty(), ErrorCode::kEmptyInput, "no channels to write");
    const std::size_t frames = channels.front().size();
    std::vector<std::uint8_t> payload;
    for (std::size_t i = 0; i < frames; ++i) {
        for (const auto& ch : channels) {
            put16(payload, static_cast<std::uint16_t>(to_pcm16(i < ch.size() ? ch[i] : 0.0)));
        }
    }
    write_bytes(path, header_and_payload(kFormatPcm, static_cast<std::uint16_t>(channels.size()),
                                         static_cast<std::uint32_t>(std::lround(sample_rate)), 16, payload));
}

}  // namespace teadapter::dsp

// Copyright 2026 The TEAdapter Authors
// SPDX-License-Identifier: Apache-2.0

#include "nn/serialize.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>

namespace teadapter::nn {
namespace {

constexpr char kMagic[5] = {'T', 'N', 'S', 'R', '1'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFFu));
    }
}

std::uint32_t get_u32(const std::vector<std::uint8_t>& in, std::size_t offset) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
        v |= static_cast<std::uint32_t>(in[offset + static_cast<std::size_t>(i)]) << (8 * i);
    }
    return v;
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), ErrorCode::kIoError, "cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string file_for(const std::string& name) { return name + ".tnsr"; }

}  // namespace

std::vector<std::uint8_t> encode_tnsr(const Tensor& tensor) {
    require(tensor.rank() <= 255, ErrorCode::kShapeError, "TNSR1 rank limited to 255");
    std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
    out.push_back(static_cast<std::uint8_t>(tensor.rank()));
    for (int d : tensor.shape()) {
        put_u32(out, static_cast<std::uint32_t>(d));
    }
    out.reserve(out.size() + 4 * tensor.numel());
    for (Real v : tensor.data()) {
        put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    }
    return out;
}

Tensor decode_tnsr(const std::vector<std::uint8_t>& bytes) {
    require(bytes.size() >= 6 && std::memcmp(bytes.data(), kMagic, 5) == 0, ErrorCode::kDecodeError,
            "not a TNSR1 stream");
    const std::size_t rank = bytes[5];
    require(bytes.size() >= 6 + 4 * rank, ErrorCode::kDecodeError, "truncated TNSR1 header");
    Shape shape;
    for (std::size_t i = 0; i < rank; ++i) {
        shape.push_back(static_cast<int>(get_u32(bytes, 6 + 4 * i)));
    }
    const std::size_t header = 6 + 4 * rank;
    const std::size_t count = shape_numel(shape);
    require(bytes.size() == header + 4 * count, ErrorCode::kDecodeError, "TNSR1 payload size mismatch");
    std::vector<Real> data(count);
    for (std::size_t i = 0; i < count; ++i) {
        data[i] = static_cast<Real>(std::bit_cast<float>(get_u32(bytes, header + 4 * i)));
    }
    return Tensor(std::move(shape), std::move(data));
}

void write_tnsr(const std::filesystem::path& path, const Tensor& tensor) {
    const auto bytes = encode_tnsr(tensor);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), ErrorCode::kIoError, "cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    require(static_cast<bool>(out), ErrorCode::kIoError, "short write to " + path.string());
}

Tensor read_tnsr(const std::filesystem::path& path) { return decode_tnsr(read_bytes(path)); }

void save_checkpoint(const std::filesystem::path& dir, const std::vector<Parameter*>& params,
                     const nlohmann::json& meta) {
    std::filesystem::create_directories(dir);
    nlohmann::json tensors = nlohmann::json::array();
    for (const Parameter* p : params) {
        write_tnsr(dir / file_for(p->name), p->value);
        tensors.push_back({{"name", p->name},
                           {"file", file_for(p->name)},
                           {"shape", p->value.shape()},
                           {"frozen", p->frozen}});
    }
    nlohmann::json manifest{{"schema", "checkpoint/v1"}, {"tensors", tensors}, {"meta", meta}};
    std::ofstream out(dir / "manifest.json", std::ios::trunc);
    require(static_cast<bool>(out), ErrorCode::kIoError, "cannot write manifest in " + dir.string());
    out << manifest.dump(2) << '\n';
}

nlohmann::json read_manifest(const std::filesystem::path& dir) {
    const auto path = dir / "manifest.json";
    require(std::filesystem::exists(path), ErrorCode::kNotLoaded, "no checkpoint manifest at " + path.string());
    std::ifstream in(path);
    nlohmann::json manifest;
    try {
        in >> manifest;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::kSchemaError, "malformed manifest " + path.string() + ": " + e.what());
    }
    require(manifest.value("schema", "") == "checkpoint/v1", ErrorCode::kSchemaError,
            "unexpected manifest schema in " + path.string());
    return manifest;
}

nlohmann::json load_checkpoint(const std::filesystem::path& dir, const std::vector<Parameter*>& params) {
    const nlohmann::json manifest = read_manifest(dir);
    std::map<std::string, nlohmann::json> entries;
    for (const auto& entry : manifest.at("tensors")) {
        entries[entry.at("name").get<std::string>()] = entry;
    }
    for (Parameter* p : params) {
        auto it = entries.find(p->name);
        require(it != entries.end(), ErrorCode::kNotLoaded,
                "checkpoint " + dir.string() + " lacks tensor " + p->name);
        Tensor value = read_tnsr(dir / it->second.at("file").get<std::string>());
        require(value.shape() == p->value.shape(), ErrorCode::kShapeError,
                "checkpoint tensor " + p->name + " has shape " + shape_string(value.shape()) + ", expected " +
                    shape_string(p->value.shape()));
        p->value = std::move(value);
        p->grad = Tensor::zeros_like(p->value);
        p->frozen = it->second.value("frozen", false);
    }
    return manifest.value("meta", nlohmann::json::object());
}

}  // namespace teadapter::nn

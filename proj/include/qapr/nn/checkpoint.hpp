// SPDX-License-Identifier: MIT

/**
 * @file checkpoint.hpp
 * @brief Parameter checkpoints: `<base>.bin` holds little-endian float64 values
 * in layout order, `<base>.json` describes the config and every tensor.
 */

#pragma once

#include "qapr/errors.hpp"
#include "qapr/nn/encoder.hpp"

#include <nlohmann/json.hpp>

#include <bit>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <memory>
#include <string>
#include <vector>

namespace qapr::nn {

[[nodiscard]] inline nlohmann::json config_to_json(const EncoderConfig& c) {
    return {{"n_logical", c.n_logical}, {"d", c.d},         {"layers", c.layers},
            {"heads", c.heads},         {"ffn_mult", c.ffn_mult}, {"head_hidden", c.head_hidden},
            {"eps", c.eps}};
}

[[nodiscard]] inline EncoderConfig config_from_json(const nlohmann::json& j) {
    try {
        EncoderConfig c;
        c.n_logical = j.at("n_logical").get<int>();
        c.d = j.at("d").get<int>();
        c.layers = j.at("layers").get<int>();
        c.heads = j.at("heads").get<int>();
        c.ffn_mult = j.value("ffn_mult", c.ffn_mult);
        c.head_hidden = j.value("head_hidden", c.head_hidden);
        c.eps = j.value("eps", c.eps);
        c.validate();
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad encoder config: ") + e.what());
    }
}

[[nodiscard]] inline nlohmann::json checkpoint_manifest(const EncoderParams& p) {
    nlohmann::json tensors = nlohmann::json::array();
    std::size_t offset = 0;
    for (const auto& s : p.layout->specs()) {
        tensors.push_back({{"name", s.name}, {"shape", {s.rows, s.cols}}, {"offset", offset}});
        offset += static_cast<std::size_t>(s.rows) * static_cast<std::size_t>(s.cols);
    }
    return {{"format", "qapr-encoder"},
            {"version", 1},
            {"dtype", "float64-le"},
            {"count", offset},
            {"config", config_to_json(p.config())},
            {"tensors", tensors}};
}

[[nodiscard]] inline std::string encode_le_f64(const EncoderParams& p) {
    std::string out;
    for (const auto& t : p.tensors) {
        for (double x : t.v) {
            const auto bits = std::bit_cast<std::uint64_t>(x);
            for (int b = 0; b < 8; ++b) {
                out.push_back(static_cast<char>((bits >> (8 * b)) & 0xFFU));
            }
        }
    }
    return out;
}

inline void save_checkpoint(const EncoderParams& p, const std::string& base) {
    std::ofstream bin(base + ".bin", std::ios::binary);
    std::ofstream js(base + ".json");
    if (!bin || !js) {
        throw IOError("cannot write checkpoint '" + base + "'");
    }
    const std::string bytes = encode_le_f64(p);
    bin.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    js << checkpoint_manifest(p).dump(2) << '\n';
    if (!bin || !js) {
        throw IOError("failed writing checkpoint '" + base + "'");
    }
}

namespace detail {

[[nodiscard]] inline EncoderParams params_from_bytes_unchecked(const nlohmann::json& manifest, const std::string& bytes) {
    if (manifest.value("format", "") != "qapr-encoder" || manifest.value("dtype", "") != "float64-le") {
        throw ConfigError("not a float64 encoder checkpoint");
    }
    const EncoderConfig cfg = config_from_json(manifest.at("config"));
    EncoderParams p{std::make_shared<const ParamLayout>(cfg), {}};
    const auto& specs = p.layout->specs();
    const auto& listed = manifest.at("tensors");
    if (listed.size() != specs.size()) {
        throw ShapeMismatch("checkpoint lists " + std::to_string(listed.size()) + " tensors, layout has " +
                            std::to_string(specs.size()));
    }
    if (bytes.size() != 8 * p.layout->parameter_count()) {
        throw ShapeMismatch("checkpoint payload has " + std::to_string(bytes.size()) + " bytes, expected " +
                            std::to_string(8 * p.layout->parameter_count()));
    }
    std::size_t offset = 0;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const auto& s = specs[i];
        const auto& e = listed[i];
        if (e.at("name").get<std::string>() != s.name || e.at("shape").at(0).get<int>() != s.rows ||
            e.at("shape").at(1).get<int>() != s.cols || e.at("offset").get<std::size_t>() != offset) {
            throw ShapeMismatch("checkpoint tensor " + std::to_string(i) + " does not match '" + s.name + "'");
        }
        Mat m(s.rows, s.cols);
        for (double& x : m.v) {
            std::uint64_t bits = 0;
            for (int b = 0; b < 8; ++b) {
                bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[8 * offset + static_cast<std::size_t>(b)]))
                        << (8 * b);
            }
            x = std::bit_cast<double>(bits);
            ++offset;
        }
        p.tensors.push_back(std::move(m));
    }
    return p;
}

} // namespace detail

/// Rebuilds parameters from a manifest and raw bytes; names, shapes and offsets must match the layout.
[[nodiscard]] inline EncoderParams params_from_bytes(const nlohmann::json& manifest, const std::string& bytes) {
    try {
        return detail::params_from_bytes_unchecked(manifest, bytes);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad checkpoint manifest: ") + e.what());
    }
}

[[nodiscard]] inline EncoderParams load_checkpoint(const std::string& base) {
    std::ifstream js(base + ".json");
    std::ifstream bin(base + ".bin", std::ios::binary);
    if (!js || !bin) {
        throw IOError("cannot open checkpoint '" + base + "'");
    }
    nlohmann::json manifest;
    try {
        js >> manifest;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad checkpoint manifest: ") + e.what());
    }
    const std::string bytes((std::istreambuf_iterator<char>(bin)), std::istreambuf_iterator<char>());
    return params_from_bytes(manifest, bytes);
}

} // namespace qapr::nn

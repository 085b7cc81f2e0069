#pragma once

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "fdqn/config.hpp"
#include "fdqn/errors.hpp"
#include "fdqn/nn.hpp"

namespace fdqn {

struct CheckpointMeta {
    std::string env_name;
    NetworkSpec spec;
    int episodes = 0;
    std::uint64_t seed = 0;
};

namespace detail {

inline void put_u32le(std::string& buf, std::uint32_t v) {
    buf.push_back(static_cast<char>(v & 0xff));
    buf.push_back(static_cast<char>((v >> 8) & 0xff));
    buf.push_back(static_cast<char>((v >> 16) & 0xff));
    buf.push_back(static_cast<char>((v >> 24) & 0xff));
}

inline std::uint32_t get_u32le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline void put_f32le(std::string& buf, float f) { put_u32le(buf, std::bit_cast<std::uint32_t>(f)); }

inline float get_f32le(const unsigned char* p) { return std::bit_cast<float>(get_u32le(p)); }

inline std::string format_input(const NetworkSpec& s) {
    if (s.input_kind == ObsKind::Vector) return "vector:" + std::to_string(s.input_dim);
    return "frames:" + std::to_string(s.in_channels) + "x" + std::to_string(s.in_height) + "x" +
           std::to_string(s.in_width);
}

inline std::string format_conv(const NetworkSpec& s) {
    std::string out;
    for (std::size_t i = 0; i < s.conv_layers.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(s.conv_layers[i].out_channels) + "x" + std::to_string(s.conv_layers[i].kernel) +
               "x" + std::to_string(s.conv_layers[i].stride);
    }
    return out;
}

inline std::string format_int_list(const std::vector<int>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(v[i]);
    }
    return out;
}

}  // namespace detail

constexpr char kCheckpointMagic[4] = {'F', 'D', 'Q', 'N'};
constexpr std::uint32_t kCheckpointVersion = 1;

inline std::string describe_spec(const NetworkSpec& s) {
    std::string out = "input=" + detail::format_input(s);
    if (!s.conv_layers.empty()) out += " conv=" + detail::format_conv(s);
    out += " hidden=" + detail::format_int_list(s.hidden_sizes);
    out += " actions=" + std::to_string(s.action_size);
    return out;
}

// Layout: magic "FDQN", u32 version, u32 metadata length, metadata text
// (key=value lines, UTF-8), then the weight payload: for each layer in order,
// row-major weights then biases, each as a little-endian 32-bit IEEE-754
// float. Written to "<path>.partial" and renamed into place.
inline void save_checkpoint(const std::string& path, const Parameters& params, const CheckpointMeta& meta) {
    std::string meta_text;
    meta_text += "env=" + meta.env_name + "\n";
    meta_text += "input=" + detail::format_input(params.spec) + "\n";
    if (!params.spec.conv_layers.empty()) meta_text += "conv=" + detail::format_conv(params.spec) + "\n";
    meta_text += "hidden=" + detail::format_int_list(params.spec.hidden_sizes) + "\n";
    meta_text += "actions=" + std::to_string(params.spec.action_size) + "\n";
    meta_text += "episodes=" + std::to_string(meta.episodes) + "\n";
    meta_text += "seed=" + std::to_string(meta.seed) + "\n";

    std::string buf;
    buf.append(kCheckpointMagic, 4);
    detail::put_u32le(buf, kCheckpointVersion);
    detail::put_u32le(buf, static_cast<std::uint32_t>(meta_text.size()));
    buf += meta_text;
    for (const auto& l : params.layers) {
        for (const float w : l.weights) detail::put_f32le(buf, w);
        for (const float b : l.bias) detail::put_f32le(buf, b);
    }

    const std::string partial = path + ".partial";
    {
        std::ofstream out(partial, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("save_checkpoint: cannot open " + partial);
        out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
        if (!out) throw IoError("save_checkpoint: write failed for " + partial);
    }
    std::error_code ec;
    std::filesystem::rename(partial, path, ec);
    if (ec) throw IoError("save_checkpoint: cannot move " + partial + " to " + path + ": " + ec.message());
}

inline std::pair<Parameters, CheckpointMeta> load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("load_checkpoint: cannot open " + path);
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto* p = reinterpret_cast<const unsigned char*>(buf.data());

    if (buf.size() < 12) throw CorruptCheckpoint(path + ": file too short for header");
    if (std::string(buf.data(), 4) != std::string(kCheckpointMagic, 4))
        throw CorruptCheckpoint(path + ": bad magic (expected FDQN)");
    const std::uint32_t version = detail::get_u32le(p + 4);
    if (version != kCheckpointVersion)
        throw CorruptCheckpoint(path + ": unsupported version " + std::to_string(version));
    const std::uint32_t meta_len = detail::get_u32le(p + 8);
    if (buf.size() < 12 + static_cast<std::size_t>(meta_len))
        throw CorruptCheckpoint(path + ": truncated metadata block");
    const std::string meta_text = buf.substr(12, meta_len);

    CheckpointMeta meta;
    std::string input, conv, hidden, actions;
    std::stringstream ss(meta_text);
    std::string line;
    while (std::getline(ss, line)) {
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw CorruptCheckpoint(path + ": malformed metadata line '" + line + "'");
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        if (key == "env") meta.env_name = value;
        else if (key == "input") input = value;
        else if (key == "conv") conv = value;
        else if (key == "hidden") hidden = value;
        else if (key == "actions") actions = value;
        else if (key == "episodes") meta.episodes = std::stoi(value);
        else if (key == "seed") meta.seed = std::stoull(value);
        else throw CorruptCheckpoint(path + ": unknown metadata key '" + key + "'");
    }
    if (input.empty() || hidden.empty() || actions.empty())
        throw CorruptCheckpoint(path + ": metadata missing input/hidden/actions");

    NetworkSpec spec;
    try {
        const auto colon = input.find(':');
        if (colon == std::string::npos) throw ConfigError("bad input");
        const std::string kind = input.substr(0, colon);
        const std::string dims = input.substr(colon + 1);
        const std::vector<int> hidden_sizes = detail::parse_int_list("hidden", hidden);
        const int action_size = detail::parse_number<int>("actions", actions);
        if (kind == "vector") {
            spec = NetworkSpec::vector_input(detail::parse_number<int>("input", dims), hidden_sizes, action_size);
        } else if (kind == "frames") {
            std::stringstream ds(dims);
            std::string f;
            std::vector<int> nums;
            while (std::getline(ds, f, 'x')) nums.push_back(detail::parse_number<int>("input", f));
            if (nums.size() != 3) throw ConfigError("bad frames dims");
            spec = NetworkSpec::frames_input(nums[0], nums[1], nums[2], detail::parse_conv_list("conv", conv),
                                             hidden_sizes, action_size);
        } else {
            throw ConfigError("bad input kind");
        }
    } catch (const ConfigError& e) {
        throw CorruptCheckpoint(path + ": invalid network description in metadata (" + e.what() + ")");
    }
    meta.spec = spec;

    Parameters params = zero_params(spec);
    const std::size_t expect = params.scalar_count() * 4;
    const std::size_t have = buf.size() - 12 - meta_len;
    if (have != expect)
        throw CorruptCheckpoint(path + ": payload size mismatch (expected " + std::to_string(expect) +
                                " bytes = 4 x " + std::to_string(params.scalar_count()) + " parameters, found " +
                                std::to_string(have) + ")");
    const unsigned char* cur = p + 12 + meta_len;
    for (auto& l : params.layers) {
        for (float& w : l.weights) {
            w = detail::get_f32le(cur);
            cur += 4;
        }
        for (float& b : l.bias) {
            b = detail::get_f32le(cur);
            cur += 4;
        }
    }
    if (!params.all_finite()) throw CorruptCheckpoint(path + ": non-finite parameter values in payload");
    return {std::move(params), std::move(meta)};
}

}  // namespace fdqn

#pragma once

#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "fdqn/errors.hpp"

namespace fdqn {

// One line per training episode.
struct MetricsRecord {
    int episode = 0;  // 1-based, strictly increasing
    int steps = 0;
    double episode_reward = 0.0;
    double epsilon = 0.0;
    double mean_loss = 0.0;
    std::size_t buffer_size = 0;
    std::int64_t wall_ms = 0;
};

namespace detail {
inline std::string real6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}
}  // namespace detail

// Line format, fixed key order, reals at 6 significant digits:
//   episode:1 steps:200 episode_reward:200 epsilon:0.995 mean_loss:0.001 buffer_size:200 wall_ms:0
inline void write_metrics(std::ostream& out, const MetricsRecord& r) {
    out << "episode:" << r.episode << " steps:" << r.steps << " episode_reward:"
        << detail::real6(r.episode_reward) << " epsilon:" << detail::real6(r.epsilon) << " mean_loss:"
        << detail::real6(r.mean_loss) << " buffer_size:" << r.buffer_size << " wall_ms:" << r.wall_ms
        << "\n";
    if (!out) throw IoError("write_metrics: stream write failed");
}

inline MetricsRecord parse_metrics_line(const std::string& line) {
    MetricsRecord r;
    int fields = 0;
    std::size_t pos = 0;
    while (pos < line.size()) {
        const auto colon = line.find(':', pos);
        if (colon == std::string::npos) break;
        const std::string key = line.substr(pos, colon - pos);
        auto space = line.find(' ', colon + 1);
        if (space == std::string::npos) space = line.size();
        const std::string value = line.substr(colon + 1, space - colon - 1);
        try {
            if (key == "episode") r.episode = std::stoi(value);
            else if (key == "steps") r.steps = std::stoi(value);
            else if (key == "episode_reward") r.episode_reward = std::stod(value);
            else if (key == "epsilon") r.epsilon = std::stod(value);
            else if (key == "mean_loss") r.mean_loss = std::stod(value);
            else if (key == "buffer_size") r.buffer_size = std::stoul(value);
            else if (key == "wall_ms") r.wall_ms = std::stoll(value);
            else throw ConfigError("metrics line: unknown key '" + key + "'");
        } catch (const std::logic_error&) {
            throw ConfigError("metrics line: bad value for '" + key + "'");
        }
        ++fields;
        pos = space + 1;
    }
    if (fields != 7) throw ConfigError("metrics line: expected 7 fields, found " + std::to_string(fields));
    return r;
}

inline std::vector<MetricsRecord> read_metrics(std::istream& in) {
    std::vector<MetricsRecord> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        out.push_back(parse_metrics_line(line));
    }
    return out;
}

}  // namespace fdqn

#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "paveinput/error.hpp"

namespace paveinput {

inline constexpr std::string_view kToolName = "pave";
inline constexpr std::string_view kToolVersion = "0.1.0";

/// Shortest decimal text that parses back to the identical double.
inline std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw DataError("cannot format floating-point value");
    return std::string(buf, ptr);
}

/// Fixed-point text, for human-facing summaries.
inline std::string format_fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

inline bool parse_double(std::string_view text, double& out) {
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc{} && ptr == text.data() + text.size();
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Writes via a sibling temporary and renames into place, so a failed run
/// never leaves a partial file at `path`.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write file: " + tmp.string());
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw DataError("write failed: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw DataError("cannot move output into place: " + path.string());
    }
}

/// Reproducibility header: tool version, subcommand and effective parameters,
/// one line each, prefixed with `marker`.
struct Provenance {
    std::string subcommand;
    std::vector<std::pair<std::string, std::string>> params;

    std::string render(std::string_view marker) const {
        std::string out;
        out += std::string(marker) + " " + std::string(kToolName) + " " + std::string(kToolVersion) + "\n";
        out += std::string(marker) + " subcommand: " + subcommand + "\n";
        for (const auto& [k, v] : params) out += std::string(marker) + " " + k + ": " + v + "\n";
        return out;
    }
};

} // namespace paveinput

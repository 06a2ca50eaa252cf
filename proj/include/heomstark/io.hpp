#pragma once

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace heomstark::io {

namespace fs = std::filesystem;

// 64-bit FNV-1a; integrity check for the manifest, not a cryptographic digest.
inline std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

inline std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string file_hash(const fs::path& path) { return "fnv1a64:" + hex64(fnv1a(slurp(path))); }

// Fixed-format number so identical runs give byte-identical files.
inline std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.15e", v);
    return buf;
}

class CsvWriter {
public:
    CsvWriter(const fs::path& path, const std::vector<std::string>& header) : path_(path), out_(path) {
        if (!out_) throw std::runtime_error("cannot write " + path.string());
        row_strings(header);
    }

    void row(const std::vector<double>& values) {
        std::string line;
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) line += ',';
            line += num(values[i]);
        }
        out_ << line << '\n';
    }

    void row_strings(const std::vector<std::string>& cells) {
        std::string line;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) line += ',';
            line += cells[i];
        }
        out_ << line << '\n';
    }

    void close() {
        out_.close();
        if (!out_) throw std::runtime_error("error writing " + path_.string());
    }

    const fs::path& path() const { return path_; }

private:
    fs::path path_;
    std::ofstream out_;
};

// Files written by a command, hashed once everything is closed.
class Manifest {
public:
    explicit Manifest(fs::path root) : root_(std::move(root)) {}

    void add(const fs::path& path) { files_.push_back(path); }

    nlohmann::ordered_json to_json() const {
        auto arr = nlohmann::ordered_json::array();
        for (const auto& f : files_) {
            arr.push_back({{"path", fs::relative(f, root_).generic_string()},
                           {"bytes", fs::file_size(f)},
                           {"hash", file_hash(f)}});
        }
        return arr;
    }

private:
    fs::path root_;
    std::vector<fs::path> files_;
};

// Recomputes every manifest entry; returns the paths that are missing or differ.
inline std::vector<std::string> verify_manifest(const fs::path& root, const nlohmann::ordered_json& manifest) {
    std::vector<std::string> bad;
    for (const auto& e : manifest) {
        const fs::path p = root / e.at("path").get<std::string>();
        if (!fs::exists(p) || file_hash(p) != e.at("hash").get<std::string>()) bad.push_back(p.string());
    }
    return bad;
}

inline void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("error writing " + path.string());
}

}  // namespace heomstark::io

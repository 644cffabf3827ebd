#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>

#include "opcodec/errors.hpp"
#include "opcodec/matrix.hpp"

namespace opcodec::io {

/// Full-precision rendering: 17 significant digits round-trip any finite
/// double bit-identically through strtod.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string matrix_to_csv(const Mat& m) {
    std::string out;
    out.reserve(m.size() * 20);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j) out.push_back(',');
            out += format_double(m(i, j));
        }
        out.push_back('\n');
    }
    return out;
}

inline void write_file(const std::filesystem::path& path, std::string_view content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for writing: " + path.string());
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw IoError("write failed: " + path.string());
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for reading: " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

inline void write_matrix_csv(const std::filesystem::path& path, const Mat& m) {
    write_file(path, matrix_to_csv(m));
}

inline Mat matrix_from_csv(const std::string& text, const std::string& origin = "<string>") {
    std::vector<Vec> rows;
    std::size_t cols = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        std::string_view line(text.data() + pos, eol - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        pos = eol + 1;
        if (line.empty()) continue;
        Vec row;
        const char* p = line.data();
        const char* end = line.data() + line.size();
        while (p < end) {
            char* after = nullptr;
            const double v = std::strtod(p, &after);
            if (after == p)
                throw IoError("bad number in CSV " + origin);
            row.push_back(v);
            p = after;
            while (p < end && (*p == ' ' || *p == '\t')) ++p;
            if (p < end) {
                if (*p != ',') throw IoError("expected ',' in CSV " + origin);
                ++p;
            }
        }
        if (cols == 0) cols = row.size();
        if (row.size() != cols)
            throw IoError("ragged rows in CSV " + origin);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw IoError("empty CSV " + origin);
    Mat m(rows.size(), cols);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols; ++j) m(i, j) = rows[i][j];
    return m;
}

inline Mat read_matrix_csv(const std::filesystem::path& path) {
    return matrix_from_csv(read_file(path), path.string());
}

inline void write_vector_csv(const std::filesystem::path& path, const Vec& v) {
    Mat m(v.size(), 1, v);
    write_matrix_csv(path, m);
}

inline Vec read_vector_csv(const std::filesystem::path& path) {
    const Mat m = read_matrix_csv(path);
    if (m.cols() == 1) return m.entries();
    if (m.rows() == 1) return m.entries();
    throw IoError("expected a single-column CSV: " + path.string());
}

/// key=value configuration text. Lines starting with '#' are comments.
inline std::map<std::string, std::string> parse_kv(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::size_t b = line.find_first_not_of(" \t");
        if (b == std::string::npos || line[b] == '#') continue;
        const std::size_t eq = line.find('=', b);
        if (eq == std::string::npos)
            throw IoError("expected key=value, got: " + line);
        auto trim = [](std::string s) {
            const std::size_t lo = s.find_first_not_of(" \t");
            const std::size_t hi = s.find_last_not_of(" \t");
            return lo == std::string::npos ? std::string()
                                           : s.substr(lo, hi - lo + 1);
        };
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

inline std::map<std::string, std::string> read_kv_file(const std::filesystem::path& path) {
    return parse_kv(read_file(path));
}

inline void ensure_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

}  // namespace opcodec::io

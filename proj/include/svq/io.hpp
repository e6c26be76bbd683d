#ifndef SVQ_IO_HPP
#define SVQ_IO_HPP

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "svq/errors.hpp"

namespace svq {

// shortest decimal form that round-trips the double bit-exactly
inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    double back = 0.0;
    std::sscanf(buf, "%lf", &back);
    if (back == v) {
        // try trimming to fewer digits when they still round-trip
        for (int prec = 1; prec < 17; ++prec) {
            char shorter[40];
            std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
            std::sscanf(shorter, "%lf", &back);
            if (back == v) return shorter;
        }
    }
    return buf;
}

inline std::string fmt(int v) { return std::to_string(v); }

// minimal CSV writer: comma separator, '.' decimal, header row first
class CsvWriter {
public:
    explicit CsvWriter(const std::string& path) : out_(path) {
        if (!out_) throw IoError("cannot open for writing: " + path);
    }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

private:
    std::ofstream out_;
};

// binary 8-bit PGM (P5); values clamped to [0,1] then rounded half-up
inline void write_pgm(const std::string& path, int width, int height,
                      const std::vector<double>& pixels) {
    if (static_cast<int>(pixels.size()) != width * height)
        throw ConfigError("write_pgm: pixel count does not match dimensions");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "P5\n" << width << " " << height << "\n255\n";
    for (double v : pixels) {
        double c = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
        const int g = static_cast<int>(c * 255.0 + 0.5);
        out.put(static_cast<char>(g > 255 ? 255 : g));
    }
}

inline std::vector<double> read_pgm(const std::string& path, int& width, int& height) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    std::string magic;
    int maxval = 0;
    in >> magic >> width >> height >> maxval;
    if (magic != "P5" || maxval != 255) throw IoError("unsupported PGM: " + path);
    in.get();
    std::vector<double> pixels(static_cast<std::size_t>(width) * height);
    for (auto& v : pixels) {
        const int c = in.get();
        if (c < 0) throw IoError("truncated PGM: " + path);
        v = c / 255.0;
    }
    return pixels;
}

// FNV-1a 64-bit, used for output manifests
inline std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string hash_file_hex(const std::string& path) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(read_file(path))));
    return buf;
}

} // namespace svq

#endif

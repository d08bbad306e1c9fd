#pragma once

#include "hotv/types.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hotv::io {

/// Ordered key/value text metadata stored next to every raw file. The
/// on-disk form is one "key: value" line per field, written in insertion
/// order with nothing else, so identical contents give identical bytes.
struct header {
    std::vector<std::pair<std::string, std::string>> fields;

    void set(const std::string& key, std::string value) {
        for (auto& f : fields)
            if (f.first == key) {
                f.second = std::move(value);
                return;
            }
        fields.emplace_back(key, std::move(value));
    }

    const std::string* find(const std::string& key) const {
        for (const auto& f : fields)
            if (f.first == key) return &f.second;
        return nullptr;
    }

    const std::string& get(const std::string& key) const {
        if (const std::string* v = find(key)) return *v;
        throw std::runtime_error("header: missing field '" + key + "'");
    }

    double get_number(const std::string& key) const { return std::stod(get(key)); }
    long get_integer(const std::string& key) const { return std::stol(get(key)); }
};

/// Full-precision decimal form that round-trips a double exactly.
inline std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Compact decimal form used in CSV reports.
inline std::string csv_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline std::string format_list(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ',';
        out += format_value(values[i]);
    }
    return out;
}

inline std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t next = text.find(',', pos);
        if (next == std::string::npos) next = text.size();
        out.push_back(std::stod(text.substr(pos, next - pos)));
        pos = next + 1;
    }
    return out;
}

namespace detail {

inline std::ofstream open_out(const std::string& path, std::ios::openmode mode) {
    std::ofstream out(path, mode);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    return out;
}

inline std::vector<char> read_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read '" + path + "'");
    in.seekg(0, std::ios::end);
    std::vector<char> bytes(std::size_t(in.tellg()));
    in.seekg(0);
    in.read(bytes.data(), std::streamsize(bytes.size()));
    if (!in) throw std::runtime_error("short read on '" + path + "'");
    return bytes;
}

} // namespace detail

inline void write_header(const std::string& path, const header& h) {
    auto out = detail::open_out(path, std::ios::out);
    for (const auto& f : h.fields) out << f.first << ": " << f.second << '\n';
    if (!out.flush()) throw std::runtime_error("cannot write '" + path + "'");
}

inline header read_header(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read '" + path + "'");
    header h;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::size_t colon = line.find(':');
        if (colon == std::string::npos)
            throw std::runtime_error("malformed header line in '" + path + "'");
        std::string value = line.substr(colon + 1);
        if (!value.empty() && value.front() == ' ') value.erase(0, 1);
        h.fields.emplace_back(line.substr(0, colon), std::move(value));
    }
    return h;
}

namespace detail {

inline void write_raw_f32(const std::string& path, const std::vector<double>& values) {
    std::vector<float> narrow(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) narrow[i] = float(values[i]);
    auto out = open_out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(narrow.data()),
              std::streamsize(narrow.size() * sizeof(float)));
    if (!out.flush()) throw std::runtime_error("cannot write '" + path + "'");
}

inline std::vector<double> read_raw_f32(const std::string& path, std::size_t count) {
    const std::vector<char> bytes = read_bytes(path);
    if (bytes.size() != count * sizeof(float))
        throw std::runtime_error("'" + path + "' does not match its declared size");
    std::vector<float> narrow(count);
    std::memcpy(narrow.data(), bytes.data(), bytes.size());
    return std::vector<double>(narrow.begin(), narrow.end());
}

} // namespace detail

/// Writes `<base>.raw` (32-bit little-endian floats, row-major) and
/// `<base>.hdr` (text metadata, including any extra fields supplied).
inline void write_image(const std::string& base, const image<double>& img, header extra = {}) {
    header h;
    h.set("kind", "image");
    h.set("dtype", "float32");
    h.set("n", std::to_string(img.n));
    for (auto& f : extra.fields) h.set(f.first, std::move(f.second));
    detail::write_raw_f32(base + ".raw", img.data);
    write_header(base + ".hdr", h);
}

struct image_file {
    image<double> data;
    header meta;
};

inline image_file read_image(const std::string& base) {
    header h = read_header(base + ".hdr");
    const int n = int(h.get_integer("n"));
    image_file f{image<double>(n, detail::read_raw_f32(base + ".raw", std::size_t(n) * n)),
                 std::move(h)};
    return f;
}

/// Label masks use one byte per pixel.
inline void write_labels(const std::string& base, const image<std::uint8_t>& labels,
                         header extra = {}) {
    header h;
    h.set("kind", "labels");
    h.set("dtype", "uint8");
    h.set("n", std::to_string(labels.n));
    for (auto& f : extra.fields) h.set(f.first, std::move(f.second));
    auto out = detail::open_out(base + ".raw", std::ios::binary);
    out.write(reinterpret_cast<const char*>(labels.data.data()),
              std::streamsize(labels.data.size()));
    if (!out.flush()) throw std::runtime_error("cannot write '" + base + ".raw'");
    write_header(base + ".hdr", h);
}

inline image<std::uint8_t> read_labels(const std::string& base) {
    header h = read_header(base + ".hdr");
    const int n = int(h.get_integer("n"));
    const std::vector<char> bytes = detail::read_bytes(base + ".raw");
    if (bytes.size() != std::size_t(n) * n)
        throw std::runtime_error("'" + base + ".raw' does not match its declared size");
    image<std::uint8_t> labels(n);
    std::memcpy(labels.data.data(), bytes.data(), bytes.size());
    return labels;
}

/// Sinograms store the angle list in the header so downstream commands
/// can rebuild the scan geometry from the file alone.
inline void write_sinogram(const std::string& base, const sinogram<double>& s,
                           const std::vector<double>& angles_deg, header extra = {}) {
    header h;
    h.set("kind", "sinogram");
    h.set("dtype", "float32");
    h.set("detector_count", std::to_string(s.detector_count));
    h.set("angle_count", std::to_string(s.angle_count));
    h.set("angles_deg", format_list(angles_deg));
    for (auto& f : extra.fields) h.set(f.first, std::move(f.second));
    detail::write_raw_f32(base + ".raw", s.data);
    write_header(base + ".hdr", h);
}

struct sinogram_file {
    sinogram<double> data;
    header meta;
};

inline sinogram_file read_sinogram(const std::string& base) {
    header h = read_header(base + ".hdr");
    const int detectors = int(h.get_integer("detector_count"));
    const int angles = int(h.get_integer("angle_count"));
    sinogram_file f{sinogram<double>(detectors, angles,
                                     detail::read_raw_f32(base + ".raw",
                                                          std::size_t(detectors) * angles)),
                    std::move(h)};
    return f;
}

namespace detail {

inline void png_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(std::uint8_t(v >> 24));
    out.push_back(std::uint8_t(v >> 16));
    out.push_back(std::uint8_t(v >> 8));
    out.push_back(std::uint8_t(v));
}

inline void png_chunk(std::vector<std::uint8_t>& out, const char type[4],
                      const std::vector<std::uint8_t>& payload) {
    png_u32(out, std::uint32_t(payload.size()));
    const std::size_t crc_from = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), payload.begin(), payload.end());
    const uLong crc = ::crc32(::crc32(0L, Z_NULL, 0), out.data() + crc_from,
                              uInt(out.size() - crc_from));
    png_u32(out, std::uint32_t(crc));
}

} // namespace detail

/// Writes an 8-bit greyscale PNG (zlib-compressed, no interlacing).
inline void write_png_gray(const std::string& path, int width, int height,
                           const std::vector<std::uint8_t>& pixels) {
    if (width < 1 || height < 1 || pixels.size() != std::size_t(width) * height)
        throw std::invalid_argument("write_png_gray: pixel buffer does not match dimensions");

    // Raw scanlines, each preceded by filter byte 0.
    std::vector<std::uint8_t> scanlines;
    scanlines.reserve(std::size_t(height) * (width + 1));
    for (int i = 0; i < height; ++i) {
        scanlines.push_back(0);
        scanlines.insert(scanlines.end(), pixels.begin() + std::size_t(i) * width,
                         pixels.begin() + std::size_t(i + 1) * width);
    }
    uLongf packed_size = ::compressBound(uLong(scanlines.size()));
    std::vector<std::uint8_t> packed(packed_size);
    if (::compress2(packed.data(), &packed_size, scanlines.data(), uLong(scanlines.size()), 9) !=
        Z_OK)
        throw std::runtime_error("write_png_gray: compression failed");
    packed.resize(packed_size);

    static const std::uint8_t signature[8] = {137, 80, 78, 71, 13, 10, 26, 10};
    std::vector<std::uint8_t> out(signature, signature + 8);
    std::vector<std::uint8_t> ihdr;
    detail::png_u32(ihdr, std::uint32_t(width));
    detail::png_u32(ihdr, std::uint32_t(height));
    ihdr.push_back(8); // bit depth
    ihdr.push_back(0); // greyscale
    ihdr.push_back(0); // deflate
    ihdr.push_back(0); // adaptive filtering
    ihdr.push_back(0); // no interlace
    detail::png_chunk(out, "IHDR", ihdr);
    detail::png_chunk(out, "IDAT", packed);
    detail::png_chunk(out, "IEND", {});

    auto file = detail::open_out(path, std::ios::binary);
    file.write(reinterpret_cast<const char*>(out.data()), std::streamsize(out.size()));
    if (!file.flush()) throw std::runtime_error("cannot write '" + path + "'");
}

namespace detail {

inline std::vector<std::uint8_t> window_bytes(const std::vector<double>& values) {
    double lo = values.empty() ? 0.0 : values[0];
    double hi = lo;
    for (double v : values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    std::vector<std::uint8_t> bytes(values.size(), 0);
    if (hi > lo)
        for (std::size_t i = 0; i < values.size(); ++i)
            bytes[i] = std::uint8_t(std::lround((values[i] - lo) / (hi - lo) * 255.0));
    return bytes;
}

} // namespace detail

/// Min-max windowed greyscale preview of an image.
inline void write_preview(const std::string& path, const image<double>& img) {
    write_png_gray(path, img.n, img.n, detail::window_bytes(img.data));
}

/// Preview of a sinogram: detectors left to right, angles top to bottom.
inline void write_preview(const std::string& path, const sinogram<double>& s) {
    write_png_gray(path, s.detector_count, s.angle_count, detail::window_bytes(s.data));
}

/// Writes rows of already-formatted cells as comma-separated lines.
inline void write_csv(const std::string& path, const std::vector<std::vector<std::string>>& rows) {
    auto out = detail::open_out(path, std::ios::out);
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << row[i];
        }
        out << '\n';
    }
    if (!out.flush()) throw std::runtime_error("cannot write '" + path + "'");
}

} // namespace hotv::io

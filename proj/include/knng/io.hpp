// Vector file formats (fvecs / bvecs / csv), binary graph serialization and
// the digest binding graph files to the dataset they were built from.
#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "knng/core.hpp"

namespace knng {

enum class VectorFormat { fvecs, bvecs, csv };

inline VectorFormat vector_format_from_string(std::string_view s) {
    if (s == "fvecs") return VectorFormat::fvecs;
    if (s == "bvecs") return VectorFormat::bvecs;
    if (s == "csv") return VectorFormat::csv;
    throw std::invalid_argument("unknown vector format: " + std::string(s));
}

struct VectorFile {
    std::size_t n = 0;
    std::size_t d = 0;
    std::vector<double> data;  // row-major
};

namespace detail {

inline void put_u32(std::ostream& out, std::uint32_t v) {
    std::array<unsigned char, 4> b{static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                                   static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b.data()), 4);
}

inline void put_u64(std::ostream& out, std::uint64_t v) {
    put_u32(out, static_cast<std::uint32_t>(v));
    put_u32(out, static_cast<std::uint32_t>(v >> 32));
}

inline void put_f32(std::ostream& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }
inline void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

// Reader tracking the byte offset so truncation errors can name it.
class ByteReader {
public:
    ByteReader(std::istream& in, std::string path) : in_(in), path_(std::move(path)) {}

    bool exhausted() { return in_.peek() == std::istream::traits_type::eof(); }
    std::uint64_t offset() const { return offset_; }

    void read(void* dst, std::size_t len, const char* what) {
        in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(len));
        if (static_cast<std::size_t>(in_.gcount()) != len)
            throw std::runtime_error(path_ + ": truncated file reading " + what + " at byte offset " +
                                     std::to_string(offset_ + static_cast<std::uint64_t>(in_.gcount())));
        offset_ += len;
    }

    std::uint32_t u32(const char* what) {
        std::array<unsigned char, 4> b;
        read(b.data(), 4, what);
        return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
               (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
    }

    std::uint64_t u64(const char* what) {
        const std::uint64_t lo = u32(what);
        return lo | (static_cast<std::uint64_t>(u32(what)) << 32);
    }

    float f32(const char* what) { return std::bit_cast<float>(u32(what)); }
    double f64(const char* what) { return std::bit_cast<double>(u64(what)); }

private:
    std::istream& in_;
    std::string path_;
    std::uint64_t offset_ = 0;
};

inline std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return in;
}

inline std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    return out;
}

}  // namespace detail

// --- vector files -----------------------------------------------------------

inline VectorFile load_fvecs(const std::string& path) {
    auto in = detail::open_input(path);
    detail::ByteReader reader(in, path);
    VectorFile file;
    while (!reader.exhausted()) {
        const std::uint32_t d = reader.u32("record dimension");
        if (d == 0 || d > (1u << 28))
            throw std::runtime_error(path + ": record " + std::to_string(file.n) +
                                     " has implausible dimension " + std::to_string(d));
        if (file.n == 0) file.d = d;
        if (d != file.d)
            throw std::runtime_error(path + ": record " + std::to_string(file.n) + " has dimension " +
                                     std::to_string(d) + ", expected " + std::to_string(file.d));
        for (std::uint32_t t = 0; t < d; ++t)
            file.data.push_back(static_cast<double>(reader.f32("vector component")));
        ++file.n;
    }
    return file;
}

inline VectorFile load_bvecs(const std::string& path) {
    auto in = detail::open_input(path);
    detail::ByteReader reader(in, path);
    VectorFile file;
    std::vector<unsigned char> buf;
    while (!reader.exhausted()) {
        const std::uint32_t d = reader.u32("record dimension");
        if (d == 0 || d > (1u << 28))
            throw std::runtime_error(path + ": record " + std::to_string(file.n) +
                                     " has implausible dimension " + std::to_string(d));
        if (file.n == 0) file.d = d;
        if (d != file.d)
            throw std::runtime_error(path + ": record " + std::to_string(file.n) + " has dimension " +
                                     std::to_string(d) + ", expected " + std::to_string(file.d));
        buf.resize(d);
        reader.read(buf.data(), d, "vector bytes");
        for (const auto b : buf) file.data.push_back(static_cast<double>(b));
        ++file.n;
    }
    return file;
}

inline VectorFile load_csv(const std::string& path) {
    auto in = detail::open_input(path);
    VectorFile file;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream fields(line);
        std::string field;
        while (std::getline(fields, field, ',')) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(field, &used));
            } catch (const std::exception&) {
                throw std::runtime_error(path + ": record " + std::to_string(file.n) + " (line " +
                                         std::to_string(line_no) + ") has a non-numeric field '" + field + "'");
            }
        }
        if (file.n == 0) file.d = row.size();
        if (row.size() != file.d)
            throw std::runtime_error(path + ": record " + std::to_string(file.n) + " has " +
                                     std::to_string(row.size()) + " columns, expected " +
                                     std::to_string(file.d));
        file.data.insert(file.data.end(), row.begin(), row.end());
        ++file.n;
    }
    return file;
}

inline Dataset load_vectors(const std::string& path, VectorFormat format, Metric metric) {
    VectorFile file;
    switch (format) {
        case VectorFormat::fvecs: file = load_fvecs(path); break;
        case VectorFormat::bvecs: file = load_bvecs(path); break;
        case VectorFormat::csv: file = load_csv(path); break;
    }
    return Dataset(file.n, file.d, std::move(file.data), metric);
}

inline void save_fvecs(const std::string& path, std::size_t n, std::size_t d,
                       std::span<const double> data) {
    auto out = detail::open_output(path);
    for (std::size_t i = 0; i < n; ++i) {
        detail::put_u32(out, static_cast<std::uint32_t>(d));
        for (std::size_t t = 0; t < d; ++t) detail::put_f32(out, static_cast<float>(data[i * d + t]));
    }
    if (!out) throw std::runtime_error("failed writing " + path);
}

inline void save_bvecs(const std::string& path, std::size_t n, std::size_t d,
                       std::span<const double> data) {
    auto out = detail::open_output(path);
    for (std::size_t i = 0; i < n; ++i) {
        detail::put_u32(out, static_cast<std::uint32_t>(d));
        for (std::size_t t = 0; t < d; ++t) {
            const double v = data[i * d + t];
            if (v < 0.0 || v > 255.0 || v != std::floor(v))
                throw std::invalid_argument("bvecs requires integer components in [0, 255], got " +
                                            std::to_string(v));
            out.put(static_cast<char>(static_cast<unsigned char>(v)));
        }
    }
    if (!out) throw std::runtime_error("failed writing " + path);
}

inline void save_csv(const std::string& path, std::size_t n, std::size_t d, std::span<const double> data) {
    auto out = detail::open_output(path);
    out.precision(17);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t t = 0; t < d; ++t) {
            if (t) out << ',';
            out << data[i * d + t];
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("failed writing " + path);
}

// --- graph files -------------------------------------------------------------

inline constexpr std::array<char, 8> kGraphMagic{'k', 'n', 'n', 'g', 'r', 'p', 'h', '1'};
inline constexpr std::uint32_t kGraphFormatVersion = 1;

struct LoadedGraph {
    KnnGraph graph;
    Metric metric;
    std::uint64_t dataset_digest;
};

/// Header {magic, version, n, k, metric, digest} followed by one record per
/// point: entry count (u32) then (id u32, dist f64) entries, all little-endian.
inline void save_graph(const KnnGraph& graph, const Dataset& dataset, const std::string& path) {
    auto out = detail::open_output(path);
    out.write(kGraphMagic.data(), kGraphMagic.size());
    detail::put_u32(out, kGraphFormatVersion);
    detail::put_u32(out, static_cast<std::uint32_t>(graph.size()));
    detail::put_u32(out, graph.k());
    detail::put_u32(out, dataset.metric() == Metric::euclidean ? 0u : 1u);
    detail::put_u64(out, dataset.digest());
    for (std::size_t i = 0; i < graph.size(); ++i) {
        const auto& entries = graph.list(i).entries();
        detail::put_u32(out, static_cast<std::uint32_t>(entries.size()));
        for (const auto& e : entries) {
            detail::put_u32(out, e.id);
            detail::put_f64(out, e.dist);
        }
    }
    if (!out) throw std::runtime_error("failed writing " + path);
}

inline LoadedGraph load_graph(const std::string& path) {
    auto in = detail::open_input(path);
    detail::ByteReader reader(in, path);

    std::array<char, 8> magic;
    reader.read(magic.data(), magic.size(), "magic");
    if (magic != kGraphMagic) throw std::runtime_error(path + ": not a knng graph file (bad magic)");
    const std::uint32_t version = reader.u32("version");
    if (version != kGraphFormatVersion)
        throw std::runtime_error(path + ": unsupported graph format version " + std::to_string(version));
    const std::uint32_t n = reader.u32("point count");
    const std::uint32_t k = reader.u32("neighbor budget");
    const std::uint32_t metric_tag = reader.u32("metric tag");
    if (n < 1 || k < 1) throw std::runtime_error(path + ": malformed header (n or k is zero)");
    if (metric_tag > 1) throw std::runtime_error(path + ": unknown metric tag " + std::to_string(metric_tag));
    const std::uint64_t digest = reader.u64("dataset digest");

    KnnGraph graph(n, k);
    for (std::uint32_t i = 0; i < n; ++i) {
        const std::uint32_t count = reader.u32("entry count");
        if (count > k)
            throw std::runtime_error(path + ": point " + std::to_string(i) + " claims " +
                                     std::to_string(count) + " entries, budget " + std::to_string(k));
        std::vector<Neighbor> entries;
        entries.reserve(count);
        for (std::uint32_t e = 0; e < count; ++e) {
            const std::uint32_t id = reader.u32("neighbor id");
            const double dist = reader.f64("neighbor distance");
            if (id >= n)
                throw std::runtime_error(path + ": point " + std::to_string(i) +
                                         " references out-of-range id " + std::to_string(id));
            entries.push_back({id, dist});
        }
        graph.list(i).adopt_entries(std::move(entries));
    }
    if (!reader.exhausted()) throw std::runtime_error(path + ": trailing bytes after graph body");
    return {std::move(graph), metric_tag == 0 ? Metric::euclidean : Metric::cosine, digest};
}

/// Load a graph and refuse it unless it was built from this dataset.
inline KnnGraph load_graph(const std::string& path, const Dataset& dataset) {
    LoadedGraph loaded = load_graph(path);
    if (loaded.dataset_digest != dataset.digest())
        throw std::runtime_error(path + ": dataset digest mismatch (graph was built from different data)");
    if (loaded.graph.size() != dataset.size() || loaded.metric != dataset.metric())
        throw std::runtime_error(path + ": graph shape does not match the dataset");
    return std::move(loaded.graph);
}

}  // namespace knng

#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "cnsf/operators.hpp"

namespace cnsf {

/// Binary field snapshot ("CNSF"): magic, u32 version, u8 dim, u8 component
/// count, u32 cells per axis, f64 spacing per axis, then values as
/// little-endian f64, component-major then row-major (x fastest). Version 1
/// stores every component resampled onto the node lattice, so value counts
/// follow from the header alone.
inline constexpr uint32_t cnsf_format_version = 1;

namespace detail {

inline void put_u32(std::ostream& os, uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = (v >> (8 * i)) & 0xff;
    os.write(reinterpret_cast<const char*>(b), 4);
}

inline uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= uint32_t(b[i]) << (8 * i);
    return v;
}

inline void put_f64(std::ostream& os, double x) {
    const uint64_t u = std::bit_cast<uint64_t>(x);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = (u >> (8 * i)) & 0xff;
    os.write(reinterpret_cast<const char*>(b), 8);
}

inline double get_f64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    uint64_t u = 0;
    for (int i = 0; i < 8; ++i) u |= uint64_t(b[i]) << (8 * i);
    return std::bit_cast<double>(u);
}

} // namespace detail

struct SnapshotData {
    int dim = 0;
    int components = 0;
    std::array<int, 3> cells{1, 1, 1};
    std::array<double, 3> spacing{0, 0, 0};
    std::vector<std::vector<double>> values; // one node-lattice array per component
};

inline void write_cnsf(const std::string& path, const Field& f) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ContractError("cannot open for writing: " + path);
    const Grid& g = f.grid();
    os.write("CNSF", 4);
    detail::put_u32(os, cnsf_format_version);
    const unsigned char dim = static_cast<unsigned char>(g.dim());
    const unsigned char nc = static_cast<unsigned char>(f.components());
    os.put(char(dim));
    os.put(char(nc));
    for (int a = 0; a < g.dim(); ++a) detail::put_u32(os, uint32_t(g.cells(a)));
    for (int a = 0; a < g.dim(); ++a) detail::put_f64(os, g.spacing(a));
    for (int c = 0; c < f.components(); ++c) {
        Component node = detail::interp_to(g, f.comp(c), Staggering::node());
        for (double v : node.v) detail::put_f64(os, v);
    }
    if (!os) throw ContractError("write failed: " + path);
}

inline SnapshotData read_cnsf(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ContractError("cannot open: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "CNSF", 4) != 0)
        throw ContractError("not a CNSF snapshot (bad magic): " + path);
    const uint32_t version = detail::get_u32(is);
    if (version != cnsf_format_version)
        throw ContractError("unsupported CNSF version " + std::to_string(version) + ": " + path);
    SnapshotData s;
    s.dim = is.get();
    s.components = is.get();
    if (s.dim != 2 && s.dim != 3) throw ContractError("corrupt CNSF header (dim): " + path);
    std::size_t count = 1;
    for (int a = 0; a < s.dim; ++a) {
        s.cells[a] = int(detail::get_u32(is));
        count *= std::size_t(s.cells[a]) + 1;
    }
    for (int a = 0; a < s.dim; ++a) s.spacing[a] = detail::get_f64(is);
    s.values.resize(s.components);
    for (auto& comp : s.values) {
        comp.resize(count);
        for (double& v : comp) v = detail::get_f64(is);
    }
    if (!is) throw ContractError("truncated CNSF snapshot: " + path);
    return s;
}

/// Read a snapshot back as a node-staggered field on a matching grid.
inline Field read_cnsf_field(const std::string& path, const Grid& g) {
    SnapshotData s = read_cnsf(path);
    if (s.dim != g.dim()) throw ContractError("CNSF snapshot dimension mismatch: " + path);
    for (int a = 0; a < g.dim(); ++a)
        if (s.cells[a] != g.cells(a)) throw ContractError("CNSF snapshot size mismatch: " + path);
    Field f = s.components == 1 ? Field::scalar(g, Staggering::node()) : Field::node_vector(g);
    if (f.components() != s.components)
        throw ContractError("CNSF snapshot component count mismatch: " + path);
    for (int c = 0; c < s.components; ++c) f.comp(c).v = s.values[c];
    return f;
}

} // namespace cnsf

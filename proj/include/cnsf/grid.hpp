#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cnsf/errors.hpp"

namespace cnsf {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    double operator[](int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }
};

/// Closed axis-aligned box. In 2D the z-range is ignored.
struct Box {
    Vec3 lo, hi;

    bool contains(const Vec3& p, int dim, double eps = 1e-12) const {
        for (int a = 0; a < dim; ++a) {
            if (p[a] < lo[a] - eps || p[a] > hi[a] + eps) return false;
        }
        return true;
    }
};

/// Lattice placement of one field component: per-axis flag, 0 = samples on
/// integer multiples of h (n+1 points), 1 = samples offset by h/2 (n points).
struct Staggering {
    std::array<uint8_t, 3> half{0, 0, 0};

    static Staggering node() { return {}; }

    static Staggering center(int dim) {
        Staggering s;
        for (int a = 0; a < dim; ++a) s.half[a] = 1;
        return s;
    }

    /// MAC face lattice for velocity component `axis`: integer along `axis`,
    /// half-offset along the other axes.
    static Staggering face(int axis, int dim) {
        Staggering s = center(dim);
        s.half[axis] = 0;
        return s;
    }

    /// 3D edge lattice (vector potentials): half-offset along `axis` only.
    static Staggering edge(int axis, int dim) {
        Staggering s;
        (void)dim;
        s.half[axis] = 1;
        return s;
    }

    Staggering flipped(int axis) const {
        Staggering s = *this;
        s.half[axis] ^= 1;
        return s;
    }

    bool operator==(const Staggering&) const = default;
};

struct DomainSpec {
    int dim = 2;
    std::array<double, 3> extent{1.0, 1.0, 1.0};
    std::array<int, 3> cells{64, 64, 1};
    double horizon = 2.0; // T
    int time_steps = 200; // N_t
};

namespace mask {
inline constexpr uint8_t interior = 0;
inline constexpr uint8_t boundary = 1;
inline constexpr uint8_t exterior = 2; // unused for box domains, kept in the format
} // namespace mask

/// Structured grid over a rectangle/box with a uniform time axis.
/// Cheap to copy; all state is shared and immutable after construction.
class Grid {
public:
    Grid() = default;

    int dim() const { return d_->dim; }
    double extent(int a) const { return d_->extent[a]; }
    int cells(int a) const { return d_->cells[a]; }
    double spacing(int a) const { return d_->h[a]; }
    double max_spacing() const {
        double m = 0;
        for (int a = 0; a < dim(); ++a) m = std::max(m, d_->h[a]);
        return m;
    }
    double min_spacing() const {
        double m = d_->h[0];
        for (int a = 1; a < dim(); ++a) m = std::min(m, d_->h[a]);
        return m;
    }

    double horizon() const { return d_->horizon; }
    int time_steps() const { return d_->time_steps; }
    double dt() const { return d_->dt; }
    int t0_index() const { return d_->time_steps / 2; }
    double t0() const { return d_->horizon / 2.0; }
    double time(int k) const { return k * d_->dt; }

    std::array<int, 3> lattice_sizes(const Staggering& s) const {
        std::array<int, 3> n{1, 1, 1};
        for (int a = 0; a < d_->dim; ++a) n[a] = s.half[a] ? d_->cells[a] : d_->cells[a] + 1;
        return n;
    }

    std::size_t lattice_count(const Staggering& s) const {
        auto n = lattice_sizes(s);
        return std::size_t(n[0]) * n[1] * n[2];
    }

    Vec3 point(const Staggering& s, int i, int j, int k) const {
        Vec3 p;
        const int idx[3] = {i, j, k};
        double* c[3] = {&p.x, &p.y, &p.z};
        for (int a = 0; a < d_->dim; ++a)
            *c[a] = (idx[a] + (s.half[a] ? 0.5 : 0.0)) * d_->h[a];
        return p;
    }

    const std::vector<uint8_t>& domain_mask() const { return d_->domain_mask; }
    const std::vector<uint8_t>& omega_mask() const { return d_->omega_mask; }
    const std::vector<uint8_t>& omega0_mask() const { return d_->omega0_mask; }
    const std::optional<Box>& omega_box() const { return d_->omega; }
    const std::optional<Box>& omega0_box() const { return d_->omega0; }
    const std::vector<std::string>& notes() const { return d_->notes; }

    bool same_layout(const Grid& o) const {
        return d_->dim == o.d_->dim && d_->cells == o.d_->cells && d_->extent == o.d_->extent &&
               d_->time_steps == o.d_->time_steps && d_->horizon == o.d_->horizon;
    }

    friend Grid build_grid(const DomainSpec&);
    friend Grid build_subdomains(const Grid&, const Box&, const Box&);

private:
    struct Data {
        int dim = 2;
        std::array<double, 3> extent{1, 1, 1};
        std::array<int, 3> cells{1, 1, 1};
        std::array<double, 3> h{0, 0, 0};
        double horizon = 0, dt = 0;
        int time_steps = 0;
        std::optional<Box> omega, omega0;
        std::vector<uint8_t> domain_mask, omega_mask, omega0_mask;
        std::vector<std::string> notes;
    };
    std::shared_ptr<const Data> d_;

    explicit Grid(std::shared_ptr<const Data> d) : d_(std::move(d)) {}

    static std::vector<uint8_t> box_node_mask(const Data& d, const Box& b) {
        std::array<int, 3> n{1, 1, 1};
        for (int a = 0; a < d.dim; ++a) n[a] = d.cells[a] + 1;
        std::vector<uint8_t> m(std::size_t(n[0]) * n[1] * n[2], 0);
        const double eps = 1e-12;
        for (int k = 0; k < n[2]; ++k)
            for (int j = 0; j < n[1]; ++j)
                for (int i = 0; i < n[0]; ++i) {
                    Vec3 p{i * d.h[0], j * d.h[1], k * d.h[2]};
                    if (b.contains(p, d.dim, eps))
                        m[(std::size_t(k) * n[1] + j) * n[0] + i] = 1;
                }
        return m;
    }
};

inline Grid build_grid(const DomainSpec& spec) {
    if (spec.dim != 2 && spec.dim != 3)
        throw ContractError("grid dimension must be 2 or 3");
    for (int a = 0; a < spec.dim; ++a) {
        if (spec.extent[a] <= 0.0)
            throw ContractError("domain extent must be positive on every axis");
        if (spec.cells[a] < 8)
            throw ContractError("resolution must be at least 8 cells per axis");
    }
    if (spec.horizon <= 0.0) throw ContractError("time horizon must be positive");
    if (spec.time_steps < 8 || spec.time_steps % 2 != 0)
        throw ContractError("time axis must place t0=T/2 on a node (N_t even, >= 8)");

    auto d = std::make_shared<Grid::Data>();
    d->dim = spec.dim;
    d->extent = spec.extent;
    d->cells = spec.cells;
    for (int a = 0; a < spec.dim; ++a) d->h[a] = spec.extent[a] / spec.cells[a];
    for (int a = spec.dim; a < 3; ++a) { d->cells[a] = 1; d->extent[a] = 0.0; d->h[a] = 0.0; }
    d->horizon = spec.horizon;
    d->time_steps = spec.time_steps;
    d->dt = spec.horizon / spec.time_steps;

    std::array<int, 3> n{1, 1, 1};
    for (int a = 0; a < d->dim; ++a) n[a] = d->cells[a] + 1;
    d->domain_mask.assign(std::size_t(n[0]) * n[1] * n[2], mask::interior);
    for (int k = 0; k < n[2]; ++k)
        for (int j = 0; j < n[1]; ++j)
            for (int i = 0; i < n[0]; ++i) {
                bool bnd = (i == 0 || i == n[0] - 1 || j == 0 || j == n[1] - 1);
                if (d->dim == 3) bnd = bnd || (k == 0 || k == n[2] - 1);
                if (bnd)
                    d->domain_mask[(std::size_t(k) * n[1] + j) * n[0] + i] = mask::boundary;
            }
    return Grid(std::move(d));
}

/// Fill omega/omega0 masks. omega0 must sit strictly inside omega with at
/// least one cell of margin; omega may touch the domain boundary (noted).
inline Grid build_subdomains(const Grid& g, const Box& omega, const Box& omega0) {
    auto d = std::make_shared<Grid::Data>(*g.d_);

    const double tol = 1e-12;
    for (int a = 0; a < d->dim; ++a) {
        const double h = d->h[a];
        if (omega.lo[a] < -tol || omega.hi[a] > d->extent[a] + tol)
            throw ContractError("subdomain nesting violated: omega exceeds the domain on axis " +
                                std::to_string(a));
        if (omega0.lo[a] - omega.lo[a] < h - tol || omega.hi[a] - omega0.hi[a] < h - tol)
            throw ContractError(
                "subdomain nesting violated: omega0 not inside omega with one-cell margin on axis " +
                std::to_string(a));
        if (omega0.lo[a] < h - tol || omega0.hi[a] > d->extent[a] - h + tol)
            throw ContractError(
                "subdomain nesting violated: omega0 not strictly inside the domain on axis " +
                std::to_string(a));
    }
    for (int a = 0; a < d->dim; ++a) {
        if (omega.lo[a] < d->h[a] - tol || omega.hi[a] > d->extent[a] - d->h[a] + tol) {
            d->notes.push_back("omega touches the domain boundary");
            break;
        }
    }
    d->omega = omega;
    d->omega0 = omega0;
    d->omega_mask = Grid::box_node_mask(*d, omega);
    d->omega0_mask = Grid::box_node_mask(*d, omega0);
    return Grid(std::move(d));
}

} // namespace cnsf

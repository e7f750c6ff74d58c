#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "cnsf/grid.hpp"

namespace cnsf {

/// One staggered sample array. Row-major with x fastest.
struct Component {
    Staggering stag;
    std::array<int, 3> n{1, 1, 1};
    std::vector<double> v;

    std::size_t idx(int i, int j, int k) const {
        return (std::size_t(k) * n[1] + j) * n[0] + i;
    }
    double& at(int i, int j, int k = 0) { return v[idx(i, j, k)]; }
    double at(int i, int j, int k = 0) const { return v[idx(i, j, k)]; }
    std::size_t size() const { return v.size(); }
};

enum class Rank { Scalar, Vector };

/// Scalar or vector samples on one grid. Treated as immutable by every
/// module API; builders fill values before handing the field out.
class Field {
public:
    Field() = default;

    static Field scalar(const Grid& g, Staggering s) {
        Field f;
        f.grid_ = g;
        f.rank_ = Rank::Scalar;
        f.comps_.push_back(make_comp(g, s));
        return f;
    }

    static Field vector(const Grid& g, const std::array<Staggering, 3>& s) {
        Field f;
        f.grid_ = g;
        f.rank_ = Rank::Vector;
        for (int c = 0; c < g.dim(); ++c) f.comps_.push_back(make_comp(g, s[c]));
        return f;
    }

    /// MAC velocity layout: component c on the faces perpendicular to axis c.
    static Field mac_vector(const Grid& g) {
        std::array<Staggering, 3> s;
        for (int c = 0; c < g.dim(); ++c) s[c] = Staggering::face(c, g.dim());
        return vector(g, s);
    }

    static Field node_vector(const Grid& g) {
        return vector(g, {Staggering::node(), Staggering::node(), Staggering::node()});
    }

    static Field edge_vector(const Grid& g) {
        std::array<Staggering, 3> s;
        for (int c = 0; c < g.dim(); ++c) s[c] = Staggering::edge(c, g.dim());
        return vector(g, s);
    }

    static Field pressure(const Grid& g) { return scalar(g, Staggering::center(g.dim())); }

    template <class F>
    static Field sample_scalar(const Grid& g, Staggering s, F&& fn) {
        Field f = scalar(g, s);
        f.fill(0, fn);
        return f;
    }

    /// fns[c](p) gives component c at point p.
    template <class F>
    static Field sample_vector(const Grid& g, const std::array<Staggering, 3>& s,
                               const std::array<F, 3>& fns) {
        Field f = vector(g, s);
        for (int c = 0; c < g.dim(); ++c) f.fill(c, fns[c]);
        return f;
    }

    template <class F>
    static Field sample_mac(const Grid& g, const std::array<F, 3>& fns) {
        Field f = mac_vector(g);
        for (int c = 0; c < g.dim(); ++c) f.fill(c, fns[c]);
        return f;
    }

    template <class F>
    void fill(int c, F&& fn) {
        Component& cm = comps_[c];
        for (int k = 0; k < cm.n[2]; ++k)
            for (int j = 0; j < cm.n[1]; ++j)
                for (int i = 0; i < cm.n[0]; ++i)
                    cm.at(i, j, k) = fn(grid_.point(cm.stag, i, j, k));
    }

    const Grid& grid() const { return grid_; }
    Rank rank() const { return rank_; }
    int components() const { return int(comps_.size()); }
    Component& comp(int c) { return comps_[c]; }
    const Component& comp(int c) const { return comps_[c]; }

    bool same_layout(const Field& o) const {
        if (!grid_.same_layout(o.grid_) || comps_.size() != o.comps_.size()) return false;
        for (std::size_t c = 0; c < comps_.size(); ++c)
            if (!(comps_[c].stag == o.comps_[c].stag)) return false;
        return true;
    }

    double max_abs() const {
        double m = 0;
        for (const auto& c : comps_)
            for (double x : c.v) m = std::max(m, std::abs(x));
        return m;
    }

    /// Discrete l2 of the raw sample vector (not a quadrature).
    double sample_l2() const {
        double s = 0;
        for (const auto& c : comps_)
            for (double x : c.v) s += x * x;
        return std::sqrt(s);
    }

    void scale(double a) {
        for (auto& c : comps_)
            for (double& x : c.v) x *= a;
    }

    /// this += a * o (layouts must match)
    void axpy(double a, const Field& o) {
        if (!same_layout(o)) throw ContractError("field axpy: mismatched layouts");
        for (std::size_t c = 0; c < comps_.size(); ++c)
            for (std::size_t i = 0; i < comps_[c].v.size(); ++i)
                comps_[c].v[i] += a * o.comps_[c].v[i];
    }

    /// Zero on the lattice planes lying on the domain boundary (only axes
    /// where a component has offset-0 samples carry such planes).
    bool dirichlet_zero_boundary(double tol = 0.0) const {
        for (const auto& c : comps_) {
            for (int a = 0; a < grid_.dim(); ++a) {
                if (c.stag.half[a]) continue;
                for (int k = 0; k < c.n[2]; ++k)
                    for (int j = 0; j < c.n[1]; ++j)
                        for (int i = 0; i < c.n[0]; ++i) {
                            const int idx3[3] = {i, j, k};
                            if (idx3[a] != 0 && idx3[a] != c.n[a] - 1) continue;
                            if (std::abs(c.at(i, j, k)) > tol) return false;
                        }
            }
        }
        return true;
    }

    /// Max |value| over samples lying inside the box.
    double max_abs_in_box(const Box& b) const {
        double m = 0;
        for (const auto& c : comps_)
            for (int k = 0; k < c.n[2]; ++k)
                for (int j = 0; j < c.n[1]; ++j)
                    for (int i = 0; i < c.n[0]; ++i)
                        if (b.contains(grid_.point(c.stag, i, j, k), grid_.dim()))
                            m = std::max(m, std::abs(c.at(i, j, k)));
        return m;
    }

private:
    static Component make_comp(const Grid& g, Staggering s) {
        Component c;
        c.stag = s;
        c.n = g.lattice_sizes(s);
        c.v.assign(std::size_t(c.n[0]) * c.n[1] * c.n[2], 0.0);
        return c;
    }

    Grid grid_;
    Rank rank_ = Rank::Scalar;
    std::vector<Component> comps_;
};

/// Ordered snapshots with uniform step. Needs at least 3 snapshots so second
/// time-differences exist.
class TimeSeriesField {
public:
    TimeSeriesField() = default;

    TimeSeriesField(std::vector<Field> snaps, double dt, double t_start = 0.0)
        : snaps_(std::move(snaps)), dt_(dt), t_start_(t_start) {
        if (snaps_.size() < 3)
            throw ContractError("time series needs at least 3 snapshots");
        for (std::size_t k = 1; k < snaps_.size(); ++k)
            if (!snaps_[k].same_layout(snaps_[0]))
                throw ContractError("time series snapshots must share one grid and staggering");
    }

    /// Sample fns(p, t) on the grid's own time axis (N_t + 1 snapshots).
    template <class F>
    static TimeSeriesField sample_mac(const Grid& g, const std::array<F, 3>& fns) {
        std::vector<Field> snaps;
        snaps.reserve(g.time_steps() + 1);
        for (int k = 0; k <= g.time_steps(); ++k) {
            const double t = g.time(k);
            Field f = Field::mac_vector(g);
            for (int c = 0; c < g.dim(); ++c)
                f.fill(c, [&](const Vec3& p) { return fns[c](p, t); });
            snaps.push_back(std::move(f));
        }
        return TimeSeriesField(std::move(snaps), g.dt());
    }

    template <class F>
    static TimeSeriesField sample_scalar(const Grid& g, Staggering s, F&& fn) {
        std::vector<Field> snaps;
        snaps.reserve(g.time_steps() + 1);
        for (int k = 0; k <= g.time_steps(); ++k) {
            const double t = g.time(k);
            snaps.push_back(Field::sample_scalar(g, s, [&](const Vec3& p) { return fn(p, t); }));
        }
        return TimeSeriesField(std::move(snaps), g.dt());
    }

    int count() const { return int(snaps_.size()); }
    double dt() const { return dt_; }
    double t_start() const { return t_start_; }
    double time(int k) const { return t_start_ + k * dt_; }
    const Field& snap(int k) const { return snaps_[k]; }
    Field& snap(int k) { return snaps_[k]; }
    const Grid& grid() const { return snaps_[0].grid(); }

    double max_abs() const {
        double m = 0;
        for (const auto& f : snaps_) m = std::max(m, f.max_abs());
        return m;
    }

    void scale(double a) {
        for (auto& f : snaps_) f.scale(a);
    }

private:
    std::vector<Field> snaps_;
    double dt_ = 0;
    double t_start_ = 0;
};

} // namespace cnsf

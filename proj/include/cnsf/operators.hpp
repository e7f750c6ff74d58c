#pragma once

#include <array>
#include <cmath>

#include "cnsf/field.hpp"

namespace cnsf {
namespace detail {

inline void require(bool ok, const char* msg) {
    if (!ok) throw ContractError(msg);
}

/// First difference along `axis`, moving between the two staggered lattices.
/// half -> integer: exact two-point centered pairs on the interior, one-sided
/// second-order at the two boundary planes. integer -> half: always exact
/// two-point pairs.
inline Component diff(const Grid& g, const Component& c, int axis) {
    require(axis < g.dim(), "diff: axis out of range");
    const double h = g.spacing(axis);
    Component out;
    out.stag = c.stag.flipped(axis);
    out.n = g.lattice_sizes(out.stag);
    out.v.assign(std::size_t(out.n[0]) * out.n[1] * out.n[2], 0.0);

    const bool to_integer = c.stag.half[axis] != 0;
    auto src = [&](int i, int j, int k, int d) {
        int q[3] = {i, j, k};
        q[axis] += d;
        return c.at(q[0], q[1], q[2]);
    };
    const int m = c.n[axis];
    require(m >= (to_integer ? 3 : 2), "diff: lattice too small along axis");

    for (int k = 0; k < out.n[2]; ++k)
        for (int j = 0; j < out.n[1]; ++j)
            for (int i = 0; i < out.n[0]; ++i) {
                const int q[3] = {i, j, k};
                const int a = q[axis];
                double d;
                if (!to_integer) {
                    d = (src(i, j, k, 1) - src(i, j, k, 0)) / h;
                } else if (a == 0) {
                    d = (-2.0 * src(i, j, k, 0) + 3.0 * src(i, j, k, 1) - src(i, j, k, 2)) / h;
                } else if (a == m) {
                    int q2[3] = {i, j, k};
                    q2[axis] = m - 1;
                    d = (2.0 * c.at(q2[0], q2[1], q2[2]) -
                         3.0 * src(q2[0], q2[1], q2[2], -1) + src(q2[0], q2[1], q2[2], -2)) / h;
                } else {
                    int q2[3] = {i, j, k};
                    q2[axis] = a;
                    d = (c.at(q2[0], q2[1], q2[2]) - src(q2[0], q2[1], q2[2], -1)) / h;
                }
                out.at(i, j, k) = d;
            }
    return out;
}

/// Central difference on the same lattice (for collocated vector fields),
/// second-order one-sided at the first/last plane.
inline Component diff_collocated(const Grid& g, const Component& c, int axis) {
    require(axis < g.dim(), "diff: axis out of range");
    const double h = g.spacing(axis);
    Component out = c;
    const int m = c.n[axis];
    require(m >= 3, "diff: lattice too small along axis");
    auto src = [&](int i, int j, int k, int d) {
        int q[3] = {i, j, k};
        q[axis] += d;
        return c.at(q[0], q[1], q[2]);
    };
    for (int k = 0; k < out.n[2]; ++k)
        for (int j = 0; j < out.n[1]; ++j)
            for (int i = 0; i < out.n[0]; ++i) {
                const int q[3] = {i, j, k};
                const int a = q[axis];
                double d;
                if (a == 0)
                    d = (-3.0 * src(i, j, k, 0) + 4.0 * src(i, j, k, 1) - src(i, j, k, 2)) / (2 * h);
                else if (a == m - 1)
                    d = (3.0 * src(i, j, k, 0) - 4.0 * src(i, j, k, -1) + src(i, j, k, -2)) / (2 * h);
                else
                    d = (src(i, j, k, 1) - src(i, j, k, -1)) / (2 * h);
                out.at(i, j, k) = d;
            }
    return out;
}

inline bool collocated(const Field& f) {
    for (int c = 1; c < f.components(); ++c)
        if (!(f.comp(c).stag == f.comp(0).stag)) return false;
    return f.components() > 1;
}

/// Resample one component onto another lattice by per-axis averaging
/// (linear extrapolation at boundary planes when moving half -> integer).
inline Component interp_to(const Grid& g, Component c, const Staggering& dst) {
    for (int a = 0; a < g.dim(); ++a) {
        if (c.stag.half[a] == dst.half[a]) continue;
        Component out;
        out.stag = c.stag.flipped(a);
        out.n = g.lattice_sizes(out.stag);
        out.v.assign(std::size_t(out.n[0]) * out.n[1] * out.n[2], 0.0);
        const bool to_integer = c.stag.half[a] != 0;
        const int m = c.n[a];
        auto src = [&](int i, int j, int k, int d) {
            int q[3] = {i, j, k};
            q[a] += d;
            return c.at(q[0], q[1], q[2]);
        };
        for (int k = 0; k < out.n[2]; ++k)
            for (int j = 0; j < out.n[1]; ++j)
                for (int i = 0; i < out.n[0]; ++i) {
                    const int q[3] = {i, j, k};
                    const int x = q[a];
                    double val;
                    if (!to_integer) {
                        val = 0.5 * (src(i, j, k, 0) + src(i, j, k, 1));
                    } else if (x == 0) {
                        val = 1.5 * src(i, j, k, 0) - 0.5 * src(i, j, k, 1);
                    } else if (x == m) {
                        int q2[3] = {i, j, k};
                        q2[a] = m - 1;
                        val = 1.5 * c.at(q2[0], q2[1], q2[2]) - 0.5 * src(q2[0], q2[1], q2[2], -1);
                    } else {
                        int q2[3] = {i, j, k};
                        q2[a] = x;
                        val = 0.5 * (c.at(q2[0], q2[1], q2[2]) + src(q2[0], q2[1], q2[2], -1));
                    }
                    out.at(i, j, k) = val;
                }
        c = std::move(out);
    }
    return c;
}

} // namespace detail

/// grad u, one component per axis, each on the axis-flipped lattice.
inline Field gradient(const Field& u) {
    detail::require(u.rank() == Rank::Scalar, "gradient: scalar input expected");
    const Grid& g = u.grid();
    Field out;
    std::array<Staggering, 3> s;
    for (int a = 0; a < g.dim(); ++a) s[a] = u.comp(0).stag.flipped(a);
    out = Field::vector(g, s);
    for (int a = 0; a < g.dim(); ++a) out.comp(a) = detail::diff(g, u.comp(0), a);
    return out;
}

/// div v. Staggered components must difference onto one common lattice;
/// collocated components use same-lattice central stencils.
inline Field divergence(const Field& v) {
    detail::require(v.rank() == Rank::Vector, "divergence: vector input expected");
    const Grid& g = v.grid();
    if (detail::collocated(v)) {
        Field out = Field::scalar(g, v.comp(0).stag);
        for (int a = 0; a < g.dim(); ++a) {
            Component d = detail::diff_collocated(g, v.comp(a), a);
            for (std::size_t i = 0; i < d.v.size(); ++i) out.comp(0).v[i] += d.v[i];
        }
        return out;
    }
    Component acc = detail::diff(g, v.comp(0), 0);
    for (int a = 1; a < g.dim(); ++a) {
        Component d = detail::diff(g, v.comp(a), a);
        detail::require(d.stag == acc.stag, "divergence: staggering mismatch across components");
        for (std::size_t i = 0; i < d.v.size(); ++i) acc.v[i] += d.v[i];
    }
    Field out = Field::scalar(g, acc.stag);
    out.comp(0) = std::move(acc);
    return out;
}

/// Componentwise div(grad(.)): the exact composition of the two first
/// differences, which returns to the input lattice.
inline Field laplacian(const Field& f) {
    const Grid& g = f.grid();
    Field out = f;
    for (int c = 0; c < f.components(); ++c) {
        Component acc;
        bool first = true;
        for (int a = 0; a < g.dim(); ++a) {
            Component d = detail::diff(g, detail::diff(g, f.comp(c), a), a);
            if (first) {
                acc = std::move(d);
                first = false;
            } else {
                for (std::size_t i = 0; i < acc.v.size(); ++i) acc.v[i] += d.v[i];
            }
        }
        out.comp(c) = std::move(acc);
    }
    return out;
}

/// rot v: in 2D the scalar d1 v2 - d2 v1, in 3D the usual curl.
inline Field rot(const Field& v) {
    detail::require(v.rank() == Rank::Vector, "rot: vector input expected");
    const Grid& g = v.grid();
    const bool colloc = detail::collocated(v);
    auto d = [&](const Component& c, int axis) {
        return colloc ? detail::diff_collocated(g, c, axis) : detail::diff(g, c, axis);
    };
    if (g.dim() == 2) {
        Component dx_v1 = d(v.comp(1), 0);
        Component dy_v0 = d(v.comp(0), 1);
        detail::require(dx_v1.stag == dy_v0.stag, "rot: staggering mismatch across components");
        Field out = Field::scalar(g, dx_v1.stag);
        out.comp(0) = std::move(dx_v1);
        for (std::size_t i = 0; i < out.comp(0).v.size(); ++i) out.comp(0).v[i] -= dy_v0.v[i];
        return out;
    }
    Field out;
    std::vector<Component> comps;
    std::array<Staggering, 3> stags;
    for (int a = 0; a < 3; ++a) {
        const int b = (a + 1) % 3, c = (a + 2) % 3;
        Component p = d(v.comp(c), b); // d_b v_c
        Component q = d(v.comp(b), c); // d_c v_b
        detail::require(p.stag == q.stag, "rot: staggering mismatch across components");
        for (std::size_t i = 0; i < p.v.size(); ++i) p.v[i] -= q.v[i];
        stags[a] = p.stag;
        comps.push_back(std::move(p));
    }
    out = Field::vector(g, stags);
    for (int a = 0; a < 3; ++a) out.comp(a) = std::move(comps[a]);
    return out;
}

/// Divergence-free construction: in 2D the rotated gradient (d2 q, -d1 q) of
/// a scalar potential, in 3D the curl of an edge vector potential. With node
/// (2D) or edge (3D) potentials the discrete divergence vanishes identically.
inline Field curl_potential(const Field& q) {
    const Grid& g = q.grid();
    if (g.dim() == 2) {
        detail::require(q.rank() == Rank::Scalar, "curl_potential: scalar potential expected in 2D");
        Component u = detail::diff(g, q.comp(0), 1);
        Component w = detail::diff(g, q.comp(0), 0);
        for (double& x : w.v) x = -x;
        Field out = Field::vector(g, {u.stag, w.stag});
        out.comp(0) = std::move(u);
        out.comp(1) = std::move(w);
        return out;
    }
    detail::require(q.rank() == Rank::Vector, "curl_potential: vector potential expected in 3D");
    return rot(q);
}

/// Resample every component of `f` onto `dst`.
inline Field resample(const Field& f, const Staggering& dst) {
    const Grid& g = f.grid();
    Field out = (f.rank() == Rank::Scalar) ? Field::scalar(g, dst)
                                           : Field::vector(g, {dst, dst, dst});
    for (int c = 0; c < f.components(); ++c)
        out.comp(c) = detail::interp_to(g, f.comp(c), dst);
    return out;
}

/// Discrete time derivative of a snapshot series: central differences on the
/// interior, second-order one-sided stencils at the end snapshots.
inline TimeSeriesField dt_series(const TimeSeriesField& u, int order) {
    detail::require(order == 1 || order == 2, "dt_series: order must be 1 or 2");
    const int n = u.count();
    const double dt = u.dt();
    std::vector<Field> out(n, u.snap(0));
    auto combine = [&](int k, std::initializer_list<std::pair<int, double>> terms) {
        Field f = u.snap(k);
        f.scale(0.0);
        for (auto [idx, c] : terms) f.axpy(c, u.snap(idx));
        return f;
    };
    if (order == 1) {
        const double c = 1.0 / (2 * dt);
        out[0] = combine(0, {{0, -3 * c}, {1, 4 * c}, {2, -c}});
        for (int k = 1; k < n - 1; ++k) out[k] = combine(k, {{k + 1, c}, {k - 1, -c}});
        out[n - 1] = combine(n - 1, {{n - 1, 3 * c}, {n - 2, -4 * c}, {n - 3, c}});
    } else {
        detail::require(n >= 4, "dt_series: second differences need >= 4 snapshots");
        const double c = 1.0 / (dt * dt);
        out[0] = combine(0, {{0, 2 * c}, {1, -5 * c}, {2, 4 * c}, {3, -c}});
        for (int k = 1; k < n - 1; ++k)
            out[k] = combine(k, {{k + 1, c}, {k, -2 * c}, {k - 1, c}});
        out[n - 1] =
            combine(n - 1, {{n - 1, 2 * c}, {n - 2, -5 * c}, {n - 3, 4 * c}, {n - 4, -c}});
    }
    return TimeSeriesField(std::move(out), dt, u.t_start());
}

} // namespace cnsf

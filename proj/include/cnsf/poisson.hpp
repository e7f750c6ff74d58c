#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "cnsf/field.hpp"
#include "cnsf/operators.hpp"

namespace cnsf {

struct SolverConfig {
    double tol = 1e-10;       // relative residual target
    int max_iter_factor = 10; // iteration cap = factor * #unknowns
};

struct SolveStats {
    int iterations = 0;
    double rel_residual = 0.0;
};

namespace detail {

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

/// Unpreconditioned conjugate gradients on an SPD (or SPSD with consistent
/// rhs) operator. Deterministic for fixed inputs.
template <class Apply>
SolveStats cg(std::vector<double>& x, const std::vector<double>& b, Apply&& A, double tol,
              int max_iter, const char* what) {
    const std::size_t n = b.size();
    std::vector<double> r(n), p(n), Ap(n);
    A(x, Ap);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - Ap[i];
    p = r;
    double rr = dot(r, r);
    const double bnorm = std::sqrt(dot(b, b));
    SolveStats st;
    if (bnorm == 0.0) {
        x.assign(n, 0.0);
        return st;
    }
    const double target = tol * bnorm;
    while (std::sqrt(rr) > target) {
        if (st.iterations >= max_iter)
            throw NumericalError(std::string(what) + ": conjugate-direction iteration cap reached (" +
                                 std::to_string(max_iter) + ")");
        A(p, Ap);
        const double pAp = dot(p, Ap);
        if (pAp <= 0.0 || !std::isfinite(pAp))
            throw NumericalError(std::string(what) + ": operator lost positive definiteness");
        const double alpha = rr / pAp;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * Ap[i];
        }
        const double rr_new = dot(r, r);
        const double beta = rr_new / rr;
        rr = rr_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
        ++st.iterations;
    }
    st.rel_residual = std::sqrt(rr) / bnorm;
    return st;
}

/// 5/7-point Laplacian on the cell-center lattice with reflected (Neumann)
/// ghosts.
inline void center_laplacian_neumann(const Grid& g, const std::vector<double>& x,
                                     std::vector<double>& out) {
    const auto n = g.lattice_sizes(Staggering::center(g.dim()));
    auto id = [&](int i, int j, int k) { return (std::size_t(k) * n[1] + j) * n[0] + i; };
    const double ihx2 = 1.0 / (g.spacing(0) * g.spacing(0));
    const double ihy2 = 1.0 / (g.spacing(1) * g.spacing(1));
    const double ihz2 = g.dim() == 3 ? 1.0 / (g.spacing(2) * g.spacing(2)) : 0.0;
    for (int k = 0; k < n[2]; ++k)
        for (int j = 0; j < n[1]; ++j)
            for (int i = 0; i < n[0]; ++i) {
                const double c = x[id(i, j, k)];
                double lap = 0;
                lap += ((i > 0 ? x[id(i - 1, j, k)] : c) + (i < n[0] - 1 ? x[id(i + 1, j, k)] : c) -
                        2 * c) * ihx2;
                lap += ((j > 0 ? x[id(i, j - 1, k)] : c) + (j < n[1] - 1 ? x[id(i, j + 1, k)] : c) -
                        2 * c) * ihy2;
                if (g.dim() == 3)
                    lap += ((k > 0 ? x[id(i, j, k - 1)] : c) +
                            (k < n[2] - 1 ? x[id(i, j, k + 1)] : c) - 2 * c) * ihz2;
                out[id(i, j, k)] = lap;
            }
}

inline void demean(std::vector<double>& x) {
    double m = 0;
    for (double v : x) m += v;
    m /= double(x.size());
    for (double& v : x) v -= m;
}

} // namespace detail

/// Solve  lap(phi) = rhs  on cell centers with homogeneous Neumann walls.
/// rhs is projected onto mean zero (compatibility); phi comes back mean-zero.
inline SolveStats poisson_center_neumann(const Grid& g, const Component& rhs, Component& phi,
                                         const SolverConfig& cfg = {}) {
    if (!(rhs.stag == Staggering::center(g.dim())))
        throw ContractError("poisson_center_neumann: cell-center rhs expected");
    std::vector<double> b = rhs.v;
    detail::demean(b);
    for (double& v : b) v = -v; // A = -lap is positive semidefinite
    phi.stag = rhs.stag;
    phi.n = rhs.n;
    phi.v.assign(b.size(), 0.0);
    std::vector<double> tmp(b.size());
    auto A = [&](const std::vector<double>& x, std::vector<double>& out) {
        detail::center_laplacian_neumann(g, x, out);
        for (double& v : out) v = -v;
    };
    auto st = detail::cg(phi.v, b, A, cfg.tol, cfg.max_iter_factor * int(b.size()),
                         "pressure poisson");
    detail::demean(phi.v);
    return st;
}

/// Solve  -lap(u) = rhs  on nodes with u = 0 on the boundary nodes.
inline SolveStats poisson_node_dirichlet(const Grid& g, const Component& rhs, Component& u,
                                         const SolverConfig& cfg = {}) {
    if (!(rhs.stag == Staggering::node()))
        throw ContractError("poisson_node_dirichlet: node rhs expected");
    const auto n = rhs.n;
    auto id = [&](int i, int j, int k) { return (std::size_t(k) * n[1] + j) * n[0] + i; };
    auto is_boundary = [&](int i, int j, int k) {
        bool b = (i == 0 || i == n[0] - 1 || j == 0 || j == n[1] - 1);
        if (g.dim() == 3) b = b || (k == 0 || k == n[2] - 1);
        return b;
    };
    std::vector<double> b = rhs.v;
    for (int k = 0; k < n[2]; ++k)
        for (int j = 0; j < n[1]; ++j)
            for (int i = 0; i < n[0]; ++i)
                if (is_boundary(i, j, k)) b[id(i, j, k)] = 0.0;
    const double ih2[3] = {1.0 / (g.spacing(0) * g.spacing(0)),
                           1.0 / (g.spacing(1) * g.spacing(1)),
                           g.dim() == 3 ? 1.0 / (g.spacing(2) * g.spacing(2)) : 0.0};
    auto A = [&](const std::vector<double>& x, std::vector<double>& out) {
        for (int k = 0; k < n[2]; ++k)
            for (int j = 0; j < n[1]; ++j)
                for (int i = 0; i < n[0]; ++i) {
                    if (is_boundary(i, j, k)) {
                        out[id(i, j, k)] = 0.0;
                        continue;
                    }
                    const double c = x[id(i, j, k)];
                    double lap = (x[id(i - 1, j, k)] + x[id(i + 1, j, k)] - 2 * c) * ih2[0] +
                                 (x[id(i, j - 1, k)] + x[id(i, j + 1, k)] - 2 * c) * ih2[1];
                    if (g.dim() == 3)
                        lap += (x[id(i, j, k - 1)] + x[id(i, j, k + 1)] - 2 * c) * ih2[2];
                    out[id(i, j, k)] = -lap;
                }
    };
    u.stag = rhs.stag;
    u.n = n;
    u.v.assign(b.size(), 0.0);
    return detail::cg(u.v, b, A, cfg.tol, cfg.max_iter_factor * int(b.size()), "node poisson");
}

/// Solve  (I - dt lap) u = rhs  for one MAC velocity component. Normal-face
/// wall samples are fixed at zero; tangential directions use mirror ghosts,
/// i.e. the velocity Dirichlet condition at the wall.
inline SolveStats helmholtz_face(const Grid& g, int comp_axis, double dt, const Component& rhs,
                                 Component& u, const SolverConfig& cfg = {}) {
    if (!(rhs.stag == Staggering::face(comp_axis, g.dim())))
        throw ContractError("helmholtz_face: face-staggered rhs expected");
    const auto n = rhs.n;
    auto id = [&](int i, int j, int k) { return (std::size_t(k) * n[1] + j) * n[0] + i; };
    auto fixed = [&](int i, int j, int k) {
        const int q[3] = {i, j, k};
        return q[comp_axis] == 0 || q[comp_axis] == n[comp_axis] - 1;
    };
    const double ih2[3] = {1.0 / (g.spacing(0) * g.spacing(0)),
                           1.0 / (g.spacing(1) * g.spacing(1)),
                           g.dim() == 3 ? 1.0 / (g.spacing(2) * g.spacing(2)) : 0.0};
    auto A = [&](const std::vector<double>& x, std::vector<double>& out) {
        for (int k = 0; k < n[2]; ++k)
            for (int j = 0; j < n[1]; ++j)
                for (int i = 0; i < n[0]; ++i) {
                    if (fixed(i, j, k)) {
                        out[id(i, j, k)] = 0.0;
                        continue;
                    }
                    const double c = x[id(i, j, k)];
                    const int q[3] = {i, j, k};
                    double lap = 0;
                    for (int a = 0; a < g.dim(); ++a) {
                        int qm[3] = {i, j, k}, qp[3] = {i, j, k};
                        qm[a] -= 1;
                        qp[a] += 1;
                        double xm, xp;
                        if (a == comp_axis) {
                            xm = x[id(qm[0], qm[1], qm[2])]; // wall plane stays zero in x
                            xp = x[id(qp[0], qp[1], qp[2])];
                        } else {
                            xm = q[a] == 0 ? -c : x[id(qm[0], qm[1], qm[2])];
                            xp = q[a] == n[a] - 1 ? -c : x[id(qp[0], qp[1], qp[2])];
                        }
                        lap += (xm + xp - 2 * c) * ih2[a];
                    }
                    out[id(i, j, k)] = c - dt * lap;
                }
    };
    std::vector<double> b = rhs.v;
    for (int k = 0; k < n[2]; ++k)
        for (int j = 0; j < n[1]; ++j)
            for (int i = 0; i < n[0]; ++i)
                if (fixed(i, j, k)) b[id(i, j, k)] = 0.0;
    u.stag = rhs.stag;
    u.n = n;
    u.v.assign(b.size(), 0.0);
    return detail::cg(u.v, b, A, cfg.tol, cfg.max_iter_factor * int(b.size()), "helmholtz");
}

/// v <- v + sign * grad(phi) on interior faces only; wall-normal faces are
/// left untouched (homogeneous Neumann for the potential).
inline void add_center_gradient(Field& v, const Component& phi, double sign) {
    const Grid& g = v.grid();
    for (int c = 0; c < g.dim(); ++c) {
        Component& vc = v.comp(c);
        const double ih = 1.0 / g.spacing(c);
        for (int k = 0; k < vc.n[2]; ++k)
            for (int j = 0; j < vc.n[1]; ++j)
                for (int i = 0; i < vc.n[0]; ++i) {
                    const int q[3] = {i, j, k};
                    if (q[c] == 0 || q[c] == vc.n[c] - 1) continue;
                    int qm[3] = {i, j, k};
                    qm[c] -= 1; // cell on the low side of this face
                    vc.at(i, j, k) +=
                        sign * (phi.at(q[0], q[1], q[2]) - phi.at(qm[0], qm[1], qm[2])) * ih;
                }
    }
}

struct ProjectionInfo {
    SolveStats stats;
    double delta_rel = 0.0; // |v - Pv| / |v| in raw samples
};

/// Discrete Leray projection: remove the gradient part of a MAC vector field
/// via a pressure Poisson solve. Output has discrete divergence at the solver
/// tolerance and the projection is idempotent at the same level.
inline Field leray_project(const Field& v, const SolverConfig& cfg = {},
                           ProjectionInfo* info = nullptr, Component* potential = nullptr) {
    if (v.rank() != Rank::Vector) throw ContractError("leray_project: vector field expected");
    const Grid& g = v.grid();
    for (int c = 0; c < g.dim(); ++c)
        if (!(v.comp(c).stag == Staggering::face(c, g.dim())))
            throw ContractError("leray_project: MAC staggering expected");
    Field div = divergence(v);
    Component phi;
    auto st = poisson_center_neumann(g, div.comp(0), phi, cfg);
    Field out = v;
    add_center_gradient(out, phi, -1.0);
    if (info) {
        info->stats = st;
        Field d = out;
        d.axpy(-1.0, v);
        const double vn = v.sample_l2();
        info->delta_rel = vn > 0 ? d.sample_l2() / vn : 0.0;
    }
    if (potential) *potential = std::move(phi);
    return out;
}

/// Leray-project every snapshot of a series.
inline TimeSeriesField leray_project(const TimeSeriesField& F, const SolverConfig& cfg = {},
                                     double* max_delta_rel = nullptr) {
    std::vector<Field> snaps;
    snaps.reserve(F.count());
    double dmax = 0;
    for (int k = 0; k < F.count(); ++k) {
        ProjectionInfo info;
        snaps.push_back(leray_project(F.snap(k), cfg, &info));
        dmax = std::max(dmax, info.delta_rel);
    }
    if (max_delta_rel) *max_delta_rel = dmax;
    return TimeSeriesField(std::move(snaps), F.dt(), F.t_start());
}

} // namespace cnsf

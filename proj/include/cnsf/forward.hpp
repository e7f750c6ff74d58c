#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "cnsf/norms.hpp"
#include "cnsf/poisson.hpp"
#include "cnsf/quadrature.hpp"

namespace cnsf {

/// Linearized system coefficients and data on one grid. A and B are sampled
/// at every time node on the velocity lattices; viscosity is fixed at 1.
struct ForwardProblem {
    Grid grid;
    TimeSeriesField A, B, F;
    Field v0;
};

struct StepDiag {
    double div_residual = 0; // h * |div v|_2, comparable to |v|_2
    double velocity_l2 = 0;
    int poisson_iterations = 0;
    int helmholtz_iterations = 0;
};

struct Solution {
    TimeSeriesField v, p;
    std::vector<StepDiag> steps;

    double max_div_residual_rel() const {
        double m = 0;
        for (const auto& s : steps)
            if (s.velocity_l2 > 0) m = std::max(m, s.div_residual / s.velocity_l2);
        return m;
    }
};

namespace detail {

/// The Laplacian the Helmholtz solve uses: wall-normal planes ignored
/// (fixed), mirror ghosts across walls on the half-offset axes.
inline Component face_laplacian(const Grid& g, int comp_axis, const Component& x) {
    Component out = x;
    const auto n = x.n;
    const double ih2[3] = {1.0 / (g.spacing(0) * g.spacing(0)),
                           1.0 / (g.spacing(1) * g.spacing(1)),
                           g.dim() == 3 ? 1.0 / (g.spacing(2) * g.spacing(2)) : 0.0};
    for (int k = 0; k < n[2]; ++k)
        for (int j = 0; j < n[1]; ++j)
            for (int i = 0; i < n[0]; ++i) {
                const int q[3] = {i, j, k};
                if (q[comp_axis] == 0 || q[comp_axis] == n[comp_axis] - 1) {
                    out.at(i, j, k) = 0.0;
                    continue;
                }
                const double c = x.at(i, j, k);
                double lap = 0;
                for (int a = 0; a < g.dim(); ++a) {
                    int qm[3] = {i, j, k}, qp[3] = {i, j, k};
                    qm[a] -= 1;
                    qp[a] += 1;
                    double xm, xp;
                    if (a == comp_axis) {
                        xm = x.at(qm[0], qm[1], qm[2]);
                        xp = x.at(qp[0], qp[1], qp[2]);
                    } else {
                        xm = q[a] == 0 ? -c : x.at(qm[0], qm[1], qm[2]);
                        xp = q[a] == n[a] - 1 ? -c : x.at(qp[0], qp[1], qp[2]);
                    }
                    lap += (xm + xp - 2 * c) * ih2[a];
                }
                out.at(i, j, k) = lap;
            }
    return out;
}

/// grad(phi) on interior faces, zero on wall faces.
inline Field center_gradient_field(const Grid& g, const Component& phi) {
    Field out = Field::mac_vector(g);
    add_center_gradient(out, phi, 1.0);
    return out;
}

/// (A.grad)v + (v.grad)B on the velocity lattices. Cross components are
/// interpolated; derivatives are same-lattice central stencils.
inline Field advection_terms(const Field& v, const Field& A, const Field& B) {
    const Grid& g = v.grid();
    Field out = Field::mac_vector(g);
    for (int c = 0; c < g.dim(); ++c) {
        Component& oc = out.comp(c);
        for (int a = 0; a < g.dim(); ++a) {
            Component Aa = interp_to(g, A.comp(a), v.comp(c).stag);
            Component dv = diff_collocated(g, v.comp(c), a);
            Component va = interp_to(g, v.comp(a), v.comp(c).stag);
            Component dB = diff_collocated(g, B.comp(c), a);
            for (std::size_t i = 0; i < oc.v.size(); ++i)
                oc.v[i] += Aa.v[i] * dv.v[i] + va.v[i] * dB.v[i];
        }
    }
    return out;
}

inline double max_abs_gradient(const Grid& g, const Field& f) {
    double m = 0;
    for (int c = 0; c < f.components(); ++c)
        for (int a = 0; a < g.dim(); ++a) {
            Component d = diff_collocated(g, f.comp(c), a);
            for (double x : d.v) m = std::max(m, std::abs(x));
        }
    return m;
}

/// Split F into its gradient part (kept as a center potential) and the
/// solenoidal remainder. Exactly divergence-free inputs skip the solve.
struct SourceSplit {
    Field solenoidal;
    Component potential; // F = solenoidal + grad(potential) up to solver tolerance
    bool solved = false;
    int iterations = 0;
};

inline SourceSplit split_source(const Field& F, const SolverConfig& cfg) {
    const Grid& g = F.grid();
    SourceSplit out;
    out.potential.stag = Staggering::center(g.dim());
    out.potential.n = g.lattice_sizes(out.potential.stag);
    out.potential.v.assign(g.lattice_count(out.potential.stag), 0.0);
    Field div = divergence(F);
    const double fn = F.sample_l2();
    if (fn == 0.0 || div.sample_l2() * g.min_spacing() <= 1e-13 * fn) {
        out.solenoidal = F;
        return out;
    }
    auto st = poisson_center_neumann(g, div.comp(0), out.potential, cfg);
    out.solenoidal = F;
    add_center_gradient(out.solenoidal, out.potential, -1.0);
    out.solved = true;
    out.iterations = st.iterations;
    return out;
}

} // namespace detail

/// Semi-implicit march for the linearized system: explicit advection terms,
/// backward-Euler diffusion with the solenoidal source part, then a pressure
/// projection that enforces discrete div v = 0. The gradient part of the
/// source never enters the velocity; it is carried by the pressure, matching
/// the continuum cancellation for scalar-potential sources.
inline Solution solve_forward(const ForwardProblem& prob, const SolverConfig& cfg = {}) {
    const Grid& g = prob.grid;
    const int nt = g.time_steps();
    const double dt = g.dt();
    if (prob.A.count() != nt + 1 || prob.B.count() != nt + 1 || prob.F.count() != nt + 1)
        throw ContractError("solve_forward: coefficients must be sampled at every time node");
    if (!prob.v0.dirichlet_zero_boundary(1e-14 * std::max(1.0, prob.v0.max_abs())))
        throw ContractError("solve_forward: initial velocity must vanish on the boundary");
    {
        Field d = divergence(prob.v0);
        const double vn = prob.v0.sample_l2();
        if (vn > 0 && d.sample_l2() * g.min_spacing() > 1e-6 * vn)
            throw ContractError("solve_forward: initial velocity is not divergence-free");
    }
    // explicit-term stability bound
    double a_max = prob.A.max_abs();
    double b_grad = 0;
    for (int k = 0; k <= nt; ++k)
        b_grad = std::max(b_grad, detail::max_abs_gradient(g, prob.B.snap(k)));
    if (dt * (a_max / g.min_spacing() + b_grad) > 0.5 + 1e-12)
        throw ContractError("solve_forward: dt violates the explicit stability bound "
                            "dt (|A|/h + |grad B|) <= 0.5");

    std::vector<Field> vs(nt + 1, prob.v0);
    std::vector<Field> ps(nt + 1, Field::pressure(g));
    std::vector<StepDiag> diags(nt);

    Field v = prob.v0;
    for (int n = 0; n < nt; ++n) {
        Field expl = detail::advection_terms(v, prob.A.snap(n), prob.B.snap(n));
        detail::SourceSplit src = detail::split_source(prob.F.snap(n + 1), cfg);

        Field vstar = Field::mac_vector(g);
        int helm_iters = 0;
        for (int c = 0; c < g.dim(); ++c) {
            Component rhs = v.comp(c);
            for (std::size_t i = 0; i < rhs.v.size(); ++i)
                rhs.v[i] += dt * (-expl.comp(c).v[i] + src.solenoidal.comp(c).v[i]);
            auto st = helmholtz_face(g, c, dt, rhs, vstar.comp(c), cfg);
            helm_iters += st.iterations;
        }

        Field div = divergence(vstar);
        Component phi;
        auto pst = poisson_center_neumann(g, div.comp(0), phi, cfg);
        add_center_gradient(vstar, phi, -1.0);
        v = std::move(vstar);

        Field& p = ps[n + 1];
        for (std::size_t i = 0; i < p.comp(0).v.size(); ++i)
            p.comp(0).v[i] = phi.v[i] / dt + src.potential.v[i];

        vs[n + 1] = v;
        StepDiag d;
        d.velocity_l2 = v.sample_l2();
        d.div_residual = divergence(v).sample_l2() * g.min_spacing();
        d.poisson_iterations = pst.iterations + src.iterations;
        d.helmholtz_iterations = helm_iters;
        diags[n] = d;
    }
    ps[0] = ps[1]; // pressure has no step-0 value; duplicated for alignment

    Solution sol{TimeSeriesField(std::move(vs), dt), TimeSeriesField(std::move(ps), dt),
                 std::move(diags)};
    return sol;
}

struct ResidualReport {
    std::vector<double> momentum_rel; // per step, L2 of residual over L2 of term scale
    std::vector<double> divergence;   // per step, h |div v|_2
    double max_momentum_rel = 0;
};

/// Re-assemble the marching identity step by step and report how well the
/// stored solution satisfies it. An unperturbed solver output reproduces its
/// own update equation down to the linear-solver tolerance.
inline ResidualReport residual_check(const Solution& sol, const ForwardProblem& prob,
                                     const SolverConfig& cfg = {}) {
    const Grid& g = prob.grid;
    const int nt = g.time_steps();
    const double dt = g.dt();
    ResidualReport rep;
    rep.momentum_rel.resize(nt);
    rep.divergence.resize(nt);
    for (int n = 0; n < nt; ++n) {
        const Field& vn = sol.v.snap(n);
        const Field& vn1 = sol.v.snap(n + 1);
        detail::SourceSplit src = detail::split_source(prob.F.snap(n + 1), cfg);
        // phi = dt (p - source potential); vstar = v^{n+1} + grad phi
        Component phi = sol.p.snap(n + 1).comp(0);
        for (std::size_t i = 0; i < phi.v.size(); ++i)
            phi.v[i] = dt * (phi.v[i] - src.potential.v[i]);
        Field vstar = vn1;
        add_center_gradient(vstar, phi, 1.0);

        Field expl = detail::advection_terms(vn, prob.A.snap(n), prob.B.snap(n));
        Field gp = detail::center_gradient_field(g, sol.p.snap(n + 1).comp(0));

        double res_sq = 0, scale_sq = 0;
        for (int c = 0; c < g.dim(); ++c) {
            Component lap = detail::face_laplacian(g, c, vstar.comp(c));
            Component r = vn1.comp(c);
            const auto nn = r.n;
            for (int k = 0; k < nn[2]; ++k)
                for (int j = 0; j < nn[1]; ++j)
                    for (int i = 0; i < nn[0]; ++i) {
                        const int q[3] = {i, j, k};
                        const std::size_t id = r.idx(i, j, k);
                        if (q[c] == 0 || q[c] == nn[c] - 1) {
                            r.v[id] = 0.0;
                            continue;
                        }
                        const double dvdt = (vn1.comp(c).v[id] - vn.comp(c).v[id]) / dt;
                        const double terms[5] = {dvdt, -lap.v[id], expl.comp(c).v[id],
                                                 gp.comp(c).v[id], -prob.F.snap(n + 1).comp(c).v[id]};
                        double rr = 0;
                        for (double tval : terms) {
                            rr += tval;
                            scale_sq += tval * tval;
                        }
                        r.v[id] = rr;
                        res_sq += rr * rr;
                    }
        }
        rep.momentum_rel[n] = scale_sq > 0 ? std::sqrt(res_sq / scale_sq) : 0.0;
        rep.divergence[n] = divergence(vn1).sample_l2() * g.min_spacing();
        rep.max_momentum_rel = std::max(rep.max_momentum_rel, rep.momentum_rel[n]);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Manufactured solutions: a divergence-free velocity from a stream potential
// q = amp sin^2(kx pi x/Lx) sin^2(ky pi y/Ly) tau(t), a smooth pressure, and
// the source defined by substitution into the momentum equation.
// ---------------------------------------------------------------------------

struct TimeProfile {
    enum Kind { One, SinT, CosT, Ramp, Pulse, Decay } kind = One;
    double T = 1;

    double value(double t) const {
        switch (kind) {
        case One: return 1.0;
        case SinT: return std::sin(2 * M_PI * t / T);
        case CosT: return std::cos(M_PI * t / T);
        case Ramp: return 1.0 + 0.5 * t / T;
        case Pulse: {
            const double u = (t - T / 2) / (T / 4);
            return std::exp(-u * u);
        }
        case Decay: return std::exp(-t / T);
        }
        return 1.0;
    }

    double deriv(double t) const {
        switch (kind) {
        case One: return 0.0;
        case SinT: return (2 * M_PI / T) * std::cos(2 * M_PI * t / T);
        case CosT: return -(M_PI / T) * std::sin(M_PI * t / T);
        case Ramp: return 0.5 / T;
        case Pulse: {
            const double u = (t - T / 2) / (T / 4);
            return std::exp(-u * u) * (-2.0 * u / (T / 4));
        }
        case Decay: return -std::exp(-t / T) / T;
        }
        return 0.0;
    }
};

struct StreamFlow2D {
    double Lx = 1, Ly = 1;
    int kx = 1, ky = 1;
    double amp = 1;
    TimeProfile tau;
    double p0 = 0;
    TimeProfile ptau;
    double a_amp = 0, b_amp = 0;
    TimeProfile atau, btau;

    double ax() const { return kx * M_PI / Lx; }
    double by() const { return ky * M_PI / Ly; }

    double u(double x, double y, double t) const {
        const double s = std::sin(ax() * x);
        return amp * by() * s * s * std::sin(2 * by() * y) * tau.value(t);
    }
    double v(double x, double y, double t) const {
        const double s = std::sin(by() * y);
        return -amp * ax() * std::sin(2 * ax() * x) * s * s * tau.value(t);
    }
    double p(double x, double y, double t) const {
        return p0 * std::cos(M_PI * x / Lx) * std::cos(M_PI * y / Ly) * ptau.value(t);
    }

    double A1(double x, double y, double t) const {
        return a_amp * std::sin(M_PI * x / Lx) * std::cos(M_PI * y / Ly) * atau.value(t);
    }
    double A2(double x, double y, double t) const {
        return a_amp * std::cos(M_PI * x / Lx) * std::sin(M_PI * y / Ly) * atau.value(t);
    }
    double B1(double x, double y, double t) const {
        return b_amp * std::sin(2 * M_PI * x / Lx) * std::sin(M_PI * y / Ly) * btau.value(t);
    }
    double B2(double x, double y, double t) const {
        return b_amp * std::sin(M_PI * x / Lx) * std::sin(2 * M_PI * y / Ly) * btau.value(t);
    }

    double Fx(double x, double y, double t) const {
        const double a = ax(), b = by();
        const double sx = std::sin(a * x), s2x = std::sin(2 * a * x), c2x = std::cos(2 * a * x);
        const double s2y = std::sin(2 * b * y), c2y = std::cos(2 * b * y);
        const double tv = tau.value(t), td = tau.deriv(t);
        const double ut = amp * b * sx * sx * s2y * td;
        const double uxx = 2 * amp * a * a * b * c2x * s2y * tv;
        const double uyy = -4 * amp * b * b * b * sx * sx * s2y * tv;
        const double uxv = amp * a * b * s2x * s2y * tv;      // u_x
        const double uyv = 2 * amp * b * b * sx * sx * c2y * tv; // u_y
        const double b1x = b_amp * (2 * M_PI / Lx) * std::cos(2 * M_PI * x / Lx) *
                           std::sin(M_PI * y / Ly) * btau.value(t);
        const double b1y = b_amp * std::sin(2 * M_PI * x / Lx) * (M_PI / Ly) *
                           std::cos(M_PI * y / Ly) * btau.value(t);
        const double px = -p0 * (M_PI / Lx) * std::sin(M_PI * x / Lx) *
                          std::cos(M_PI * y / Ly) * ptau.value(t);
        return ut - (uxx + uyy) + A1(x, y, t) * uxv + A2(x, y, t) * uyv +
               u(x, y, t) * b1x + v(x, y, t) * b1y + px;
    }

    double Fy(double x, double y, double t) const {
        const double a = ax(), b = by();
        const double sy = std::sin(b * y), s2y = std::sin(2 * b * y), c2y = std::cos(2 * b * y);
        const double s2x = std::sin(2 * a * x), c2x = std::cos(2 * a * x);
        const double tv = tau.value(t), td = tau.deriv(t);
        const double vt = -amp * a * s2x * sy * sy * td;
        const double vxx = 4 * amp * a * a * a * s2x * sy * sy * tv;
        const double vyy = -2 * amp * a * b * b * s2x * c2y * tv;
        const double vxv = -2 * amp * a * a * c2x * sy * sy * tv;  // v_x
        const double vyv = -amp * a * b * s2x * s2y * tv;          // v_y
        const double b2x = b_amp * (M_PI / Lx) * std::cos(M_PI * x / Lx) *
                           std::sin(2 * M_PI * y / Ly) * btau.value(t);
        const double b2y = b_amp * std::sin(M_PI * x / Lx) * (2 * M_PI / Ly) *
                           std::cos(2 * M_PI * y / Ly) * btau.value(t);
        const double py = -p0 * std::cos(M_PI * x / Lx) * (M_PI / Ly) *
                          std::sin(M_PI * y / Ly) * ptau.value(t);
        return vt - (vxx + vyy) + A1(x, y, t) * vxv + A2(x, y, t) * vyv +
               u(x, y, t) * b2x + v(x, y, t) * b2y + py;
    }

    /// Stream potential (for the exactly divergence-free discrete initial state).
    double q(double x, double y, double t) const {
        const double sx = std::sin(ax() * x), sy = std::sin(by() * y);
        return amp * sx * sx * sy * sy * tau.value(t);
    }
};

struct ManufacturedCase {
    std::string name;
    ForwardProblem problem;
    TimeSeriesField v_exact, p_exact;
    StreamFlow2D flow;
};

inline StreamFlow2D manufactured_flow(const std::string& id, double Lx, double Ly, double T) {
    StreamFlow2D f;
    f.Lx = Lx;
    f.Ly = Ly;
    f.tau.T = f.ptau.T = f.atau.T = f.btau.T = T;
    if (id == "steady") {
        f.amp = 1.0;
    } else if (id == "sin") {
        f.amp = 1.0;
        f.tau.kind = TimeProfile::SinT;
        f.p0 = 0.5;
        f.ptau.kind = TimeProfile::CosT;
        f.a_amp = 0.4;
        f.b_amp = 0.4;
        f.atau.kind = TimeProfile::CosT;
    } else if (id == "cos") {
        f.amp = 0.8;
        f.tau.kind = TimeProfile::CosT;
        f.p0 = 0.3;
        f.ptau.kind = TimeProfile::SinT;
        f.a_amp = 0.3;
        f.b_amp = 0.5;
        f.btau.kind = TimeProfile::CosT;
    } else if (id == "mode21") {
        f.kx = 2;
        f.amp = 0.7;
        f.tau.kind = TimeProfile::Ramp;
        f.p0 = 0.4;
        f.a_amp = 0.5;
        f.b_amp = 0.2;
    } else if (id == "mode12") {
        f.ky = 2;
        f.amp = 0.9;
        f.tau.kind = TimeProfile::Pulse;
        f.p0 = 0.2;
        f.ptau.kind = TimeProfile::CosT;
        f.a_amp = 0.2;
        f.b_amp = 0.4;
    } else if (id == "pulse") {
        f.amp = 1.2;
        f.tau.kind = TimeProfile::Pulse;
        f.p0 = 0.3;
        f.ptau.kind = TimeProfile::SinT;
        f.a_amp = 0.4;
        f.b_amp = 0.3;
        f.atau.kind = TimeProfile::SinT;
    } else if (id == "decay") {
        f.kx = 2;
        f.ky = 2;
        f.amp = 0.6;
        f.tau.kind = TimeProfile::Decay;
        f.p0 = 0.25;
        f.a_amp = 0.3;
        f.b_amp = 0.3;
    } else {
        throw ContractError("manufactured_problem: unknown catalog id '" + id + "'");
    }
    return f;
}

inline ManufacturedCase manufactured_problem(const std::string& id, const Grid& g) {
    if (g.dim() != 2) throw ContractError("manufactured_problem: 2D grids only");
    StreamFlow2D f = manufactured_flow(id, g.extent(0), g.extent(1), g.horizon());

    ManufacturedCase mc;
    mc.name = id;
    mc.flow = f;
    using Fn = std::function<double(const Vec3&, double)>;
    std::array<Fn, 3> Af = {[&](const Vec3& p, double t) { return f.A1(p.x, p.y, t); },
                            [&](const Vec3& p, double t) { return f.A2(p.x, p.y, t); }, Fn{}};
    std::array<Fn, 3> Bf = {[&](const Vec3& p, double t) { return f.B1(p.x, p.y, t); },
                            [&](const Vec3& p, double t) { return f.B2(p.x, p.y, t); }, Fn{}};
    std::array<Fn, 3> Ff = {[&](const Vec3& p, double t) { return f.Fx(p.x, p.y, t); },
                            [&](const Vec3& p, double t) { return f.Fy(p.x, p.y, t); }, Fn{}};
    std::array<Fn, 3> vf = {[&](const Vec3& p, double t) { return f.u(p.x, p.y, t); },
                            [&](const Vec3& p, double t) { return f.v(p.x, p.y, t); }, Fn{}};

    mc.problem.grid = g;
    mc.problem.A = TimeSeriesField::sample_mac(g, Af);
    mc.problem.B = TimeSeriesField::sample_mac(g, Bf);
    mc.problem.F = TimeSeriesField::sample_mac(g, Ff);

    // exactly divergence-free discrete initial state from the node potential
    Field q0 = Field::sample_scalar(g, Staggering::node(),
                                    [&](const Vec3& p) { return f.q(p.x, p.y, 0.0); });
    mc.problem.v0 = curl_potential(q0);

    mc.v_exact = TimeSeriesField::sample_mac(g, vf);
    mc.p_exact = TimeSeriesField::sample_scalar(g, Staggering::center(2), [&](const Vec3& p, double t) {
        return f.p(p.x, p.y, t);
    });
    return mc;
}

/// L2(Q) distance between a computed and an exact velocity series.
inline double space_time_l2_error(const TimeSeriesField& a, const TimeSeriesField& b) {
    if (a.count() != b.count()) throw ContractError("space_time_l2_error: length mismatch");
    const Grid& g [[maybe_unused]] = a.grid();
    double total = 0;
    const int nt = a.count() - 1;
    for (int k = 0; k <= nt; ++k) {
        Field d = a.snap(k);
        d.axpy(-1.0, b.snap(k));
        total += time_weight(k, nt) * a.dt() * integrate_sq(d, Region::all());
    }
    return std::sqrt(total);
}

} // namespace cnsf

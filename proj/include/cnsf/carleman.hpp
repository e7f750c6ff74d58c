#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "cnsf/forward.hpp"
#include "cnsf/weights.hpp"

namespace cnsf {

struct LemmaSides {
    double lhs = 0, rhs = 0;
    double log_scale = 0;      // actual sides are value * e^{log_scale}
    bool flagged_negative = false;
};

struct CarlemanRow {
    double s = 0, lhs = 0, rhs = 0, ratio = 0;
    bool ratio_defined = false;
};

/// One s-sweep of an estimate: per-s sides, the fitted constant (max ratio at
/// and beyond the empirical threshold s-hat0) and bookkeeping for reports.
struct CarlemanReport {
    std::string lemma;
    int m = 0;
    std::vector<CarlemanRow> rows;
    double c_hat = 0;
    bool c_hat_defined = false;
    double s_hat0 = 0;
    std::string input_descriptor;
    std::vector<std::string> flags;
};

// ---------------------------------------------------------------------------
// Lemma 1: weighted space-time estimate for solutions of the system
// ---------------------------------------------------------------------------

/// Both sides of the moving-weight estimate at one (s, m). LHS integrates
/// s^m phi^m |grad v|^2 + s^{m+1} phi^{m+1} |rot v|^2 + s^{m+2} phi^{m+2} |v|^2
/// over the whole cylinder; RHS the source term plus the omega-localized
/// terms. The first/last time slices vanish under the weight.
inline LemmaSides lemma1_sides(const TimeSeriesField& v, const TimeSeriesField& F,
                               const WeightSet& ws, double s, int m) {
    const Grid& g = v.grid();
    if (!g.same_layout(ws.grid())) throw ContractError("lemma1_sides: weight set on another grid");
    if (m < 0) throw ContractError("lemma1_sides: m must be nonnegative");
    if (s <= 0) throw ContractError("lemma1_sides: s must be positive");
    if (!g.omega_box()) throw ContractError("lemma1_sides: omega subdomain not set");
    if (v.count() != F.count()) throw ContractError("lemma1_sides: v and F length mismatch");

    const int nt = v.count() - 1;
    const double sm = std::pow(s, m), sm1 = std::pow(s, m + 1), sm2 = std::pow(s, m + 2);
    LemmaSides out;
    for (int k = 0; k <= nt; ++k) {
        const double t = v.time(k);
        if (ws.ell().value(t) <= 0.0) continue; // endpoint slices contribute nothing
        const double wt = time_weight(k, nt) * v.dt();
        auto weight = [&](int pw) {
            return [&ws, t, s, pw](const Vec3& p) { return ws.phi_pow_weight(p, t, s, pw); };
        };
        const Field& vk = v.snap(k);
        Field rv = rot(vk);
        double grad_all = 0, grad_om = 0;
        for (int c = 0; c < vk.components(); ++c)
            for (int a = 0; a < g.dim(); ++a) {
                Component d = detail::diff(g, vk.comp(c), a);
                grad_all += integrate(g, {&d, &d}, Region::all(), weight(m));
                grad_om += integrate(g, {&d, &d}, Region::omega(), weight(m + 1));
            }
        const double rot_all = integrate_sq(rv, Region::all(), weight(m + 1));
        const double rot_om = integrate_sq(rv, Region::omega(), weight(m + 1));
        const double v_all = integrate_sq(vk, Region::all(), weight(m + 2));
        const double v_om = integrate_sq(vk, Region::omega(), weight(m + 2));
        const double f_all = integrate_sq(F.snap(k), Region::all(), weight(m));

        out.lhs += wt * (sm * grad_all + sm1 * rot_all + sm2 * v_all);
        out.rhs += wt * (sm * f_all + sm1 * rot_om + sm2 * v_om + sm1 * grad_om);
    }
    return out;
}

/// Gated variant: refuses inputs that do not satisfy the discrete system.
inline LemmaSides lemma1_sides_checked(const Solution& sol, const ForwardProblem& prob,
                                       const WeightSet& ws, double s, int m,
                                       double residual_tol = 1e-6) {
    ResidualReport rep = residual_check(sol, prob);
    if (rep.max_momentum_rel > residual_tol)
        throw ContractError("lemma1_sides: input does not solve the system (momentum residual " +
                            std::to_string(rep.max_momentum_rel) + " exceeds " +
                            std::to_string(residual_tol) + ")");
    if (!sol.v.snap(0).dirichlet_zero_boundary(1e-12 * std::max(1.0, sol.v.max_abs())))
        throw ContractError("lemma1_sides: velocity must vanish on the boundary");
    return lemma1_sides(sol.v, prob.F, ws, s, m);
}

/// The appendix transform w = phi-hat^{m/2} v. The first/last snapshots,
/// where phi-hat diverges, are replaced by zeros; every integral they enter
/// carries weight e^{2 s alpha} = 0 there.
inline TimeSeriesField mshift_transform(const TimeSeriesField& v, int m, const WeightSet& ws) {
    if (m < 0) throw ContractError("mshift_transform: m must be nonnegative");
    std::vector<Field> snaps;
    snaps.reserve(v.count());
    for (int k = 0; k < v.count(); ++k) {
        Field f = v.snap(k);
        const double l = ws.ell().value(v.time(k));
        if (l <= 0.0 && m > 0)
            f.scale(0.0);
        else if (m > 0)
            f.scale(std::pow(l, -4.0 * m));
        snaps.push_back(std::move(f));
    }
    return TimeSeriesField(std::move(snaps), v.dt(), v.t_start());
}

/// The coefficient q(t) with d_t w = phi-hat^{m/2} d_t v + q(t) phi-hat w.
inline double mshift_q(const WeightSet& ws, int m, double t) {
    return -4.0 * m * ws.ell().deriv(t) * std::pow(ws.ell().value(t), 7.0);
}

// ---------------------------------------------------------------------------
// Lemma 2: stationary div/rot estimate with the weight e^{2 s phi0}
// ---------------------------------------------------------------------------

inline LemmaSides lemma2_sides(const Field& w, const StationaryWeight& sw, double s) {
    const Grid& g = w.grid();
    if (s <= 0) throw ContractError("lemma2_sides: s must be positive");
    if (w.rank() != Rank::Vector) throw ContractError("lemma2_sides: vector field expected");
    if (!g.omega_box()) throw ContractError("lemma2_sides: omega subdomain not set");
    if (!w.dirichlet_zero_boundary(1e-12 * std::max(1.0, w.max_abs())))
        throw ContractError("lemma2_sides: w must vanish on the boundary");
    const double on_omega = w.max_abs_in_box(*g.omega_box());
    if (on_omega > 1e-12 * std::max(1.0, w.max_abs()))
        throw ContractError("lemma2_sides: w must vanish on omega (max there " +
                            std::to_string(on_omega) + ")");

    // keep the shared exponential inside double range; the ratio is unchanged
    double phimax = 0;
    for (double v : sw.psi.comp(0).v) phimax = std::max(phimax, std::exp(sw.lambda * v));
    const double shift = 2.0 * s * phimax > 650.0 ? 2.0 * s * phimax - 650.0 : 0.0;
    auto weight = [&](const Vec3& p) { return std::exp(2.0 * s * sw.phi0(p) - shift); };

    Field gfield = rot(w);
    Field hfield = divergence(w);

    LemmaSides out;
    out.log_scale = shift;
    double grad_sq = 0;
    for (int c = 0; c < w.components(); ++c)
        for (int a = 0; a < g.dim(); ++a) {
            Component d = detail::diff(g, w.comp(c), a);
            grad_sq += integrate(g, {&d, &d}, Region::all(), weight);
        }
    out.lhs = grad_sq / s + s * integrate_sq(w, Region::all(), weight);
    out.rhs = integrate_sq(gfield, Region::all(), weight) +
              integrate_sq(hfield, Region::all(), weight);
    return out;
}

// ---------------------------------------------------------------------------
// Lemma 3: the time-collapse bound for phi |g| e^{2 s alpha}
// ---------------------------------------------------------------------------

inline LemmaSides lemma3_sides(const Field& gfun, const WeightSet& ws, double s) {
    if (s < 1.0) throw ContractError("lemma3_sides: s >= 1 required");
    if (gfun.rank() != Rank::Scalar) throw ContractError("lemma3_sides: scalar g expected");
    const Grid& g = gfun.grid();
    if (!g.same_layout(ws.grid())) throw ContractError("lemma3_sides: weight set on another grid");

    LemmaSides out;
    Field absg = gfun;
    for (double& v : absg.comp(0).v) {
        if (v < 0) {
            out.flagged_negative = true;
            v = -v;
        }
    }
    const int nt = g.time_steps();
    for (int k = 0; k <= nt; ++k) {
        const double t = g.time(k);
        if (ws.ell().value(t) <= 0.0) continue;
        out.lhs += time_weight(k, nt) * g.dt() *
                   integrate(g, {&absg.comp(0)}, Region::all(), [&](const Vec3& p) {
                       return ws.phi_pow_weight(p, t, s, 1);
                   });
    }
    const double t0 = g.t0();
    out.rhs = integrate(g, {&absg.comp(0)}, Region::all(),
                        [&](const Vec3& p) { return ws.exp2salpha(p, t0, s); });
    return out;
}

// ---------------------------------------------------------------------------
// Sweeps and empirical constants
// ---------------------------------------------------------------------------

/// Run an estimate over ascending s values and fit the empirical constant:
/// s-hat0 is the smallest s beyond which the ratio stops increasing by more
/// than 5% per step, and C-hat the max ratio from there on.
inline CarlemanReport s_sweep(const std::string& lemma, int m,
                              const std::function<LemmaSides(double)>& sides,
                              const std::vector<double>& s_list,
                              const std::string& descriptor = "") {
    if (s_list.size() < 4) throw ContractError("s_sweep: at least 4 s values required");
    for (std::size_t i = 1; i < s_list.size(); ++i)
        if (s_list[i] <= s_list[i - 1]) throw ContractError("s_sweep: s list must ascend");

    CarlemanReport rep;
    rep.lemma = lemma;
    rep.m = m;
    rep.input_descriptor = descriptor;
    bool any_rhs = false;
    for (double s : s_list) {
        LemmaSides sd = sides(s);
        if (sd.lhs < 0 || sd.rhs < 0)
            throw NumericalError("s_sweep: negative side value");
        CarlemanRow row;
        row.s = s;
        row.lhs = sd.lhs;
        row.rhs = sd.rhs;
        if (sd.rhs > 0) {
            row.ratio = sd.lhs / sd.rhs;
            row.ratio_defined = true;
            any_rhs = true;
        }
        if (sd.flagged_negative) rep.flags.push_back("negative-g-abs-applied");
        if (sd.log_scale != 0) rep.flags.push_back("log-scaled");
        rep.rows.push_back(row);
    }
    if (!any_rhs) {
        rep.flags.push_back("chat-undefined-all-rhs-zero");
        return rep;
    }
    // detect where ratios stop climbing
    std::size_t stable = rep.rows.size() - 1;
    for (std::size_t i = 0; i + 1 < rep.rows.size(); ++i) {
        bool ok = true;
        for (std::size_t j = i; j + 1 < rep.rows.size(); ++j) {
            if (!rep.rows[j].ratio_defined || !rep.rows[j + 1].ratio_defined) continue;
            if (rep.rows[j + 1].ratio > 1.05 * rep.rows[j].ratio) {
                ok = false;
                break;
            }
        }
        if (ok) {
            stable = i;
            break;
        }
    }
    rep.s_hat0 = rep.rows[stable].s;
    for (std::size_t i = stable; i < rep.rows.size(); ++i)
        if (rep.rows[i].ratio_defined) {
            rep.c_hat = std::max(rep.c_hat, rep.rows[i].ratio);
            rep.c_hat_defined = true;
        }
    return rep;
}

/// Pool several sweep reports of one family: common threshold, max constant.
struct Calibration {
    double s_hat0 = 0;
    double c_hat = 0;
    bool defined = false;
};

inline Calibration calibrate(const std::vector<CarlemanReport>& reports) {
    Calibration cal;
    for (const auto& r : reports) {
        if (!r.c_hat_defined) continue;
        cal.s_hat0 = std::max(cal.s_hat0, r.s_hat0);
        cal.defined = true;
    }
    for (const auto& r : reports)
        for (const auto& row : r.rows)
            if (row.ratio_defined && row.s >= cal.s_hat0)
                cal.c_hat = std::max(cal.c_hat, row.ratio);
    return cal;
}

/// Max holdout ratio at and beyond the calibrated threshold.
inline double max_ratio_from(const CarlemanReport& r, double s_from) {
    double m = 0;
    for (const auto& row : r.rows)
        if (row.ratio_defined && row.s >= s_from) m = std::max(m, row.ratio);
    return m;
}

// ---------------------------------------------------------------------------
// Bump-field families for the Lemma 2 experiments
// ---------------------------------------------------------------------------

/// C-infinity compact bump, exp(1 - 1/(1 - r^2)) inside the unit ball.
inline double bump_profile(double r_sq) {
    return r_sq < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - r_sq)) : 0.0;
}

/// Seeded family of vector bumps supported away from omega and the boundary
/// collar. With curl_potential = true the field is a discrete curl, so its
/// divergence vanishes identically.
inline std::vector<Field> lemma2_bump_family(const Grid& g, uint64_t seed, int count,
                                             bool curl_pot = false) {
    if (!g.omega_box()) throw ContractError("lemma2_bump_family: omega subdomain not set");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const Box om = *g.omega_box();
    std::vector<Field> out;
    for (int n = 0; n < count; ++n) {
        // center in one of the four corner quadrants, support clear of omega
        // and of a 2-cell boundary collar
        auto pick_center = [&](int axis) {
            const double L = g.extent(axis);
            const double lo = om.lo[axis], hi = om.hi[axis];
            const double collar = 3.0 * g.spacing(axis);
            const bool low_side = uni(rng) < 0.5;
            const double r_max = 0.12 * L;
            double cmin, cmax;
            if (low_side) {
                cmin = collar + r_max;
                cmax = lo - r_max - collar;
            } else {
                cmin = hi + r_max + collar;
                cmax = L - collar - r_max;
            }
            if (cmax <= cmin)
                throw ContractError("lemma2_bump_family: no room between omega and the boundary");
            return cmin + (cmax - cmin) * uni(rng);
        };
        const double cx = pick_center(0), cy = pick_center(1);
        const double rx = (0.06 + 0.06 * uni(rng)) * g.extent(0);
        const double ry = (0.06 + 0.06 * uni(rng)) * g.extent(1);
        const double a0 = 0.5 + uni(rng), a1 = 0.5 + uni(rng);
        auto ellipse = [cx, cy, rx, ry](const Vec3& p) {
            const double ux = (p.x - cx) / rx, uy = (p.y - cy) / ry;
            return bump_profile(ux * ux + uy * uy);
        };
        if (curl_pot) {
            Field q = Field::sample_scalar(g, Staggering::node(),
                                           [&](const Vec3& p) { return a0 * ellipse(p); });
            out.push_back(curl_potential(q));
        } else {
            Field w = Field::mac_vector(g);
            w.fill(0, [&](const Vec3& p) { return a0 * ellipse(p); });
            w.fill(1, [&](const Vec3& p) { return a1 * ellipse(p); });
            out.push_back(std::move(w));
        }
    }
    return out;
}

} // namespace cnsf

#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "cnsf/operators.hpp"
#include "cnsf/poisson.hpp"

namespace cnsf {

/// Temporal profile: equal to t up to T/4, then a C-infinity monotone blend
/// up to its strict maximum at t0 = T/2, mirrored on the second half. The
/// blend is t + (peak - t) * B(xi) with B the exponential smoothstep, so all
/// derivatives vanish where the pieces join.
class EllProfile {
public:
    EllProfile() = default;

    EllProfile(double T, double peak) : T_(T), peak_(peak) {
        if (peak <= T / 4)
            throw ContractError("ell profile: peak_value must exceed T/4");
        if (peak < T / 2)
            throw ContractError(
                "ell profile: peak_value below T/2 would break the strict maximum at t0");
    }

    double horizon() const { return T_; }
    double peak() const { return peak_; }

    double value(double t) const {
        if (t > T_ / 2) t = T_ - t;
        if (t <= 0) return 0.0;
        if (t <= T_ / 4) return t;
        const double xi = (t - T_ / 4) / (T_ / 4);
        return t + (peak_ - t) * smoothstep(xi);
    }

    double deriv(double t) const {
        if (t > T_ / 2) return -deriv(T_ - t);
        if (t <= 0 || t <= T_ / 4) return 1.0;
        const double xi = (t - T_ / 4) / (T_ / 4);
        return 1.0 - smoothstep(xi) + (peak_ - t) * smoothstep_deriv(xi) * (4.0 / T_);
    }

private:
    static double bump(double x) { return x > 0 ? std::exp(-1.0 / x) : 0.0; }
    static double bump_deriv(double x) { return x > 0 ? bump(x) / (x * x) : 0.0; }

    static double smoothstep(double x) {
        if (x <= 0) return 0.0;
        if (x >= 1) return 1.0;
        const double a = bump(x), b = bump(1 - x);
        return a / (a + b);
    }

    static double smoothstep_deriv(double x) {
        if (x <= 0 || x >= 1) return 0.0;
        const double a = bump(x), b = bump(1 - x);
        const double ad = bump_deriv(x), bd = bump_deriv(1 - x);
        return (ad * b + a * bd) / ((a + b) * (a + b));
    }

    double T_ = 0, peak_ = 0;
};

inline EllProfile build_ell(double T, double peak_value) { return EllProfile(T, peak_value); }

/// What the weight construction certifies: where the discrete critical points
/// sit and how far the gradient stays from zero outside the allowed core.
struct WeightCertificate {
    std::string method;                                // analytic | poisson
    double min_grad_outside = 0;                       // over the domain minus the core subdomain
    double gradient_floor = 0;                         // 10 h max|Hessian|
    std::vector<std::array<double, 3>> critical_points;
    bool corners_excluded = true;
    double corner_exclusion_radius = 0;                // halo matching the floor's resolution
    double field_max = 0;                              // discrete sup of eta (resp. psi - c0)
};

namespace detail {

/// The rectangle's corners (2D) and edges (3D) are genuine critical
/// directions of any admissible weight; everything within the resolution
/// radius of the gradient floor around them is excluded from certification.
inline bool corner_zone(const Grid& g, const Vec3& p, double radius) {
    int close = 0;
    for (int a = 0; a < g.dim(); ++a) {
        const double d = std::min(p[a], g.extent(a) - p[a]);
        if (d <= radius) ++close;
    }
    return close >= 2;
}

/// Certify a node scalar against the (2.1)/(2.4) clauses: locate discrete
/// critical points via a gradient floor and require them inside `core`;
/// report min |grad| outside the core with corner nodes excluded.
inline WeightCertificate certify_weight_field(
    const Grid& g, const Component& field, const std::vector<uint8_t>& core_mask,
    const std::string& core_name, const std::string& method,
    const std::function<Vec3(const Vec3&)>& analytic_grad) {
    WeightCertificate cert;
    cert.method = method;

    // gradient per node: analytic when available, composed differences otherwise
    std::vector<Component> grad(g.dim());
    if (!analytic_grad) {
        for (int a = 0; a < g.dim(); ++a) grad[a] = diff_collocated(g, field, a);
    }
    auto grad_norm = [&](int i, int j, int k) {
        if (analytic_grad) {
            const Vec3 gr = analytic_grad(g.point(Staggering::node(), i, j, k));
            double s = gr.x * gr.x + gr.y * gr.y;
            if (g.dim() == 3) s += gr.z * gr.z;
            return std::sqrt(s);
        }
        double s = 0;
        for (int a = 0; a < g.dim(); ++a) s += grad[a].at(i, j, k) * grad[a].at(i, j, k);
        return std::sqrt(s);
    };

    // discrete Hessian bound for the detection floor (Taylor resolution limit)
    double hess_max = 0;
    for (int a = 0; a < g.dim(); ++a) {
        Component da = diff_collocated(g, field, a);
        for (int b = a; b < g.dim(); ++b) {
            Component dab = diff_collocated(g, da, b);
            for (double v : dab.v) hess_max = std::max(hess_max, std::abs(v));
        }
    }
    cert.gradient_floor = 10.0 * g.max_spacing() * hess_max;
    cert.corner_exclusion_radius = 11.0 * g.max_spacing();

    const auto n = field.n;
    double min_outside = std::numeric_limits<double>::infinity();
    for (int k = 0; k < n[2]; ++k)
        for (int j = 0; j < n[1]; ++j)
            for (int i = 0; i < n[0]; ++i) {
                if (corner_zone(g, g.point(Staggering::node(), i, j, k),
                                cert.corner_exclusion_radius))
                    continue;
                const double gn = grad_norm(i, j, k);
                const bool in_core = core_mask[field.idx(i, j, k)] != 0;
                if (gn < cert.gradient_floor) {
                    const Vec3 p = g.point(Staggering::node(), i, j, k);
                    cert.critical_points.push_back({p.x, p.y, p.z});
                    if (!in_core)
                        throw ContractError("weight construction failure: critical point at (" +
                                            std::to_string(p.x) + ", " + std::to_string(p.y) +
                                            (g.dim() == 3 ? ", " + std::to_string(p.z) : "") +
                                            ") lies outside " + core_name);
                }
                if (!in_core) min_outside = std::min(min_outside, gn);
            }
    cert.min_grad_outside = min_outside;
    double fmax = 0;
    for (double v : field.v) fmax = std::max(fmax, v);
    cert.field_max = fmax;
    return cert;
}

inline double product_of_sines(const Grid& g, const Vec3& p) {
    double v = std::sin(M_PI * p.x / g.extent(0)) * std::sin(M_PI * p.y / g.extent(1));
    if (g.dim() == 3) v *= std::sin(M_PI * p.z / g.extent(2));
    return v;
}

inline Vec3 product_of_sines_grad(const Grid& g, const Vec3& p) {
    const double ax = M_PI / g.extent(0), ay = M_PI / g.extent(1);
    const double sx = std::sin(ax * p.x), cx = std::cos(ax * p.x);
    const double sy = std::sin(ay * p.y), cy = std::cos(ay * p.y);
    if (g.dim() == 2) return {ax * cx * sy, ay * sx * cy, 0.0};
    const double az = M_PI / g.extent(2);
    const double sz = std::sin(az * p.z), cz = std::cos(az * p.z);
    return {ax * cx * sy * sz, ay * sx * cy * sz, az * sx * sy * cz};
}

/// Multilinear interpolation of a node component at an arbitrary point.
inline double interp_node_at(const Grid& g, const Component& c, const Vec3& p) {
    double w[3][2];
    int base[3] = {0, 0, 0};
    for (int a = 0; a < g.dim(); ++a) {
        double s = p[a] / g.spacing(a);
        int i0 = int(std::floor(s));
        i0 = std::max(0, std::min(i0, g.cells(a) - 1));
        const double f = s - i0;
        base[a] = i0;
        w[a][0] = 1 - f;
        w[a][1] = f;
    }
    double val = 0;
    const int kz = g.dim() == 3 ? 1 : 0;
    for (int dk = 0; dk <= kz; ++dk)
        for (int dj = 0; dj <= 1; ++dj)
            for (int di = 0; di <= 1; ++di) {
                double ww = w[0][di] * w[1][dj] * (g.dim() == 3 ? w[2][dk] : 1.0);
                val += ww * c.at(base[0] + di, base[1] + dj, base[2] + dk);
            }
    return val;
}

} // namespace detail

enum class WeightMethod { Analytic, Poisson };

struct EtaField {
    Field field; // node samples
    WeightCertificate certificate;
    std::function<double(const Vec3&)> eval; // pointwise evaluator
};

/// Construct eta with eta = 0 on the boundary, eta > 0 inside and all
/// critical points certified inside omega0. The analytic method uses the
/// product of sines (single interior critical point at the center); the
/// poisson method solves -lap(eta) = 1 with zero boundary values.
inline EtaField build_eta(const Grid& g, WeightMethod method) {
    if (!g.omega0_box()) throw ContractError("build_eta: omega0 subdomain not set");
    EtaField out;
    if (method == WeightMethod::Analytic) {
        out.field = Field::sample_scalar(g, Staggering::node(), [&](const Vec3& p) {
            return detail::product_of_sines(g, p);
        });
        out.certificate = detail::certify_weight_field(
            g, out.field.comp(0), g.omega0_mask(), "omega0", "analytic",
            [&](const Vec3& p) { return detail::product_of_sines_grad(g, p); });
        out.eval = [g](const Vec3& p) { return detail::product_of_sines(g, p); };
    } else {
        Component rhs;
        rhs.stag = Staggering::node();
        rhs.n = g.lattice_sizes(rhs.stag);
        rhs.v.assign(g.lattice_count(rhs.stag), 1.0);
        Component eta;
        poisson_node_dirichlet(g, rhs, eta);
        out.field = Field::scalar(g, Staggering::node());
        out.field.comp(0) = eta;
        out.certificate = detail::certify_weight_field(g, out.field.comp(0), g.omega0_mask(),
                                                       "omega0", "poisson", nullptr);
        Component stored = out.field.comp(0);
        out.eval = [g, stored](const Vec3& p) { return detail::interp_node_at(g, stored, p); };
    }
    return out;
}

/// The moving-weight family (2.3): phi = e^{lambda eta}/ell^8 and
/// alpha = (e^{lambda eta} - e^{2 lambda |eta|_max})/ell^8, with the ell^8
/// exponent fixed. Everything is evaluated through closed forms in ell, so
/// the endpoint singularities reduce to clean exponential underflow.
class WeightSet {
public:
    WeightSet() = default;

    WeightSet(const Grid& g, double lambda, WeightMethod method, double ell_peak)
        : grid_(g), lambda_(lambda), eta_(build_eta(g, method)),
          ell_(g.horizon(), ell_peak) {
        if (lambda < 0) throw ContractError("weight set: lambda must be nonnegative");
        eta_max_ = eta_.certificate.field_max;
        e2lm_ = std::exp(2.0 * lambda_ * eta_max_);
    }

    const Grid& grid() const { return grid_; }
    double lambda() const { return lambda_; }
    double eta_max() const { return eta_max_; }
    const EtaField& eta() const { return eta_; }
    const EllProfile& ell() const { return ell_; }

    double eta_at(const Vec3& p) const { return eta_.eval(p); }

    double phi_hat(double t) const {
        const double l = ell_.value(t);
        return 1.0 / std::pow(l, 8);
    }

    /// phi-hat^{m/2}(t) = ell^{-4m}
    double phi_hat_pow_half(double t, int m) const {
        return std::pow(ell_.value(t), -4.0 * m);
    }

    double phi(const Vec3& p, double t) const {
        return std::exp(lambda_ * eta_at(p)) / std::pow(ell_.value(t), 8);
    }

    double alpha(const Vec3& p, double t) const {
        return (std::exp(lambda_ * eta_at(p)) - e2lm_) / std::pow(ell_.value(t), 8);
    }

    /// Closed form: -8 ell' ell^{-9} (e^{lambda eta} - e^{2 lambda |eta|}).
    double dalpha_dt(const Vec3& p, double t) const {
        const double l = ell_.value(t);
        return -8.0 * ell_.deriv(t) * std::pow(l, -9.0) *
               (std::exp(lambda_ * eta_at(p)) - e2lm_);
    }

    /// |d_t alpha| / phi^2 through powers of ell, finite down to t = 0, T.
    double dalpha_over_phi_sq(const Vec3& p, double t) const {
        const double l = ell_.value(t);
        const double e = std::exp(lambda_ * eta_at(p));
        return 8.0 * std::abs(ell_.deriv(t)) * std::pow(l, 7.0) * (e2lm_ - e) / (e * e);
    }

    /// e^{2 s alpha}, computed in log space and flushed to zero below
    /// exponent -700; the t = 0, T limit is 0.
    double exp2salpha(const Vec3& p, double t, double s) const {
        const double l = ell_.value(t);
        if (l <= 0.0) return 0.0;
        const double expo = 2.0 * s * (std::exp(lambda_ * eta_at(p)) - e2lm_) / std::pow(l, 8);
        return expo < -700.0 ? 0.0 : std::exp(expo);
    }

    /// phi(p,t)^k e^{2 s alpha(p,t)} assembled in log space so the endpoint
    /// 0 * inf products never appear.
    double phi_pow_weight(const Vec3& p, double t, double s, int k) const {
        const double l = ell_.value(t);
        if (l <= 0.0) return 0.0;
        const double e = lambda_ * eta_at(p);
        const double expo =
            k * e - 8.0 * k * std::log(l) + 2.0 * s * (std::exp(e) - e2lm_) / std::pow(l, 8);
        if (expo < -700.0) return 0.0;
        if (expo > 700.0) throw NumericalError("weight evaluation overflow (phi^k e^{2s alpha})");
        return std::exp(expo);
    }

private:
    Grid grid_;
    double lambda_ = 1.0;
    EtaField eta_;
    EllProfile ell_;
    double eta_max_ = 0;
    double e2lm_ = 1.0;
};

inline WeightSet build_weight_set(const Grid& g, double lambda,
                                  WeightMethod method = WeightMethod::Analytic,
                                  double ell_peak = -1.0) {
    if (ell_peak <= 0.0) ell_peak = std::max(g.horizon() / 2.0, 1.0);
    return WeightSet(g, lambda, method, ell_peak);
}

/// Bundle of pointwise evaluators at a fixed Carleman parameter s.
struct WeightEvaluators {
    double s = 0;
    std::function<double(const Vec3&, double)> phi, alpha, dalpha_dt, exp2salpha;
    std::function<double(double)> phi_hat;
    std::function<double(const Vec3&, double, int)> phi_pow_weight; // phi^m e^{2s alpha}
};

inline WeightEvaluators eval_weights(const WeightSet& ws, double s) {
    if (s <= 0) throw ContractError("eval_weights: s must be positive");
    WeightEvaluators ev;
    ev.s = s;
    ev.phi = [&ws](const Vec3& p, double t) { return ws.phi(p, t); };
    ev.alpha = [&ws](const Vec3& p, double t) { return ws.alpha(p, t); };
    ev.dalpha_dt = [&ws](const Vec3& p, double t) { return ws.dalpha_dt(p, t); };
    ev.exp2salpha = [&ws, s](const Vec3& p, double t) { return ws.exp2salpha(p, t, s); };
    ev.phi_hat = [&ws](double t) { return ws.phi_hat(t); };
    ev.phi_pow_weight = [&ws, s](const Vec3& p, double t, int k) {
        return ws.phi_pow_weight(p, t, s, k);
    };
    return ev;
}

/// Tightest discrete constants in phi-hat/phi equivalence (2.8), scanned over
/// the node samples of eta: the ratio is e^{-lambda eta(x)}.
inline std::pair<double, double> check_weight_equivalence(const WeightSet& ws) {
    double eta_min = std::numeric_limits<double>::infinity();
    double eta_max = -std::numeric_limits<double>::infinity();
    for (double v : ws.eta().field.comp(0).v) {
        eta_min = std::min(eta_min, v);
        eta_max = std::max(eta_max, v);
    }
    const double c_low = std::exp(-ws.lambda() * eta_max);
    const double c_high = std::exp(-ws.lambda() * eta_min);
    if (!(std::isfinite(c_low) && std::isfinite(c_high) && c_low > 0 && c_high > 0))
        throw NumericalError("weight equivalence constants not finite/positive");
    return {c_low, c_high};
}

/// Fitted constant in |d_t alpha| <= C phi^2: the max of the closed-form
/// ratio over all space nodes and time nodes (finite including t = 0, T).
inline double check_dalpha_bound(const WeightSet& ws) {
    const Grid& g = ws.grid();
    // the ratio separates into a time factor and a space factor
    double time_factor = 0;
    for (int k = 0; k <= g.time_steps(); ++k) {
        const double t = g.time(k);
        time_factor = std::max(time_factor,
                               std::abs(ws.ell().deriv(t)) * std::pow(ws.ell().value(t), 7.0));
    }
    double space_factor = 0;
    const double e2lm = std::exp(2.0 * ws.lambda() * ws.eta_max());
    for (double v : ws.eta().field.comp(0).v) {
        const double e = std::exp(ws.lambda() * v);
        space_factor = std::max(space_factor, (e2lm - e) / (e * e));
    }
    const double c = 8.0 * time_factor * space_factor;
    if (!std::isfinite(c)) throw NumericalError("dalpha/phi^2 bound not finite");
    return c;
}

/// The stationary weight (2.4): psi > c0 inside, psi = c0 on the boundary,
/// gradient bounded away from zero outside omega; phi0 = e^{lambda psi}.
struct StationaryWeight {
    double c0 = 0, lambda = 1;
    Field psi;
    WeightCertificate certificate;
    std::function<double(const Vec3&)> psi_eval;

    double phi0(const Vec3& p) const { return std::exp(lambda * psi_eval(p)); }
    double psi_max() const { return c0 + certificate.field_max; }
};

inline StationaryWeight build_psi_phi0(const Grid& g, double c0, double lambda,
                                       WeightMethod method = WeightMethod::Analytic) {
    if (!g.omega_box()) throw ContractError("build_psi_phi0: omega subdomain not set");
    if (lambda < 0) throw ContractError("build_psi_phi0: lambda must be nonnegative");
    StationaryWeight sw;
    sw.c0 = c0;
    sw.lambda = lambda;
    if (method == WeightMethod::Analytic) {
        Field shape = Field::sample_scalar(g, Staggering::node(), [&](const Vec3& p) {
            return detail::product_of_sines(g, p);
        });
        sw.certificate = detail::certify_weight_field(
            g, shape.comp(0), g.omega_mask(), "omega", "analytic",
            [&](const Vec3& p) { return detail::product_of_sines_grad(g, p); });
        sw.psi = Field::sample_scalar(g, Staggering::node(), [&](const Vec3& p) {
            return c0 + detail::product_of_sines(g, p);
        });
        sw.psi_eval = [g, c0](const Vec3& p) { return c0 + detail::product_of_sines(g, p); };
    } else {
        Component rhs;
        rhs.stag = Staggering::node();
        rhs.n = g.lattice_sizes(rhs.stag);
        rhs.v.assign(g.lattice_count(rhs.stag), 1.0);
        Component shape;
        poisson_node_dirichlet(g, rhs, shape);
        sw.certificate =
            detail::certify_weight_field(g, shape, g.omega_mask(), "omega", "poisson", nullptr);
        sw.psi = Field::scalar(g, Staggering::node());
        sw.psi.comp(0) = shape;
        for (double& v : sw.psi.comp(0).v) v += c0;
        Component stored = sw.psi.comp(0);
        sw.psi_eval = [g, stored](const Vec3& p) {
            return detail::interp_node_at(g, stored, p);
        };
    }
    return sw;
}

} // namespace cnsf

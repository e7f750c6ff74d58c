#pragma once

#include <cmath>

#include "cnsf/operators.hpp"
#include "cnsf/quadrature.hpp"

namespace cnsf {

/// Which Sobolev norm to evaluate: H^{k_t}(0,T; X(region)) in space-time mode
/// or the purely spatial X(region) norm of a single-time snapshot.
struct NormSpec {
    int time_order = 0; // k_t in {0,1,2}
    enum class Space { L2, H1, H2 } space = Space::L2;
    enum class Where { Domain, Omega } region = Where::Domain;
    enum class Mode { SpaceTime, FixedT0 } mode = Mode::SpaceTime;

    void validate() const {
        if (time_order < 0 || time_order > 2)
            throw ContractError("norm spec: time regularity order must be 0, 1 or 2");
        if (mode == Mode::FixedT0 && time_order > 0)
            throw ContractError("norm spec: fixed-time mode forbids time derivatives");
    }

    Region spatial_region() const {
        return region == Where::Domain ? Region::all() : Region::omega();
    }
};

namespace detail {

/// Squared spatial norm of one snapshot: sum over every required derivative
/// multi-index (each taken once) of the squared quadrature on its lattice.
inline double spatial_norm_sq(const Field& f, const NormSpec& spec) {
    const Grid& g = f.grid();
    const Region reg = spec.spatial_region();
    double total = 0;
    for (int c = 0; c < f.components(); ++c) {
        const Component& u = f.comp(c);
        total += integrate(g, {&u, &u}, reg);
        if (spec.space == NormSpec::Space::L2) continue;
        for (int a = 0; a < g.dim(); ++a) {
            Component d = diff(g, u, a);
            total += integrate(g, {&d, &d}, reg);
            if (spec.space != NormSpec::Space::H2) continue;
            for (int b = a; b < g.dim(); ++b) {
                Component dd = diff(g, d, b);
                total += integrate(g, {&dd, &dd}, reg);
            }
        }
    }
    return total;
}

} // namespace detail

/// Spatial norm of one snapshot (fixed-time evaluation).
inline double sobolev_norm(const Field& f, const NormSpec& spec) {
    spec.validate();
    return std::sqrt(detail::spatial_norm_sq(f, spec));
}

/// Space-time norm H^{k_t}(0,T;X): time derivatives by central differences
/// (one-sided second order at the ends), trapezoid in time, stencils in space.
inline double sobolev_norm(const TimeSeriesField& u, const NormSpec& spec) {
    spec.validate();
    const Grid& g = u.grid();
    if (spec.mode == NormSpec::Mode::FixedT0) {
        const double t0 = g.t0();
        for (int k = 0; k < u.count(); ++k)
            if (std::abs(u.time(k) - t0) < 0.25 * u.dt())
                return sobolev_norm(u.snap(k), spec);
        throw ContractError("sobolev_norm: t0 is not a node of this time series");
    }
    if (u.count() < spec.time_order + 2)
        throw ContractError("sobolev_norm: too few snapshots for requested time derivatives");
    double total = 0;
    for (int j = 0; j <= spec.time_order; ++j) {
        const TimeSeriesField* series = &u;
        TimeSeriesField derived;
        if (j > 0) {
            derived = dt_series(u, j);
            series = &derived;
        }
        const int nt = series->count() - 1;
        for (int k = 0; k <= nt; ++k)
            total += time_weight(k, nt) * u.dt() * detail::spatial_norm_sq(series->snap(k), spec);
    }
    return std::sqrt(total);
}

} // namespace cnsf

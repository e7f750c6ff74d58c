#pragma once

#include <cmath>
#include <initializer_list>
#include <optional>
#include <vector>

#include "cnsf/field.hpp"

namespace cnsf {

/// Integration region: the whole closed domain, one of the named subdomains,
/// or an arbitrary box. Membership is tested at the sample coordinate.
struct Region {
    enum Kind { All, Omega, Omega0, InBox } kind = All;
    std::optional<Box> box;

    static Region all() { return {All, std::nullopt}; }
    static Region omega() { return {Omega, std::nullopt}; }
    static Region omega0() { return {Omega0, std::nullopt}; }
    static Region in_box(const Box& b) { return {InBox, b}; }

    const Box* resolve(const Grid& g) const {
        switch (kind) {
        case All: return nullptr;
        case Omega:
            if (!g.omega_box()) throw ContractError("integrate: omega subdomain not set on this grid");
            return &*g.omega_box();
        case Omega0:
            if (!g.omega0_box()) throw ContractError("integrate: omega0 subdomain not set on this grid");
            return &*g.omega0_box();
        case InBox: return &*box;
        }
        return nullptr;
    }
};

namespace detail {

/// Per-axis quadrature weight: trapezoid on offset-0 lattices (half weight at
/// the two end planes), midpoint on half-offset lattices.
inline double axis_weight(const Staggering& s, int axis, int i, int n) {
    if (s.half[axis]) return 1.0;
    return (i == 0 || i == n - 1) ? 0.5 : 1.0;
}

} // namespace detail

/// Composite quadrature of a pointwise product of same-lattice components,
/// optionally times a weight evaluated at the sample coordinate. Summation
/// runs in fixed axis-major order, so the result is bitwise deterministic.
template <class W>
double integrate(const Grid& g, std::initializer_list<const Component*> factors, Region region,
                 W&& weight) {
    if (factors.size() == 0) throw ContractError("integrate: no factors");
    const Component& c0 = **factors.begin();
    for (const Component* f : factors) {
        if (!(f->stag == c0.stag) || f->n != c0.n)
            throw ContractError("integrate: factors must share one lattice");
    }
    const Box* b = region.resolve(g);

    double cellvol = 1.0;
    for (int a = 0; a < g.dim(); ++a) cellvol *= g.spacing(a);

    double sum = 0.0;
    for (int k = 0; k < c0.n[2]; ++k)
        for (int j = 0; j < c0.n[1]; ++j)
            for (int i = 0; i < c0.n[0]; ++i) {
                const Vec3 p = g.point(c0.stag, i, j, k);
                if (b && !b->contains(p, g.dim())) continue;
                double w = detail::axis_weight(c0.stag, 0, i, c0.n[0]) *
                           detail::axis_weight(c0.stag, 1, j, c0.n[1]);
                if (g.dim() == 3) w *= detail::axis_weight(c0.stag, 2, k, c0.n[2]);
                double val = 1.0;
                const std::size_t idx = c0.idx(i, j, k);
                for (const Component* f : factors) val *= f->v[idx];
                val *= weight(p);
                if (!std::isfinite(val))
                    throw NumericalError("integrate: non-finite integrand sample");
                sum += w * val;
            }
    return sum * cellvol;
}

inline double integrate(const Grid& g, std::initializer_list<const Component*> factors,
                        Region region = Region::all()) {
    return integrate(g, factors, region, [](const Vec3&) { return 1.0; });
}

/// Scalar field over a region.
inline double integrate(const Field& f, Region region = Region::all()) {
    if (f.rank() != Rank::Scalar) throw ContractError("integrate: scalar field expected");
    return integrate(f.grid(), {&f.comp(0)}, region);
}

/// Sum over components of the weighted integral of the squared component.
template <class W>
double integrate_sq(const Field& f, Region region, W&& weight) {
    double s = 0;
    for (int c = 0; c < f.components(); ++c)
        s += integrate(f.grid(), {&f.comp(c), &f.comp(c)}, region, weight);
    return s;
}

inline double integrate_sq(const Field& f, Region region = Region::all()) {
    return integrate_sq(f, region, [](const Vec3&) { return 1.0; });
}

/// Trapezoid weights for the uniform time axis (k = 0..nt).
inline double time_weight(int k, int nt) { return (k == 0 || k == nt) ? 0.5 : 1.0; }

} // namespace cnsf

#pragma once

// Weighted Lebesgue, mixed, and Bessel-potential norms on grids.
//
// Quadrature: left rule in time (fields are sampled, not interpolated, in t —
// the same convention the solver uses) and midpoint in space. Weights are
// averaged exactly over any cell touching their singularity, so power weights
// at the origin integrate correctly instead of hitting the pole. p = 2 terms
// go through squared moduli and sqrt, which makes the norm exactly homogeneous
// under power-of-two rescaling of the field.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <string>

#include "errors.hpp"
#include "fields.hpp"
#include "grid.hpp"
#include "report.hpp"
#include "solver.hpp"
#include "weights.hpp"

namespace parapsi {

enum class NormFlavor { lp_spacetime, mixed, bessel };

inline std::string to_string(NormFlavor f) {
    switch (f) {
        case NormFlavor::lp_spacetime: return "lp_spacetime";
        case NormFlavor::mixed: return "mixed";
        case NormFlavor::bessel: return "bessel";
    }
    return "?";
}

inline NormFlavor norm_flavor_from_string(const std::string& s) {
    if (s == "lp_spacetime") return NormFlavor::lp_spacetime;
    if (s == "mixed") return NormFlavor::mixed;
    if (s == "bessel") return NormFlavor::bessel;
    throw input_error("unknown norm flavor: " + s);
}

struct NormSpec {
    NormFlavor flavor = NormFlavor::lp_spacetime;
    double p = 2.0;
    double q = 2.0;    // mixed: outer (time) exponent
    double nu = 0.0;   // bessel order
    WeightSpec w;      // lp_spacetime / bessel weight
    WeightSpec w1;     // mixed: time weight on R
    WeightSpec w2;     // mixed: space weight on R^d
};

namespace detail {

// which coordinates a weight consumes when used inside a norm on a d-dim grid
enum class WeightDomain { none, spatial, temporal, spacetime };

inline WeightDomain weight_domain(const WeightSpec& w, int d) {
    switch (w.kind) {
        case WeightKind::constant:
            return WeightDomain::none;
        case WeightKind::power_space:
            if (w.dim != d) throw input_error("norm: spatial weight dim mismatch");
            return WeightDomain::spatial;
        case WeightKind::power_time:
            if (w.dim != 1) throw input_error("norm: time weight must have dim 1");
            return WeightDomain::temporal;
        case WeightKind::spacetime_power:
        case WeightKind::product_power:
            if (w.dim != d + 1) throw input_error("norm: spacetime weight dim mismatch");
            return WeightDomain::spacetime;
        case WeightKind::tabulated:
            if (w.dim == d) return WeightDomain::spatial;
            if (w.dim == d + 1) return WeightDomain::spacetime;
            throw input_error("norm: tabulated weight dim mismatch");
    }
    throw input_error("norm: bad weight kind");
}

inline void check_integrable(const WeightSpec& w) {
    w.validate();
    switch (w.kind) {
        case WeightKind::power_space:
        case WeightKind::spacetime_power:
            if (w.alpha <= -w.dim) throw input_error("norm: weight not locally integrable");
            break;
        case WeightKind::power_time:
            if (w.alpha1 <= -1.0) throw input_error("norm: weight not locally integrable");
            break;
        case WeightKind::product_power:
            if (w.alpha1 <= -1.0 || w.alpha2 <= -(w.dim - 1))
                throw input_error("norm: weight not locally integrable");
            break;
        default:
            break;
    }
}

// cell-averaged weight at time-cell center tc and space cell js
inline double norm_cell_weight(const WeightSpec& w, WeightDomain dom, const SpacetimeGrid& g,
                               double tc, int js) {
    const double hx = g.dx() / 2.0;
    const double ht = g.dt() / 2.0;
    std::array<double, 3> c{0.0, 0.0, 0.0}, h{hx, hx, hx};
    switch (dom) {
        case WeightDomain::none:
            return w.scale;
        case WeightDomain::spatial: {
            const auto x = g.point(js);
            for (int i = 0; i < g.d; ++i) c[i] = x[i];
            break;
        }
        case WeightDomain::temporal:
            c[0] = tc;
            h[0] = ht;
            break;
        case WeightDomain::spacetime: {
            const auto x = g.point(js);
            c[0] = tc;
            h[0] = ht;
            for (int i = 0; i < g.d; ++i) c[1 + i] = x[i];
            break;
        }
    }
    return cell_weight(w, c, h);
}

inline double p_power(const cplx& z, double p) {
    if (p == 2.0) return std::norm(z);
    return std::pow(std::abs(z), p);
}

inline double p_root(double v, double p) {
    if (p == 2.0) return std::sqrt(v);
    return std::pow(v, 1.0 / p);
}

}  // namespace detail

inline double weighted_norm(const Field& f0, const NormSpec& spec) {
    if (!(spec.p > 1.0)) throw input_error("norm: p must exceed 1");
    const Field* fp = &f0;
    Field lifted;
    if (spec.flavor == NormFlavor::bessel && spec.nu != 0.0) {
        lifted = bessel_potential(f0, spec.nu);
        fp = &lifted;
    }
    const Field& f = *fp;
    const SpacetimeGrid& g = f.grid;
    const bool st = (f.layout == FieldLayout::spacetime);
    const int S = g.space_size();
    const double cellx = std::pow(g.dx(), g.d);
    const int nt = st ? g.Nt : 1;

    if (spec.flavor == NormFlavor::mixed) {
        if (!(spec.q > 1.0)) throw input_error("norm: q must exceed 1");
        if (!st) throw input_error("norm: mixed flavor needs a spacetime field");
        detail::check_integrable(spec.w1);
        detail::check_integrable(spec.w2);
        const auto dom1 = detail::weight_domain(spec.w1, 0);  // weight on R: "time" axis
        const auto dom2 = detail::weight_domain(spec.w2, g.d);
        if (dom1 == detail::WeightDomain::spacetime || dom2 == detail::WeightDomain::spacetime ||
            dom2 == detail::WeightDomain::temporal)
            throw input_error("norm: mixed flavor needs a time weight and a space weight");
        double total = 0.0;
        for (int i = 0; i < nt; ++i) {
            const double tc = g.time(i) + g.dt() / 2.0;
            const cplx* slice = f.slice(i);
            double inner = 0.0;
            for (int js = 0; js < S; ++js)
                inner += detail::p_power(slice[js], spec.p) *
                         detail::norm_cell_weight(spec.w2, dom2, g, tc, js);
            inner *= cellx;
            const double w1v = detail::norm_cell_weight(spec.w1, dom1 == detail::WeightDomain::none
                                                                     ? detail::WeightDomain::none
                                                                     : detail::WeightDomain::temporal,
                                                        g, tc, 0);
            const double lift = (spec.q == spec.p) ? inner : std::pow(inner, spec.q / spec.p);
            total += lift * w1v * g.dt();
        }
        return detail::p_root(total, spec.q);
    }

    detail::check_integrable(spec.w);
    auto dom = detail::weight_domain(spec.w, g.d);
    if (!st && (dom == detail::WeightDomain::spacetime || dom == detail::WeightDomain::temporal))
        throw input_error("norm: slice field cannot carry a time-dependent weight");
    double total = 0.0;
    for (int i = 0; i < nt; ++i) {
        const double tc = st ? g.time(i) + g.dt() / 2.0 : 0.0;
        const cplx* slice = f.slice(st ? i : 0);
        double acc = 0.0;
        for (int js = 0; js < S; ++js)
            acc +=
                detail::p_power(slice[js], spec.p) * detail::norm_cell_weight(spec.w, dom, g, tc, js);
        acc *= cellx;
        total += st ? acc * g.dt() : acc;
    }
    return detail::p_root(total, spec.p);
}

// r(f) = ||(1-Delta)^{nu/2} f|| / (||f|| + ||(-Delta)^{nu/2} f||) over a seeded
// band-limited family; the two norms are equivalent iff r stays in a fixed
// band, so the report tracks min, max, and drift under one spatial refinement.
inline EstimateReport norm_equivalence_check(const SpacetimeGrid& grid, double p, double nu,
                                             const WeightSpec& w, int n_fields, std::uint64_t seed,
                                             double ratio_cap = 10.0, double stability_tol = 0.25) {
    if (n_fields < 2) throw input_error("norm equivalence: need at least two fields");
    EstimateReport rep;
    rep.scenario = "norm_equivalence";
    rep.seed = seed;
    rep.grid_desc = grid_describe(grid);

    NormSpec plain;
    plain.flavor = NormFlavor::lp_spacetime;
    plain.p = p;
    plain.w = w;
    NormSpec bess = plain;
    bess.flavor = NormFlavor::bessel;
    bess.nu = nu;

    auto run = [&](const SpacetimeGrid& g, const std::string& tag, double& rmin, double& rmax) {
        Rng rng(seed);
        rmin = std::numeric_limits<double>::infinity();
        rmax = 0.0;
        for (int i = 0; i < n_fields; ++i) {
            const ModeSum ms = random_mode_sum(grid, rng, 6, grid.N / 8, 2.0);
            const Field f = ms.realize(g);
            const double num = weighted_norm(f, bess);
            const double den =
                weighted_norm(f, plain) + weighted_norm(fractional_laplacian(f, nu), plain);
            const double r = num / den;
            rmin = std::min(rmin, r);
            rmax = std::max(rmax, r);
            ReportRow row;
            row.case_id = "norms.equivalence.ratio";
            row.inputs = tag + " field=" + std::to_string(i) + " nu=" + detail::fmt_double(nu) +
                         " p=" + detail::fmt_double(p);
            row.measured = r;
            row.verdict = (r > 0.0 && r <= 1.0 + 1e-9) ? "info" : "fail";
            rep.add(row);
        }
    };

    double cmin, cmax, fmin, fmax;
    run(grid, "grid=base", cmin, cmax);
    SpacetimeGrid fine = grid;
    fine.N *= 2;
    run(fine, "grid=refined", fmin, fmax);

    ReportRow band;
    band.case_id = "norms.equivalence.band";
    band.inputs = "nu=" + detail::fmt_double(nu) + " p=" + detail::fmt_double(p);
    band.measured = cmax / cmin;
    band.theory = ratio_cap;
    band.verdict = (std::isfinite(band.measured) && band.measured <= ratio_cap) ? "pass" : "fail";
    rep.add(band);

    ReportRow drift;
    drift.case_id = "norms.equivalence.refinement_drift";
    drift.inputs = band.inputs;
    drift.measured = std::abs(fmax - cmax) / cmax;
    drift.theory = stability_tol;
    drift.verdict = drift.measured <= stability_tol ? "pass" : "fail";
    rep.add(drift);
    return rep;
}

}  // namespace parapsi

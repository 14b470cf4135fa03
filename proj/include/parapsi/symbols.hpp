#pragma once

// Symbol families psi(t, xi) for the generator psi(t, -i grad): measurable (here
// piecewise constant) in t, smooth in xi away from the origin, elliptic of order
// gamma. Every family factors as psi(t, xi) = c(t) * base(xi) with a scalar
// coefficient track c and a homogeneous xi-factor, which the kernel and solver
// modules exploit: time integrals are computed on the scalar first, so modulated
// slices reparameterize exactly onto constant-coefficient ones.
//
//   fractional_laplacian   psi = -|xi|^gamma
//   time_modulated         psi = -a(t) |xi|^gamma,            a piecewise const > 0
//   anisotropic_power      psi = -(sum_i c_i xi_i^2)^{gamma/2}, c_i > 0
//   complex_shift          psi = -(1 + i b(t)) |xi|^gamma
//
// Derivatives in xi are exact: D^alpha of Q(xi)^e is expanded by a small term
// calculus (coef * xi^beta * Q^e rewriting), not finite differences.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "errors.hpp"
#include "rng.hpp"

namespace parapsi {

using cplx = std::complex<double>;
using json = nlohmann::json;

enum class SymbolKind { fractional_laplacian, time_modulated, anisotropic_power, complex_shift };

inline std::string to_string(SymbolKind k) {
    switch (k) {
        case SymbolKind::fractional_laplacian: return "fractional_laplacian";
        case SymbolKind::time_modulated: return "time_modulated";
        case SymbolKind::anisotropic_power: return "anisotropic_power";
        case SymbolKind::complex_shift: return "complex_shift";
    }
    throw input_error("unknown symbol kind");
}

inline SymbolKind symbol_kind_from_string(const std::string& s) {
    if (s == "fractional_laplacian") return SymbolKind::fractional_laplacian;
    if (s == "time_modulated") return SymbolKind::time_modulated;
    if (s == "anisotropic_power") return SymbolKind::anisotropic_power;
    if (s == "complex_shift") return SymbolKind::complex_shift;
    throw input_error("unknown symbol kind: " + s);
}

// Right-continuous step function on [0, T]: value_at(t) = values[k] for
// t in [breakpoints[k], breakpoints[k+1]), and the last value at t = T.
struct PiecewiseConstantTrack {
    std::vector<double> breakpoints;  // strictly increasing, first 0, last T
    std::vector<double> values;       // one per interval

    void validate() const {
        if (breakpoints.size() < 2) throw input_error("track: need at least two breakpoints");
        if (breakpoints.front() != 0.0) throw input_error("track: first breakpoint must be 0");
        for (std::size_t i = 1; i < breakpoints.size(); ++i)
            if (!(breakpoints[i] > breakpoints[i - 1]))
                throw input_error("track: breakpoints must increase strictly");
        if (values.size() + 1 != breakpoints.size())
            throw input_error("track: values/breakpoints size mismatch");
    }

    double horizon() const { return breakpoints.back(); }
    int intervals() const { return static_cast<int>(values.size()); }

    double value_at(double t) const {
        if (t < breakpoints.front() || t > breakpoints.back())
            throw input_error("track: t outside [0, T]");
        int lo = 0, hi = intervals() - 1;
        while (lo < hi) {
            const int mid = (lo + hi + 1) / 2;
            if (breakpoints[mid] <= t)
                lo = mid;
            else
                hi = mid - 1;
        }
        return values[lo];
    }

    // Exact integral of the step function over [s, t] (s <= t).
    double integral(double s, double t) const {
        if (s > t) throw input_error("track: integral needs s <= t");
        if (s < breakpoints.front() || t > breakpoints.back())
            throw input_error("track: integral range outside [0, T]");
        double acc = 0.0;
        for (int k = 0; k < intervals(); ++k) {
            const double a = std::max(s, breakpoints[k]);
            const double b = std::min(t, breakpoints[k + 1]);
            if (b > a) acc += values[k] * (b - a);
        }
        return acc;
    }

    static PiecewiseConstantTrack constant(double T, double value) {
        return {{0.0, T}, {value}};
    }

    // Seeded track: n equal intervals on [0, T] with values uniform in [lo, hi].
    static PiecewiseConstantTrack seeded(std::uint64_t seed, double T, int n, double lo, double hi) {
        if (n < 1 || T <= 0) throw input_error("track: bad seeded parameters");
        Rng rng(seed);
        PiecewiseConstantTrack tr;
        tr.breakpoints.resize(n + 1);
        for (int i = 0; i <= n; ++i) tr.breakpoints[i] = T * i / n;
        tr.values.resize(n);
        for (int i = 0; i < n; ++i) tr.values[i] = rng.uniform(lo, hi);
        return tr;
    }
};

struct Symbol {
    SymbolKind kind = SymbolKind::fractional_laplacian;
    double gamma = 2.0;
    PiecewiseConstantTrack track;               // a(t) or b(t); {1} track otherwise
    std::vector<double> direction_weights;      // anisotropic_power only
    int max_derivative_order = 8;

    void validate() const {
        if (!(gamma > 0.0)) throw input_error("symbol: gamma must be positive");
        track.validate();
        if (kind == SymbolKind::time_modulated) {
            for (double v : track.values)
                if (!(v > 0.0)) throw input_error("symbol: modulation a(t) must stay positive");
        }
        if (kind == SymbolKind::anisotropic_power) {
            if (direction_weights.empty())
                throw input_error("symbol: anisotropic_power needs direction weights");
            for (double c : direction_weights)
                if (!(c > 0.0)) throw input_error("symbol: direction weights must be positive");
        }
    }

    double horizon() const { return track.horizon(); }

    // Ellipticity constant implied by construction: Re[-psi] >= kappa |xi|^gamma.
    double kappa() const {
        switch (kind) {
            case SymbolKind::fractional_laplacian:
            case SymbolKind::complex_shift:
                return 1.0;
            case SymbolKind::time_modulated: {
                double m = track.values.front();
                for (double v : track.values) m = std::min(m, v);
                return m;
            }
            case SymbolKind::anisotropic_power: {
                double m = direction_weights.front();
                for (double c : direction_weights) m = std::min(m, c);
                return std::pow(m, gamma / 2.0);
            }
        }
        return 0.0;
    }

    int dim_hint() const {
        return kind == SymbolKind::anisotropic_power ? static_cast<int>(direction_weights.size()) : 0;
    }

    // Per-axis quadratic-form weights of base(xi) = -(sum c_i xi_i^2)^{gamma/2}.
    double form_weight(int axis) const {
        if (kind == SymbolKind::anisotropic_power) {
            if (axis >= static_cast<int>(direction_weights.size()))
                throw input_error("symbol: axis beyond direction weights");
            return direction_weights[axis];
        }
        return 1.0;
    }

    // Scalar time coefficient c(t) with psi = c(t) * base(xi).
    cplx coefficient(double t) const {
        switch (kind) {
            case SymbolKind::fractional_laplacian:
            case SymbolKind::anisotropic_power:
                return {1.0, 0.0};
            case SymbolKind::time_modulated:
                return {track.value_at(t), 0.0};
            case SymbolKind::complex_shift:
                return {1.0, track.value_at(t)};
        }
        return {};
    }

    // Exact integral of c over [s, t].
    cplx coefficient_integral(double s, double t) const {
        switch (kind) {
            case SymbolKind::fractional_laplacian:
            case SymbolKind::anisotropic_power:
                return {t - s, 0.0};
            case SymbolKind::time_modulated:
                return {track.integral(s, t), 0.0};
            case SymbolKind::complex_shift:
                return {t - s, track.integral(s, t)};
        }
        return {};
    }

    double form(const std::array<double, 2>& xi, int d) const {
        double q = 0.0;
        for (int i = 0; i < d; ++i) q += form_weight(i) * xi[i] * xi[i];
        return q;
    }

    // base(xi) = -Q(xi)^{gamma/2}, real
    double base(const std::array<double, 2>& xi, int d) const {
        return -std::pow(form(xi, d), gamma / 2.0);
    }

    cplx eval(double t, const std::array<double, 2>& xi, int d) const {
        return coefficient(t) * base(xi, d);
    }

    cplx eval(double t, double xi) const { return eval(t, {xi, 0.0}, 1); }
};

namespace detail {

// One summand coef * xi^pow * Q(xi)^qexp of a derivative of Q^{gamma/2},
// Q(xi) = sum_i c_i xi_i^2.
struct FormTerm {
    double coef;
    std::array<int, 2> pow;
    double qexp;
};

inline std::vector<FormTerm> differentiate(const std::vector<FormTerm>& terms, int axis,
                                           const Symbol& sym) {
    std::vector<FormTerm> out;
    out.reserve(terms.size() * 2);
    for (const auto& t : terms) {
        if (t.pow[axis] > 0) {
            FormTerm a = t;
            a.coef *= t.pow[axis];
            a.pow[axis] -= 1;
            if (a.coef != 0.0) out.push_back(a);
        }
        if (t.qexp != 0.0) {
            FormTerm b = t;
            b.coef *= 2.0 * t.qexp * sym.form_weight(axis);
            b.pow[axis] += 1;
            b.qexp -= 1.0;
            if (b.coef != 0.0) out.push_back(b);
        }
    }
    return out;
}

inline double eval_terms(const std::vector<FormTerm>& terms, const Symbol& sym,
                         const std::array<double, 2>& xi, int d) {
    const double q = sym.form(xi, d);
    if (q == 0.0) {
        // all terms share homogeneity gamma - |alpha|
        double acc = 0.0;
        for (const auto& t : terms) {
            const int psum = t.pow[0] + t.pow[1];
            if (psum == 0 && t.qexp == 0.0) {
                acc += t.coef;
            } else if (t.qexp < 0.0 || (psum + 2.0 * t.qexp) <= 0.0) {
                throw domain_error("symbol derivative singular at xi = 0");
            }
            // positive homogeneity: the term vanishes at 0
        }
        return acc;
    }
    double acc = 0.0;
    for (const auto& t : terms) {
        double v = t.coef;
        for (int i = 0; i < d; ++i)
            for (int p = 0; p < t.pow[i]; ++p) v *= xi[i];
        if (t.qexp != 0.0) v *= std::pow(q, t.qexp);
        acc += v;
    }
    return acc;
}

}  // namespace detail

// D^alpha_xi psi(t, xi), exact. alpha beyond max_derivative_order is refused;
// singular evaluations at xi = 0 throw domain_error.
inline cplx eval_derivative(const Symbol& sym, double t, const std::array<double, 2>& xi, int d,
                            const std::array<int, 2>& alpha) {
    const int order = alpha[0] + alpha[1];
    if (order > sym.max_derivative_order)
        throw capability_error("symbol: derivative order beyond analytic table");
    if (d < 1 || d > 2) throw capability_error("symbol: d must be 1 or 2");
    if (d == 1 && alpha[1] != 0) throw input_error("symbol: alpha has too many axes");
    std::vector<detail::FormTerm> terms{{-1.0, {0, 0}, sym.gamma / 2.0}};
    for (int axis = 0; axis < 2; ++axis)
        for (int k = 0; k < alpha[axis]; ++k) terms = detail::differentiate(terms, axis, sym);
    return sym.coefficient(t) * detail::eval_terms(terms, sym, xi, d);
}

// Deterministic sampling plan shared by the certification estimates.
struct SamplePlan {
    double xi_min = 1e-2;
    double xi_max = 1e2;
    int n_radii = 33;        // log-spaced, >= 4 per decade over the default span
    int n_directions = 16;   // d=1 collapses to {+1,-1}
    int min_time_samples = 8;

    std::vector<double> radii() const {
        std::vector<double> r(n_radii);
        for (int i = 0; i < n_radii; ++i)
            r[i] = xi_min * std::pow(xi_max / xi_min, n_radii == 1 ? 0.0 : double(i) / (n_radii - 1));
        return r;
    }

    std::vector<std::array<double, 2>> directions(int d) const {
        std::vector<std::array<double, 2>> out;
        if (d == 1) {
            out.push_back({1.0, 0.0});
            out.push_back({-1.0, 0.0});
        } else {
            for (int i = 0; i < n_directions; ++i) {
                const double th = 2.0 * std::numbers::pi * i / n_directions;
                out.push_back({std::cos(th), std::sin(th)});
            }
        }
        return out;
    }

    // Midpoints of the track intervals, refined until at least min_time_samples.
    std::vector<double> times(const PiecewiseConstantTrack& tr) const {
        int split = 1;
        while (split * tr.intervals() < min_time_samples) split *= 2;
        std::vector<double> out;
        for (int k = 0; k < tr.intervals(); ++k) {
            const double a = tr.breakpoints[k], b = tr.breakpoints[k + 1];
            for (int j = 0; j < split; ++j) out.push_back(a + (b - a) * (2 * j + 1) / (2.0 * split));
        }
        return out;
    }
};

// Sampled ellipticity margin: min over the plan of Re[-psi(t, xi)] / |xi|^gamma.
// Non-positive values mean "rejected"; callers decide, nothing throws here.
inline double ellipticity_margin(const Symbol& sym, int d, const SamplePlan& plan = {}) {
    sym.validate();
    double kappa_hat = std::numeric_limits<double>::infinity();
    const auto radii = plan.radii();
    const auto dirs = plan.directions(d);
    const auto times = plan.times(sym.track);
    for (double t : times) {
        for (double r : radii) {
            for (const auto& u : dirs) {
                const std::array<double, 2> xi{r * u[0], r * u[1]};
                const double denom = std::pow(r, sym.gamma);
                const double num = -sym.eval(t, xi, d).real();
                kappa_hat = std::min(kappa_hat, num / denom);
            }
        }
    }
    return kappa_hat;
}

// Sampled n-th order regular-upper-bound constant:
// max over |alpha| <= n of |D^alpha psi| * |xi|^{|alpha| - gamma}.
inline double regular_upper_bound(const Symbol& sym, int n, int d, const SamplePlan& plan = {}) {
    sym.validate();
    if (n > sym.max_derivative_order)
        throw capability_error("regular_upper_bound: order beyond analytic table");
    double m_hat = 0.0;
    const auto radii = plan.radii();
    const auto dirs = plan.directions(d);
    const auto times = plan.times(sym.track);
    for (int order = 0; order <= n; ++order) {
        for (int a0 = 0; a0 <= order; ++a0) {
            const std::array<int, 2> alpha{a0, order - a0};
            if (d == 1 && alpha[1] != 0) continue;
            for (double t : times) {
                for (double r : radii) {
                    for (const auto& u : dirs) {
                        const std::array<double, 2> xi{r * u[0], r * u[1]};
                        const double v = std::abs(eval_derivative(sym, t, xi, d, alpha));
                        m_hat = std::max(m_hat, v * std::pow(r, order - sym.gamma));
                    }
                }
            }
        }
    }
    return m_hat;
}

// --- JSON (schema: {kind, gamma, track: {breakpoints, values}, weights?, seed?}) ---

inline json to_json(const PiecewiseConstantTrack& tr) {
    return json{{"breakpoints", tr.breakpoints}, {"values", tr.values}};
}

inline PiecewiseConstantTrack track_from_json(const json& j) {
    PiecewiseConstantTrack tr;
    tr.breakpoints = j.at("breakpoints").get<std::vector<double>>();
    tr.values = j.at("values").get<std::vector<double>>();
    tr.validate();
    return tr;
}

inline json to_json(const Symbol& sym) {
    json j{{"kind", to_string(sym.kind)}, {"gamma", sym.gamma}, {"track", to_json(sym.track)}};
    if (sym.kind == SymbolKind::anisotropic_power) j["weights"] = sym.direction_weights;
    return j;
}

// `T` is the experiment horizon; a missing track defaults to the unit coefficient
// on [0, T], and `seed` (with optional `track_intervals`, `track_range`) generates one.
inline Symbol symbol_from_json(const json& j, double T) {
    Symbol sym;
    sym.kind = symbol_kind_from_string(j.value("kind", std::string("fractional_laplacian")));
    sym.gamma = j.value("gamma", 2.0);
    if (j.contains("weights")) sym.direction_weights = j["weights"].get<std::vector<double>>();
    if (j.contains("track")) {
        sym.track = track_from_json(j["track"]);
    } else if (j.contains("seed")) {
        const int n = j.value("track_intervals", 8);
        double lo = 0.5, hi = 2.0;
        if (j.contains("track_range")) {
            lo = j["track_range"].at(0).get<double>();
            hi = j["track_range"].at(1).get<double>();
        }
        sym.track = PiecewiseConstantTrack::seeded(j["seed"].get<std::uint64_t>(), T, n, lo, hi);
    } else {
        sym.track = PiecewiseConstantTrack::constant(T, 1.0);
    }
    sym.validate();
    return sym;
}

}  // namespace parapsi

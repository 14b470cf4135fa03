#pragma once

// Seeded test-signal generators. A ModeSum is an analytic spacetime function
// (trigonometric in x on the torus, slowly oscillating in t, optionally
// localized by a Gaussian envelope), so the same draw can be realized on any
// grid sharing the half-period L: refining the grid resamples the identical
// function instead of drawing a new one.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "errors.hpp"
#include "grid.hpp"
#include "rng.hpp"

namespace parapsi {

struct FieldMode {
    double amp = 1.0;
    std::array<double, 2> xi{0.0, 0.0};
    double phase = 0.0;
    double omega = 0.0;  // temporal angular frequency
};

struct ModeSum {
    std::vector<FieldMode> modes;
    double envelope_sigma = 0.0;  // > 0: multiply by exp(-|x|^2 / sigma^2)

    double eval(double t, const std::array<double, 2>& x, int d) const {
        double v = 0.0;
        for (const auto& m : modes) {
            double ph = m.phase - m.omega * t;
            for (int i = 0; i < d; ++i) ph += m.xi[i] * x[i];
            v += m.amp * std::cos(ph);
        }
        if (envelope_sigma > 0.0) {
            double r2 = 0.0;
            for (int i = 0; i < d; ++i) r2 += x[i] * x[i];
            v *= std::exp(-r2 / (envelope_sigma * envelope_sigma));
        }
        return v;
    }

    Field realize(const SpacetimeGrid& grid, FieldLayout layout = FieldLayout::spacetime) const {
        Field f = Field::zeros(grid, layout);
        const int S = grid.space_size();
        for (int i = 0; i < f.slices(); ++i) {
            const double t = layout == FieldLayout::spacetime ? grid.time(i) : 0.0;
            cplx* slice = f.values.data() + static_cast<std::size_t>(i) * S;
            for (int js = 0; js < S; ++js)
                slice[js] = cplx{eval(t, grid.point(js), grid.d), 0.0};
        }
        return f;
    }
};

// n_modes random torus modes with |k_i| <= max_mode, amplitudes in [0.25, 1],
// temporal frequencies in [0, max_omega]
inline ModeSum random_mode_sum(const SpacetimeGrid& base, Rng& rng, int n_modes, int max_mode,
                               double max_omega, double envelope_sigma = 0.0) {
    if (max_mode >= base.N / 2) throw input_error("mode sum: max_mode must stay below Nyquist");
    ModeSum ms;
    ms.envelope_sigma = envelope_sigma;
    for (int m = 0; m < n_modes; ++m) {
        FieldMode fm;
        for (int i = 0; i < base.d; ++i) {
            const int k = rng.uniform_int(-max_mode, max_mode);
            fm.xi[i] = k * std::numbers::pi / base.L;
        }
        fm.amp = rng.uniform(0.25, 1.0) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
        fm.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
        fm.omega = max_omega > 0.0 ? rng.uniform(0.0, max_omega) : 0.0;
        ms.modes.push_back(fm);
    }
    return ms;
}

// single spatial tone with a slow raised-cosine envelope in time; mean-one in
// time so the truncated Duhamel window integrates it coherently
inline ModeSum probe_mode(const SpacetimeGrid& base, const std::array<int, 2>& k, double omega) {
    ModeSum ms;
    FieldMode carrier;
    for (int i = 0; i < base.d; ++i) carrier.xi[i] = k[i] * std::numbers::pi / base.L;
    carrier.amp = 1.0;
    carrier.omega = 0.0;
    ms.modes.push_back(carrier);
    if (omega > 0.0) {
        FieldMode wobble = carrier;
        wobble.amp = 0.5;
        wobble.omega = omega;
        ms.modes.push_back(wobble);
    }
    return ms;
}

// complex exponential e^{i xi x} on one slice (eigenfunction probes)
inline Field complex_mode_slice(const SpacetimeGrid& grid, const std::array<int, 2>& k) {
    Field f = Field::zeros(grid, FieldLayout::slice);
    std::array<double, 2> xi{0.0, 0.0};
    for (int i = 0; i < grid.d; ++i) xi[i] = k[i] * std::numbers::pi / grid.L;
    for (int js = 0; js < grid.space_size(); ++js) {
        const auto x = grid.point(js);
        double ph = 0.0;
        for (int i = 0; i < grid.d; ++i) ph += xi[i] * x[i];
        f.values[js] = std::polar(1.0, ph);
    }
    return f;
}

}  // namespace parapsi

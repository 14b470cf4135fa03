#pragma once

// Discretization of (0,T) x [-L,L)^d: uniform time steps and a periodic spatial
// grid whose dual frequencies are xi in (pi/L) * {-N/2, ..., N/2 - 1}^d.
//
// Conventions used by every module:
//   * spatial points     x_j = -L + j*dx,  dx = 2L/N, j = 0..N-1 per axis
//   * frequencies        xi_k = (pi/L)*k~, k~ = k for k < N/2, k - N otherwise
//   * time samples       t_i = i*dt, dt = T/Nt, i = 0..Nt  (Nt steps, Nt+1 samples)
//   * spacetime fields   row-major over (time, space), space row-major over axes

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "errors.hpp"
#include "fft.hpp"

namespace parapsi {

struct SpacetimeGrid {
    int d = 1;        // spatial dimension, 1 or 2
    double L = 32.0;  // half-width of the torus
    int N = 1024;     // points per spatial axis, power of two
    double T = 1.0;   // time horizon
    int Nt = 256;     // time steps

    double dx() const { return 2.0 * L / N; }
    double dt() const { return T / Nt; }
    int space_size() const { return d == 1 ? N : N * N; }
    int time_points() const { return Nt + 1; }
    double time(int i) const { return i * dt(); }
    double coord(int j) const { return -L + j * dx(); }

    double freq1(int k) const {
        const int kk = (k < N / 2) ? k : k - N;
        return (std::numbers::pi / L) * kk;
    }

    // frequency vector of the flattened spatial index
    std::array<double, 2> freq(int js) const {
        if (d == 1) return {freq1(js), 0.0};
        return {freq1(js / N), freq1(js % N)};
    }

    std::array<double, 2> point(int js) const {
        if (d == 1) return {coord(js), 0.0};
        return {coord(js / N), coord(js % N)};
    }

    double freq_abs(int js) const {
        const auto xi = freq(js);
        return std::hypot(xi[0], xi[1]);
    }

    double point_abs(int js) const {
        const auto x = point(js);
        return std::hypot(x[0], x[1]);
    }

    // largest |xi| on the grid (attained at the corner k = -N/2 per axis)
    double freq_max() const {
        const double ax = std::numbers::pi / L * (N / 2);
        return d == 1 ? ax : std::hypot(ax, ax);
    }

    void validate() const {
        if (d != 1 && d != 2) throw capability_error("grid: d must be 1 or 2");
        if (!is_pow2(static_cast<std::size_t>(N))) throw input_error("grid: N must be a power of two");
        if (L <= 0 || T <= 0 || Nt <= 0) throw input_error("grid: L, T, Nt must be positive");
    }

    bool same_mesh(const SpacetimeGrid& o) const {
        return d == o.d && L == o.L && N == o.N && T == o.T && Nt == o.Nt;
    }
};

inline std::string grid_describe(const SpacetimeGrid& g) {
    return "d=" + std::to_string(g.d) + " N=" + std::to_string(g.N) +
           " Nt=" + std::to_string(g.Nt) + " L=" + std::to_string(g.L) +
           " T=" + std::to_string(g.T);
}

enum class FieldLayout { spacetime, slice };

// Complex scalar field on the grid. `spacetime` holds all Nt+1 time samples,
// `slice` a single one.
struct Field {
    SpacetimeGrid grid;
    FieldLayout layout = FieldLayout::spacetime;
    std::vector<cplx> values;

    static Field zeros(const SpacetimeGrid& g, FieldLayout lay = FieldLayout::spacetime) {
        g.validate();
        Field f;
        f.grid = g;
        f.layout = lay;
        f.values.assign(static_cast<std::size_t>(lay == FieldLayout::spacetime ? g.time_points() : 1) *
                            g.space_size(),
                        cplx{0.0, 0.0});
        return f;
    }

    int slices() const { return layout == FieldLayout::spacetime ? grid.time_points() : 1; }

    cplx* slice(int it) { return values.data() + static_cast<std::size_t>(it) * grid.space_size(); }
    const cplx* slice(int it) const {
        return values.data() + static_cast<std::size_t>(it) * grid.space_size();
    }

    cplx& at(int it, int js) { return values[static_cast<std::size_t>(it) * grid.space_size() + js]; }
    cplx at(int it, int js) const {
        return values[static_cast<std::size_t>(it) * grid.space_size() + js];
    }
};

// In-place spatial FFT of one slice.
inline void fft_slice(const SpacetimeGrid& g, cplx* data) {
    fft_nd(std::span<cplx>(data, static_cast<std::size_t>(g.space_size())), g.d,
           static_cast<std::size_t>(g.N));
}

inline void ifft_slice(const SpacetimeGrid& g, cplx* data) {
    ifft_nd(std::span<cplx>(data, static_cast<std::size_t>(g.space_size())), g.d,
            static_cast<std::size_t>(g.N));
}

}  // namespace parapsi

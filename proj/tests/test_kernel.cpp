#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <parapsi/fft.hpp>
#include <parapsi/io.hpp>
#include <parapsi/kernel.hpp>

using namespace parapsi;

namespace {

SpacetimeGrid make_grid(int d, double L, int N) {
    SpacetimeGrid g;
    g.d = d;
    g.L = L;
    g.N = N;
    g.T = 1.0;
    g.Nt = 4096;
    g.validate();
    return g;
}

Symbol fl(double gamma, double T = 1.0) {
    Symbol s;
    s.kind = SymbolKind::fractional_laplacian;
    s.gamma = gamma;
    s.track = PiecewiseConstantTrack::constant(T, 1.0);
    return s;
}

double periodized_gaussian(double x, double tau, double L) {
    double acc = 0.0;
    for (int k = -8; k <= 8; ++k) {
        const double z = x + 2.0 * L * k;
        acc += std::exp(-z * z / (4.0 * tau)) / std::sqrt(4.0 * std::numbers::pi * tau);
    }
    return acc;
}

double periodized_poisson(double x, double tau, double L) {
    const double a = std::numbers::pi * tau / L;
    const double b = std::numbers::pi * x / L;
    return (1.0 / (2.0 * L)) * std::sinh(a) / (std::cosh(a) - std::cos(b));
}

double rel_linf(const KernelSlice& slice, double (*exact)(double, double, double), double tau) {
    const auto& g = slice.grid;
    double emax = 0.0, vmax = 0.0;
    for (int j = 0; j < g.N; ++j) {
        const double ex = exact(g.coord(j), tau, g.L);
        emax = std::max(emax, std::abs(slice.values[j].real() - ex));
        emax = std::max(emax, std::abs(slice.values[j].imag()));
        vmax = std::max(vmax, std::abs(ex));
    }
    return emax / vmax;
}

}  // namespace

TEST_CASE("heat kernel slices match the periodized Gaussian") {
    const SpacetimeGrid g = make_grid(1, 16.0, 4096);
    const Symbol s = fl(2.0);
    for (double tau : {0.01, 0.1, 0.5, 1.0}) {
        const KernelSlice slice = build_kernel_slice(s, g, tau, 0.0, 0.0, 0, {0, 0});
        CHECK(slice.resolved);
        CHECK(rel_linf(slice, periodized_gaussian, tau) < 1e-6);
    }
}

TEST_CASE("sqrt-Laplacian slices match the periodized Poisson kernel") {
    const SpacetimeGrid g = make_grid(1, 16.0, 8192);
    const Symbol s = fl(1.0);
    for (double tau : {0.05, 0.1, 0.5}) {
        const KernelSlice slice = build_kernel_slice(s, g, tau, 0.0, 0.0, 0, {0, 0});
        CHECK(rel_linf(slice, periodized_poisson, tau) < 1e-4);
    }
}

TEST_CASE("plain slices carry unit mass") {
    const SpacetimeGrid g = make_grid(1, 16.0, 1024);
    Symbol tm;
    tm.kind = SymbolKind::time_modulated;
    tm.gamma = 2.0;
    tm.track = PiecewiseConstantTrack{{0.0, 0.25, 0.5, 1.0}, {0.5, 2.0, 1.0}};
    for (const Symbol& s : {fl(2.0), fl(1.0), tm}) {
        const KernelSlice slice = build_kernel_slice(s, g, 0.5, 0.0, 0.0, 0, {0, 0});
        CHECK(l1_mass(slice) == Catch::Approx(1.0).margin(1e-8));
    }
    const KernelSlice shifted = build_kernel_slice(fl(2.0), g, 0.5, 0.0, 0.5, 0, {0, 0});
    CHECK_THROWS_AS(l1_mass(shifted), input_error);
}

TEST_CASE("2d heat slice matches the product of 1d Gaussians") {
    SpacetimeGrid g;
    g.d = 2;
    g.L = 8.0;
    g.N = 256;
    g.T = 1.0;
    g.Nt = 64;
    const Symbol s = fl(2.0);
    const double tau = 0.25;
    const KernelSlice slice = build_kernel_slice(s, g, tau, 0.0, 0.0, 0, {0, 0});
    double emax = 0.0, vmax = 0.0;
    for (int j0 = 0; j0 < g.N; ++j0) {
        for (int j1 = 0; j1 < g.N; ++j1) {
            const double ex = periodized_gaussian(g.coord(j0), tau, g.L) *
                              periodized_gaussian(g.coord(j1), tau, g.L);
            const cplx got = slice.values[static_cast<std::size_t>(j0) * g.N + j1];
            emax = std::max(emax, std::abs(got.real() - ex));
            vmax = std::max(vmax, std::abs(ex));
        }
    }
    CHECK(emax / vmax < 1e-6);
}

TEST_CASE("time-modulated kernel equals the time-rescaled constant kernel") {
    const SpacetimeGrid g = make_grid(1, 16.0, 512);
    Symbol tm;
    tm.kind = SymbolKind::time_modulated;
    tm.gamma = 2.0;
    tm.track = PiecewiseConstantTrack{{0.0, 0.25, 0.5, 1.0}, {0.5, 2.0, 1.0}};
    const Symbol base = fl(2.0);
    // integral of a over [0, 0.75] is exactly 0.875 in binary arithmetic
    const auto m_tm = kernel_multiplier(tm, g, 0.75, 0.0, 0.0, 0, {0, 0});
    const auto m_fl = kernel_multiplier(base, g, 0.875, 0.0, 0.0, 0, {0, 0});
    REQUIRE(m_tm.size() == m_fl.size());
    for (std::size_t i = 0; i < m_tm.size(); ++i) {
        CHECK(m_tm[i].real() == m_fl[i].real());
        CHECK(m_tm[i].imag() == m_fl[i].imag());
    }
}

TEST_CASE("slices compose under convolution across an intermediate time") {
    const SpacetimeGrid g = make_grid(1, 16.0, 1024);
    const Symbol s = fl(2.0);
    const KernelSlice a = build_kernel_slice(s, g, 0.3, 0.0, 0.0, 0, {0, 0});
    const KernelSlice b = build_kernel_slice(s, g, 0.7, 0.3, 0.0, 0, {0, 0});
    const KernelSlice c = build_kernel_slice(s, g, 0.7, 0.0, 0.0, 0, {0, 0});
    std::vector<cplx> fa(a.values), fb(b.values);
    fft_1d(fa);
    fft_1d(fb);
    for (std::size_t i = 0; i < fa.size(); ++i) fa[i] *= fb[i];
    ifft_1d(fa);
    double emax = 0.0, vmax = 0.0;
    for (int j = 0; j < g.N; ++j) {
        // torus convolution with the lattice measure; shift by N/2 because
        // both factors are indexed from x = -L
        const cplx w = fa[static_cast<std::size_t>((j + g.N / 2) % g.N)] * g.dx();
        emax = std::max(emax, std::abs(w - c.values[j]));
        vmax = std::max(vmax, std::abs(c.values[j]));
    }
    CHECK(emax / vmax < 1e-12);
}

TEST_CASE("slice symmetry follows the derivative parity") {
    const SpacetimeGrid g = make_grid(1, 16.0, 512);
    const KernelSlice even = build_kernel_slice(fl(2.0), g, 0.2, 0.0, 0.0, 0, {0, 0});
    const KernelSlice odd = build_kernel_slice(fl(2.0), g, 0.2, 0.0, 0.0, 0, {1, 0});
    for (int j = 1; j < g.N; ++j) {
        const int jr = g.N - j;
        CHECK(std::abs(even.values[j].real() - even.values[jr].real()) < 1e-13);
        CHECK(std::abs(odd.values[j].real() + odd.values[jr].real()) < 1e-12);
    }
    // odd derivative kernels vanish at the origin cell
    CHECK(std::abs(odd.values[g.N / 2].real()) < 1e-12);
}

TEST_CASE("fractional slice L2 norm matches the Gaussian closed form") {
    const SpacetimeGrid g = make_grid(1, 16.0, 4096);
    const KernelSlice slice = build_kernel_slice(fl(2.0), g, 0.1, 0.0, 0.0, 0, {0, 0});
    const double expect = std::pow(8.0 * std::numbers::pi * 0.1, -0.25);
    CHECK(kernel_lp_norm(slice, 2.0) == Catch::Approx(expect).epsilon(1e-8));
    // weighted sup statistic: sup |x| |P| is attained at |x| = sqrt(2 tau)
    const double sup1 = kernel_lp_norm(slice, std::numeric_limits<double>::infinity(), 1.0);
    const double x_star = std::sqrt(2.0 * 0.1);
    const double expect_sup =
        x_star * std::exp(-x_star * x_star / 0.4) / std::sqrt(4.0 * std::numbers::pi * 0.1);
    CHECK(sup1 == Catch::Approx(expect_sup).epsilon(1e-3));
}

TEST_CASE("multiplier guards") {
    const SpacetimeGrid g = make_grid(1, 16.0, 256);
    const Symbol s = fl(2.0);
    CHECK_THROWS_AS(kernel_multiplier(s, g, 0.2, 0.5, 0.0, 0, {0, 0}), input_error);
    CHECK_THROWS_AS(kernel_multiplier(s, g, 0.5, 0.0, -0.1, 0, {0, 0}), input_error);
    CHECK_THROWS_AS(kernel_multiplier(s, g, 0.5, 0.0, 1.5, 0, {0, 0}), input_error);
    CHECK_THROWS_AS(kernel_multiplier(s, g, 0.5, 0.0, 0.0, 2, {0, 0}), capability_error);
    // time-derivative slices need two time steps of separation
    const double dt = g.dt();
    CHECK_THROWS_AS(kernel_multiplier(s, g, dt, 0.0, 0.0, 1, {0, 0}), input_error);
    CHECK_NOTHROW(kernel_multiplier(s, g, 3.0 * dt, 0.0, 0.0, 1, {0, 0}));
    // odd-order derivative zeroes the unpaired Nyquist mode
    const auto m1 = kernel_multiplier(s, g, 0.5, 0.0, 0.0, 0, {1, 0});
    CHECK(m1[g.N / 2] == cplx{0.0, 0.0});
}

TEST_CASE("decay fit enforces the two-decade sweep precondition") {
    const SpacetimeGrid g = make_grid(1, 16.0, 512);
    CHECK_THROWS_AS(
        decay_exponent_fit(fl(2.0), g, 0.0, 0, {0, 0}, 0, {0.1, 0.2, 0.5, 1.0}, {}),
        input_error);
}

TEST_CASE("decay fit recovers the heat kernel exponents") {
    const SpacetimeGrid g = make_grid(1, 32.0, 2048);
    std::vector<double> lags;
    for (double t = 0.01; t <= 1.0 + 1e-9; t *= std::sqrt(10.0)) lags.push_back(t);
    const EstimateReport rep = decay_exponent_fit(fl(2.0), g, 0.0, 0, {0, 0}, 0, lags, {});
    REQUIRE(rep.all_pass());
    for (const auto& row : rep.rows) {
        if (row.case_id == "kernel.decay.sup") CHECK(row.slope == Catch::Approx(-0.5).margin(0.02));
        if (row.case_id == "kernel.decay.l2") CHECK(row.slope == Catch::Approx(-0.25).margin(0.02));
    }
}

TEST_CASE("decay fit refuses when exclusions starve the sweep") {
    const SpacetimeGrid g = make_grid(1, 16.0, 64);  // xi_max^2 ~ 158: lags below keep excluded
    std::vector<double> lags{1e-5, 3e-5, 1e-4, 3e-4, 1e-3};
    const EstimateReport rep = decay_exponent_fit(fl(2.0), g, 0.0, 0, {0, 0}, 0, lags, {});
    CHECK_FALSE(rep.all_pass());
    int excluded = 0, refused = 0;
    for (const auto& row : rep.rows) {
        if (row.verdict == "excluded") {
            ++excluded;
            CHECK(row.inputs.find("unresolved") != std::string::npos);
        }
        if (row.verdict == "refused") ++refused;
    }
    CHECK(excluded == 5);
    CHECK(refused == 2);
}

TEST_CASE("window cutoff semantics") {
    CHECK(h_cutoff(1.0, 0.5, 0.1) == 1.0);   // full-strength case ignores the horizon
    CHECK(h_cutoff(1.0, 0.0, 0.1) == 0.0);
    CHECK(h_cutoff(0.0, 0.05, 0.1) == 1.0);
    CHECK(h_cutoff(0.0, 0.1, 0.1) == 0.0);   // closed at the right end
    CHECK(h_cutoff(0.0, 0.15, 0.1) == 0.0);
    CHECK(h_cutoff(0.5, 0.0, 0.1) == 0.0);
    CHECK(h_cutoff(0.5, 1e-9, 0.1) == 1.0);
}

namespace {

SpacetimeGrid hormander_grid() {
    SpacetimeGrid g;
    g.d = 1;
    g.L = 8.0;
    g.N = 512;  // dx below the level-4 box side so both test levels hold two cells
    g.T = 2.25;
    g.Nt = 90;
    return g;
}

}  // namespace

TEST_CASE("difference integral vanishes for identical pairs") {
    const SpacetimeGrid g = hormander_grid();
    const Symbol s = fl(2.0, 4.0);
    ParabolicDyadicBox box;
    box.level = 3;
    box.t_lo = 0.125;
    box.x_corner = {0.0, 0.0};
    const std::array<double, 2> y{0.0, 0.0};
    const double v = hormander_integral(s, g, 0.0, box, box.t_lo, y, box.t_lo, y, 1.0);
    CHECK(v == 0.0);
}

TEST_CASE("difference integral is finite and shrinks with the box") {
    const SpacetimeGrid g = hormander_grid();
    const Symbol s = fl(2.0, 4.0);
    const std::array<double, 2> y0{0.0, 0.0};
    const std::array<double, 2> y1{g.dx(), 0.0};
    ParabolicDyadicBox box3;
    box3.level = 3;
    box3.t_lo = 0.125;
    ParabolicDyadicBox box4 = box3;
    box4.level = 4;
    const double v3 = hormander_integral(s, g, 0.0, box3, box3.t_lo, y0, box3.t_lo, y1, 1.0);
    const double v4 = hormander_integral(s, g, 0.0, box4, box4.t_lo, y0, box4.t_lo, y1, 1.0);
    CHECK(v3 > 0.0);
    CHECK(std::isfinite(v3));
    CHECK(v4 <= 2.0 * v3 + 1e-12);
}

TEST_CASE("full-strength truncation drops out of the difference integral") {
    const SpacetimeGrid g = hormander_grid();
    const Symbol s = fl(2.0, 4.0);
    const std::array<double, 2> y0{0.0, 0.0};
    const std::array<double, 2> y1{g.dx(), 0.0};
    ParabolicDyadicBox box;
    box.level = 3;
    box.t_lo = 0.125;
    const double a = hormander_integral(s, g, 1.0, box, box.t_lo, y0, box.t_lo, y1, 0.5);
    const double b = hormander_integral(s, g, 1.0, box, box.t_lo, y0, box.t_lo, y1, 1.0);
    const double c = hormander_integral(s, g, 1.0, box, box.t_lo, y0, box.t_lo, y1, 2.0);
    CHECK(a == b);
    CHECK(b == c);
    CHECK(a > 0.0);
    // windowed variant must grow with the horizon instead
    const double w1 = hormander_integral(s, g, 0.0, box, box.t_lo, y0, box.t_lo, y1, 0.5);
    const double w2 = hormander_integral(s, g, 0.0, box, box.t_lo, y0, box.t_lo, y1, 2.0);
    CHECK(w2 > w1);
}

TEST_CASE("difference integral rejects bad geometry") {
    const SpacetimeGrid g = hormander_grid();
    const Symbol s = fl(2.0, 4.0);
    ParabolicDyadicBox box;
    box.level = 3;
    box.t_lo = 0.125;
    const std::array<double, 2> inside{0.0, 0.0};
    // source outside the box
    CHECK_THROWS_AS(
        hormander_integral(s, g, 0.0, box, 0.5, inside, box.t_lo, inside, 1.0), input_error);
    // off-lattice spatial point
    CHECK_THROWS_AS(
        hormander_integral(s, g, 0.0, box, box.t_lo, {0.01, 0.0}, box.t_lo, inside, 1.0),
        input_error);
    // horizon exceeding the symbol track
    const Symbol short_track = fl(2.0, 1.0);
    CHECK_THROWS_AS(hormander_integral(short_track, g, 0.0, box, box.t_lo, inside, box.t_lo,
                                       inside, 1.0),
                    input_error);
}

TEST_CASE("slices survive a binary round trip") {
    const SpacetimeGrid g = make_grid(1, 16.0, 256);
    const KernelSlice slice = build_kernel_slice(fl(2.0), g, 0.37, 0.12, 0.5, 0, {1, 0});
    const std::string path = "slice_roundtrip.bin";
    write_slice_binary(path, slice);
    const KernelSlice back = read_slice_binary(path);
    CHECK(back.grid.N == g.N);
    CHECK(back.grid.L == g.L);
    CHECK(back.t == slice.t);
    CHECK(back.s == slice.s);
    CHECK(back.epsilon == slice.epsilon);
    CHECK(back.alpha == slice.alpha);
    REQUIRE(back.values.size() == slice.values.size());
    for (std::size_t i = 0; i < slice.values.size(); ++i) {
        CHECK(back.values[i].real() == slice.values[i].real());
        CHECK(back.values[i].imag() == slice.values[i].imag());
    }
    std::remove(path.c_str());
}

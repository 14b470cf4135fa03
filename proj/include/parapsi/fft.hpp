#pragma once

// Radix-2 complex FFT for the power-of-two periodic grids used everywhere in this
// library. Unnormalized forward transform, 1/N-normalized inverse. Plans are free:
// twiddles are rebuilt per call, which is far below measurement noise at the grid
// sizes this project runs (N <= 8192).

#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "errors.hpp"

namespace parapsi {

using cplx = std::complex<double>;

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

namespace detail {

inline void fft_radix2(std::span<cplx> a, bool inverse) {
    const std::size_t n = a.size();
    if (!is_pow2(n)) throw input_error("fft: length must be a power of two");
    if (n == 1) return;
    // bit-reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    const double sgn = inverse ? 1.0 : -1.0;
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = sgn * 2.0 * std::numbers::pi / static_cast<double>(len);
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t k = 0; k < len / 2; ++k) {
                const cplx w = std::polar(1.0, ang * static_cast<double>(k));
                const cplx u = a[i + k];
                const cplx v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
            }
        }
    }
}

}  // namespace detail

// F_k = sum_j f_j exp(-2*pi*i*k*j/N)
inline void fft_1d(std::span<cplx> a) { detail::fft_radix2(a, false); }

// f_j = (1/N) sum_k F_k exp(+2*pi*i*k*j/N)
inline void ifft_1d(std::span<cplx> a) {
    detail::fft_radix2(a, true);
    const double inv = 1.0 / static_cast<double>(a.size());
    for (auto& v : a) v *= inv;
}

// Row-major d-dimensional transform on an N^d cube, d in {1,2}.
inline void fft_nd(std::span<cplx> a, int d, std::size_t n) {
    if (d != 1 && d != 2) throw capability_error("fft_nd: d must be 1 or 2");
    if (a.size() != (d == 1 ? n : n * n)) throw input_error("fft_nd: size mismatch");
    if (d == 1) {
        fft_1d(a);
        return;
    }
    for (std::size_t r = 0; r < n; ++r) fft_1d(a.subspan(r * n, n));
    std::vector<cplx> col(n);
    for (std::size_t c = 0; c < n; ++c) {
        for (std::size_t r = 0; r < n; ++r) col[r] = a[r * n + c];
        fft_1d(col);
        for (std::size_t r = 0; r < n; ++r) a[r * n + c] = col[r];
    }
}

inline void ifft_nd(std::span<cplx> a, int d, std::size_t n) {
    if (d != 1 && d != 2) throw capability_error("ifft_nd: d must be 1 or 2");
    if (a.size() != (d == 1 ? n : n * n)) throw input_error("ifft_nd: size mismatch");
    if (d == 1) {
        ifft_1d(a);
        return;
    }
    for (std::size_t r = 0; r < n; ++r) ifft_1d(a.subspan(r * n, n));
    std::vector<cplx> col(n);
    for (std::size_t c = 0; c < n; ++c) {
        for (std::size_t r = 0; r < n; ++r) col[r] = a[r * n + c];
        ifft_1d(col);
        for (std::size_t r = 0; r < n; ++r) a[r * n + c] = col[r];
    }
}

}  // namespace parapsi

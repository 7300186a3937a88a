#pragma once

// Reference implementations used only by tests. Each one follows the plain
// definition with scalar loops and shares no code with the library kernels.

#include <algorithm>
#include <array>
#include <cstdint>
#include <complex>
#include <limits>
#include <vector>

#include "ciris/ctensor.hpp"
#include "ciris/grid.hpp"
#include "ciris/layers.hpp"

namespace ciris::oracle {

/// Sliding-window complex cross-correlation over an (N,H,W,C) input,
/// accumulating per-element complex products.
inline ComplexTensor<double> conv_sliding_window(const ComplexTensor<double>& in,
                                                 const ComplexTensor<double>& k, const ConvGeometry& g) {
    const auto& is = in.shape();
    const auto& ks = k.shape();
    const std::size_t n = is[0], h = is[1], w = is[2], c = is[3];
    const std::size_t kh = ks[0], kw = ks[1], co = ks[3];
    const std::size_t sh = g.stride_h, sw = g.stride_w, ph = g.pad_h, pw = g.pad_w;
    const std::size_t h2 = (h + 2 * ph - kh) / sh + 1, w2 = (w + 2 * pw - kw) / sw + 1;
    ComplexTensor<double> out(Shape{n, h2, w2, co});
    for (std::size_t b = 0; b < n; ++b)
        for (std::size_t oy = 0; oy < h2; ++oy)
            for (std::size_t ox = 0; ox < w2; ++ox)
                for (std::size_t o = 0; o < co; ++o) {
                    std::complex<double> acc = 0;
                    for (std::size_t ky = 0; ky < kh; ++ky)
                        for (std::size_t kx = 0; kx < kw; ++kx) {
                            const long iy = long(oy * sh + ky) - long(ph);
                            const long ix = long(ox * sw + kx) - long(pw);
                            if (iy < 0 || ix < 0 || iy >= long(h) || ix >= long(w)) continue;
                            for (std::size_t ci = 0; ci < c; ++ci) {
                                const auto x = in.at(((b * h + iy) * w + ix) * c + ci);
                                const auto kk = k.at(((ky * kw + kx) * c + ci) * co + o);
                                acc += x * kk;
                            }
                        }
                    out.set(((b * h2 + oy) * w2 + ox) * co + o, acc);
                }
    return out;
}

/// Same convolution written as a real network on 2C stacked planes with the
/// block kernel [[x, -y], [y, x]]: output plane o (real) and C2+o (imag).
inline ComplexTensor<double> conv_real_block(const ComplexTensor<double>& in,
                                             const ComplexTensor<double>& k, const ConvGeometry& g) {
    const auto& is = in.shape();
    const auto& ks = k.shape();
    const std::size_t n = is[0], h = is[1], w = is[2], c = is[3];
    const std::size_t kh = ks[0], kw = ks[1], co = ks[3];
    const std::size_t sh = g.stride_h, sw = g.stride_w, ph = g.pad_h, pw = g.pad_w;
    const std::size_t h2 = (h + 2 * ph - kh) / sh + 1, w2 = (w + 2 * pw - kw) / sw + 1;
    // Stack planes: channel j < c is Re, j >= c is Im.
    std::vector<double> stacked(n * h * w * 2 * c);
    for (std::size_t q = 0; q < n * h * w; ++q)
        for (std::size_t ci = 0; ci < c; ++ci) {
            stacked[q * 2 * c + ci] = in.re()[q * c + ci];
            stacked[q * 2 * c + c + ci] = in.im()[q * c + ci];
        }
    // Real block kernel (kh, kw, 2c, 2co).
    std::vector<double> block(kh * kw * 2 * c * 2 * co);
    auto bidx = [&](std::size_t ky, std::size_t kx, std::size_t i, std::size_t o) {
        return ((ky * kw + kx) * 2 * c + i) * 2 * co + o;
    };
    for (std::size_t ky = 0; ky < kh; ++ky)
        for (std::size_t kx = 0; kx < kw; ++kx)
            for (std::size_t ci = 0; ci < c; ++ci)
                for (std::size_t o = 0; o < co; ++o) {
                    const auto kk = k.at(((ky * kw + kx) * c + ci) * co + o);
                    block[bidx(ky, kx, ci, o)] = kk.real();            // A -> re : x
                    block[bidx(ky, kx, c + ci, o)] = -kk.imag();       // B -> re : -y
                    block[bidx(ky, kx, ci, co + o)] = kk.imag();       // A -> im : y
                    block[bidx(ky, kx, c + ci, co + o)] = kk.real();   // B -> im : x
                }
    ComplexTensor<double> out(Shape{n, h2, w2, co});
    for (std::size_t b = 0; b < n; ++b)
        for (std::size_t oy = 0; oy < h2; ++oy)
            for (std::size_t ox = 0; ox < w2; ++ox)
                for (std::size_t o = 0; o < 2 * co; ++o) {
                    double acc = 0;
                    for (std::size_t ky = 0; ky < kh; ++ky)
                        for (std::size_t kx = 0; kx < kw; ++kx) {
                            const long iy = long(oy * sh + ky) - long(ph);
                            const long ix = long(ox * sw + kx) - long(pw);
                            if (iy < 0 || ix < 0 || iy >= long(h) || ix >= long(w)) continue;
                            for (std::size_t i = 0; i < 2 * c; ++i)
                                acc += stacked[((b * h + iy) * w + ix) * 2 * c + i] *
                                       block[bidx(ky, kx, i, o)];
                        }
                    const std::size_t at = ((b * h2 + oy) * w2 + ox) * co + (o % co);
                    (o < co ? out.re() : out.im())[at] = acc;
                }
    return out;
}

/// Mean over jointly valid cells of sum_c |f1[y, x - b, c] - f2[y, x, c]|^2,
/// f1's mask rolled with it.
inline double fd_loop(const ComplexTensor<double>& f1, const BinaryGrid& m1,
                      const ComplexTensor<double>& f2, const BinaryGrid& m2, int b) {
    const long h = long(f1.shape()[0]), w = long(f1.shape()[1]), c = long(f1.shape()[2]);
    double sum = 0;
    long valid = 0;
    for (long y = 0; y < h; ++y)
        for (long x = 0; x < w; ++x) {
            const long src = ((x - b) % w + w) % w;
            if (!m1.at(std::size_t(y), std::size_t(src)) || !m2.at(std::size_t(y), std::size_t(x))) continue;
            ++valid;
            for (long k = 0; k < c; ++k) {
                const std::complex<double> d = f1.at(std::size_t((y * w + src) * c + k)) -
                                               f2.at(std::size_t((y * w + x) * c + k));
                sum += std::norm(d);
            }
        }
    return sum / double(valid);
}

/// Tries b = 0, -1, 1, -2, 2, ... and keeps strict improvements.
inline std::pair<double, int> shift_loop(const ComplexTensor<double>& f1, const BinaryGrid& m1,
                                         const ComplexTensor<double>& f2, const BinaryGrid& m2,
                                         int max_shift) {
    double best = fd_loop(f1, m1, f2, m2, 0);
    int arg = 0;
    for (int k = 1; k <= max_shift; ++k)
        for (int b : {-k, k}) {
            const double d = fd_loop(f1, m1, f2, m2, b);
            if (d < best) {
                best = d;
                arg = b;
            }
        }
    return {best, arg};
}

inline double etl_loop(const std::vector<ComplexTensor<double>>& f, const std::vector<BinaryGrid>& m,
                       const std::vector<std::array<std::size_t, 3>>& triplets, double alpha,
                       int max_shift) {
    double sum = 0;
    for (const auto& [a, p, n] : triplets) {
        const double dp = shift_loop(f[a], m[a], f[p], m[p], max_shift).first;
        const double dn = shift_loop(f[a], m[a], f[n], m[n], max_shift).first;
        sum += std::max(0.0, dp - dn + alpha);
    }
    return sum / double(triplets.size());
}

struct SweepPoint {
    double threshold, far, frr;
};

/// FAR and FRR counted directly at every distinct score, preceded by a
/// threshold below all scores.
inline std::vector<SweepPoint> threshold_sweep(const std::vector<double>& genuine,
                                               const std::vector<double>& impostor) {
    std::vector<double> t(genuine);
    t.insert(t.end(), impostor.begin(), impostor.end());
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
    t.insert(t.begin(), -std::numeric_limits<double>::infinity());
    std::vector<SweepPoint> out;
    for (double th : t) {
        double fa = 0, fr = 0;
        for (double s : impostor) fa += s <= th;
        for (double s : genuine) fr += s > th;
        out.push_back({th, fa / double(impostor.size()), fr / double(genuine.size())});
    }
    return out;
}

/// FAR where FAR - FRR first reaches zero, interpolated linearly between
/// the bracketing sweep points.
inline double eer_sweep(const std::vector<double>& genuine, const std::vector<double>& impostor) {
    const auto s = threshold_sweep(genuine, impostor);
    for (std::size_t k = 1; k < s.size(); ++k) {
        const double d0 = s[k - 1].far - s[k - 1].frr, d1 = s[k].far - s[k].frr;
        if (d1 == 0) return s[k].far;
        if (d0 < 0 && d1 > 0) return s[k - 1].far + d0 / (d0 - d1) * (s[k].far - s[k - 1].far);
    }
    return 1.0;
}

/// Disagreeing bits over jointly valid cells with a's columns rolled by b.
/// Bits and mask are laid out as ((row * cols + col) * filters + f) [* 2 + part].
inline double hamming_loop(const std::vector<std::uint8_t>& abits, const std::vector<std::uint8_t>& amask,
                           const std::vector<std::uint8_t>& bbits, const std::vector<std::uint8_t>& bmask,
                           std::size_t rows, std::size_t cols, std::size_t filters, int b) {
    std::size_t diff = 0, total = 0;
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) {
            const std::size_t src = std::size_t(((long(c) - b) % long(cols) + long(cols)) % long(cols));
            for (std::size_t f = 0; f < filters; ++f) {
                const std::size_t ia = (r * cols + src) * filters + f, ib = (r * cols + c) * filters + f;
                if (!amask[ia] || !bmask[ib]) continue;
                for (std::size_t part = 0; part < 2; ++part) {
                    diff += abits[ia * 2 + part] != bbits[ib * 2 + part];
                    ++total;
                }
            }
        }
    return double(diff) / double(total);
}

}  // namespace ciris::oracle

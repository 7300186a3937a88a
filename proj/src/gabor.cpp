#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "ciris/layers.hpp"

namespace ciris {

void GaborParams::validate() const {
    if (!(lambda > 0)) throw std::invalid_argument("Gabor wavelength must be positive");
    if (!(delta > 0)) throw std::invalid_argument("Gabor envelope std must be positive");
    if (!(gamma > 0)) throw std::invalid_argument("Gabor aspect ratio must be positive");
    if (!(theta >= 0 && theta < std::numbers::pi))
        throw std::invalid_argument("Gabor orientation must lie in [0, pi)");
}

std::vector<GaborParams> GaborGrid::params() const {
    std::vector<GaborParams> out;
    out.reserve(std::size_t(size()));
    for (int o = 0; o < orientations; ++o) {
        for (int w = 0; w < wavelengths; ++w) {
            for (int p = 0; p < phases; ++p) {
                GaborParams g;
                g.theta = std::numbers::pi * o / orientations;
                g.lambda = base_wavelength * std::ldexp(1.0, w);
                g.psi = p * std::numbers::pi / 2;
                g.delta = delta_ratio * g.lambda;
                g.gamma = aspect;
                out.push_back(g);
            }
        }
    }
    return out;
}

GaborGrid GaborGrid::for_count(int m) {
    if (m < 1) throw std::invalid_argument("Gabor bank needs at least one kernel");
    GaborGrid grid;
    grid.phases = (m % 2 == 0) ? 2 : 1;
    const int rest = m / grid.phases;
    int p = 1;
    while (rest % (2 * p) == 0 && 2 * (2 * p) * (2 * p) <= rest) p *= 2;
    grid.wavelengths = p;
    grid.orientations = rest / p;
    return grid;
}

template <typename T>
ComplexTensor<T> gabor_kernel(const GaborParams& p, int kh, int kw) {
    p.validate();
    if (kh < 1 || kw < 1 || kh % 2 == 0 || kw % 2 == 0)
        throw std::invalid_argument("Gabor kernel extents must be odd, got " + std::to_string(kh) +
                                    "x" + std::to_string(kw));
    ComplexTensor<T> k(Shape{std::size_t(kh), std::size_t(kw)});
    const double ct = std::cos(p.theta), st = std::sin(p.theta);
    for (int row = 0; row < kh; ++row) {
        const double y = row - kh / 2;
        for (int col = 0; col < kw; ++col) {
            const double x = col - kw / 2;
            const double xr = x * ct + y * st;
            const double yr = -x * st + y * ct;
            const double env =
                std::exp(-(xr * xr + p.gamma * p.gamma * yr * yr) / (2 * p.delta * p.delta));
            const double ph = 2 * std::numbers::pi * xr / p.lambda + p.psi;
            const std::size_t i = std::size_t(row) * kw + col;
            k.re()[i] = T(env * std::cos(ph));
            k.im()[i] = T(env * std::sin(ph));
        }
    }
    return k;
}

template <typename T>
ComplexTensor<T> gabor_bank(int kh, int kw, int m, const GaborGrid& grid) {
    if (grid.size() != m)
        throw std::invalid_argument("Gabor grid has " + std::to_string(grid.size()) +
                                    " kernels, requested " + std::to_string(m));
    const auto params = grid.params();
    const std::size_t taps = std::size_t(kh) * kw;
    ComplexTensor<T> bank(Shape{std::size_t(kh), std::size_t(kw), 1, std::size_t(m)});
    for (int f = 0; f < m; ++f) {
        const auto k = gabor_kernel<double>(params[f], kh, kw);
        const double norm = std::sqrt(squared_norm(k));
        for (std::size_t t = 0; t < taps; ++t) {
            bank.re()[t * m + f] = T(k.re()[t] / norm);
            bank.im()[t * m + f] = T(k.im()[t] / norm);
        }
    }
    return bank;
}

template <typename T>
ComplexTensor<T> gabor_bank(int kh, int kw, int m) {
    return gabor_bank<T>(kh, kw, m, GaborGrid::for_count(m));
}

template ComplexTensor<float> gabor_kernel(const GaborParams&, int, int);
template ComplexTensor<double> gabor_kernel(const GaborParams&, int, int);
template ComplexTensor<float> gabor_bank(int, int, int);
template ComplexTensor<double> gabor_bank(int, int, int);
template ComplexTensor<float> gabor_bank(int, int, int, const GaborGrid&);
template ComplexTensor<double> gabor_bank(int, int, int, const GaborGrid&);

}  // namespace ciris

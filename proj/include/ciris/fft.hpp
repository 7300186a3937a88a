#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace ciris {

/// In-place 1-D DFT of arbitrary length. Powers of two use an iterative
/// radix-2 kernel; every other length goes through Bluestein's chirp-z
/// algorithm on a padded power-of-two transform.
class FftPlan {
public:
    explicit FftPlan(std::size_t n);

    std::size_t size() const { return n_; }

    /// X[k] = sum_j x[j] exp(-2 pi i jk/n), unnormalized.
    void forward(std::span<std::complex<double>> data) const;
    /// x[j] = sum_k X[k] exp(+2 pi i jk/n), unnormalized.
    void backward(std::span<std::complex<double>> data) const;

    /// Transforms `inner` interleaved lines at once: element k of line c
    /// sits at re/im[k * inner + c]. Unnormalized in both directions.
    void lines(double* re, double* im, std::size_t inner, bool inverse) const;

    /// Shared, lazily built plan for length n.
    static std::shared_ptr<const FftPlan> get(std::size_t n);

private:
    void radix2(std::span<std::complex<double>> data) const;
    void bluestein(std::span<std::complex<double>> data) const;

    std::size_t n_;
    bool pow2_;
    std::vector<std::complex<double>> twiddles_;   // radix-2, length n/2
    std::vector<std::size_t> bitrev_;
    std::vector<std::complex<double>> chirp_;      // Bluestein, length n
    std::vector<std::complex<double>> chirp_fft_;  // transformed filter, length m
    std::shared_ptr<const FftPlan> inner_;         // power-of-two plan of length m
};

/// 2-D forward/inverse transform of one row-major H x W plane, in place.
/// The inverse applies the 1/(H*W) normalization.
void fft2_plane(std::span<std::complex<double>> plane, std::size_t h, std::size_t w,
                bool inverse);

}  // namespace ciris

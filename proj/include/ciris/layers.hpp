#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "ciris/ctensor.hpp"

namespace ciris {

// ---------------------------------------------------------------------------
// Gabor kernels
// ---------------------------------------------------------------------------

/// Parameters of a complex Gabor wavelet. Lengths are in pixels, angles in
/// radians.
struct GaborParams {
    double lambda = 4.0;  ///< wavelength of the carrier
    double theta = 0.0;   ///< orientation of the stripe normal, [0, pi)
    double psi = 0.0;     ///< phase offset
    double delta = 2.24;  ///< std of the Gaussian envelope
    double gamma = 0.5;   ///< spatial aspect ratio

    void validate() const;
};

/// Regular parameter grid used to initialize a Gabor bank:
/// orientations x wavelengths x phases kernels. Orientations are spread
/// uniformly over [0, pi), wavelengths double from `base_wavelength`, phases
/// are {0, pi/2} (or {0} with a single phase), delta = delta_ratio * lambda.
struct GaborGrid {
    int orientations = 8;
    int wavelengths = 4;
    int phases = 2;
    double base_wavelength = 4.0;
    double delta_ratio = 0.56;
    double aspect = 0.5;

    int size() const { return orientations * wavelengths * phases; }
    std::vector<GaborParams> params() const;

    /// Default factorization of M kernels: two phases when M is even, then
    /// the largest power-of-two wavelength count p dividing the rest with
    /// p*p <= rest/2; the remaining factor is the orientation count.
    static GaborGrid for_count(int m);
};

/// kH x kW kernel sampled at integer offsets from the center (both odd).
template <typename T>
ComplexTensor<T> gabor_kernel(const GaborParams& p, int kh, int kw);

/// (kH, kW, 1, M) bank, each kernel scaled to unit L2 norm.
template <typename T>
ComplexTensor<T> gabor_bank(int kh, int kw, int m);
template <typename T>
ComplexTensor<T> gabor_bank(int kh, int kw, int m, const GaborGrid& grid);

// ---------------------------------------------------------------------------
// Complex convolution
// ---------------------------------------------------------------------------

struct ConvGeometry {
    std::size_t stride_h = 1, stride_w = 1;
    std::size_t pad_h = 0, pad_w = 0;

    /// floor((in + 2P - k)/S) + 1
    std::size_t out_extent(std::size_t in, std::size_t k, std::size_t stride,
                           std::size_t pad) const;
};

template <typename T>
struct ConvSpec {
    ComplexTensor<T> kernel;  ///< (kH, kW, Cin, Cout)
    ConvGeometry geometry;
};

/// Cross-correlation of an (H,W,C) or (N,H,W,C) complex input:
/// re = A*x - B*y, im = B*x + A*y for input A + iB and kernel x + iy.
template <typename T>
ComplexTensor<T> complex_conv2d(const ComplexTensor<T>& input, const ConvSpec<T>& spec);

template <typename T>
struct ConvGradients {
    ComplexTensor<T> input;
    ComplexTensor<T> kernel;
};

/// Gradients in the (dC/dRe + i dC/dIm) convention given the same for the
/// output.
template <typename T>
ConvGradients<T> complex_conv2d_backward(const ComplexTensor<T>& input, const ConvSpec<T>& spec,
                                         const ComplexTensor<T>& grad_output,
                                         bool want_input = true, bool want_kernel = true);

// ---------------------------------------------------------------------------
// Activation and pooling
// ---------------------------------------------------------------------------

/// Passes z when re >= 0 and im >= 0 (arg in [0, pi/2]), else 0.
template <typename T>
ComplexTensor<T> zrelu(const ComplexTensor<T>& input);
template <typename T>
ComplexTensor<T> zrelu_backward(const ComplexTensor<T>& input, const ComplexTensor<T>& grad_output);

/// Keeps the centered out_h x out_w block of each channel's spectrum (the
/// extra row/column of an even block sits at negative frequency) and
/// transforms back, scaled so constants are preserved.
template <typename T>
ComplexTensor<T> spectral_pool(const ComplexTensor<T>& input, std::size_t out_h, std::size_t out_w);
template <typename T>
ComplexTensor<T> spectral_pool_backward(const ComplexTensor<T>& grad_output, std::size_t in_h,
                                        std::size_t in_w);
/// Zero-pads the spectrum back to in_h x in_w; right inverse of spectral_pool.
template <typename T>
ComplexTensor<T> spectral_upsample(const ComplexTensor<T>& input, std::size_t out_h,
                                   std::size_t out_w);

// ---------------------------------------------------------------------------
// Complex batch normalization
// ---------------------------------------------------------------------------

/// Row-major 2x2 real matrix [[a, b], [c, d]].
struct Mat2 {
    double a = 0, b = 0, c = 0, d = 0;
};

/// Principal square root of a symmetric positive definite 2x2 matrix.
Mat2 sqrt_spd(const Mat2& m);
Mat2 inverse(const Mat2& m);
/// Solves S X + X S = G for X.
Mat2 solve_sylvester(const Mat2& s, const Mat2& g);

/// Running statistics. Covariance columns are stored as complex numbers:
/// cov[c,0] = Vrr + i Vir, cov[c,1] = Vri + i Vii.
template <typename T>
struct BNRunning {
    ComplexTensor<T> mean;  ///< (C)
    ComplexTensor<T> cov;   ///< (C, 2)
    double momentum = 0.9;  ///< running = momentum * running + (1 - momentum) * batch
    double epsilon = 1e-5;

    static BNRunning fresh(std::size_t channels);
};

/// The affine part maps a whitened value (u, v) to u * gamma[c,0] +
/// v * gamma[c,1] + beta[c], i.e. gamma holds the two columns of a 2x2 real
/// matrix as complex numbers.
template <typename T>
struct BNState {
    ComplexTensor<T> gamma;  ///< (C, 2)
    ComplexTensor<T> beta;   ///< (C)
    BNRunning<T> running;

    /// gamma = scale * I, beta = 0, running mean 0, running covariance I.
    static BNState identity(std::size_t channels, double scale = 1.0);
};

enum class BNMode { train, eval };

/// Per-channel quantities retained from the forward pass.
struct BNCache {
    BNMode mode = BNMode::train;
    std::vector<std::array<double, 2>> mean;
    std::vector<Mat2> whiten;     ///< (V + eps I)^(-1/2)
    std::vector<Mat2> sqrt_cov;   ///< (V + eps I)^(1/2)
    /// Folded per-channel map y = A x + b as {a00, a01, a10, a11, b0, b1}.
    std::vector<std::array<double, 6>> affine;
    bool zrelu = false;
};

/// With `zrelu` set the activation is applied to the output in the same
/// pass (and gated in the backward pass).
template <typename T>
ComplexTensor<T> complex_batchnorm(const ComplexTensor<T>& input, const ComplexTensor<T>& gamma,
                                   const ComplexTensor<T>& beta, BNRunning<T>& running,
                                   BNMode mode, BNCache* cache = nullptr, bool zrelu = false);

template <typename T>
ComplexTensor<T> complex_batchnorm(const ComplexTensor<T>& input, BNState<T>& state, BNMode mode,
                                   BNCache* cache = nullptr, bool zrelu = false) {
    return complex_batchnorm(input, state.gamma, state.beta, state.running, mode, cache, zrelu);
}

template <typename T>
struct BNGradients {
    ComplexTensor<T> input;
    ComplexTensor<T> gamma;
    ComplexTensor<T> beta;
};

template <typename T>
BNGradients<T> complex_batchnorm_backward(const ComplexTensor<T>& input,
                                          const ComplexTensor<T>& gamma, const BNCache& cache,
                                          const ComplexTensor<T>& grad_output);

/// Copy of the input with imaginary parts zeroed.
template <typename T>
ComplexTensor<T> real_part(const ComplexTensor<T>& input);

/// Concatenates (.., C_i) tensors with equal leading extents along the last axis.
template <typename T>
ComplexTensor<T> concat_channels(const std::vector<const ComplexTensor<T>*>& parts);

}  // namespace ciris

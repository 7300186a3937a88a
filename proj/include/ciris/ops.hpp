#pragma once

#include <vector>

#include "ciris/autograd.hpp"
#include "ciris/layers.hpp"

/// Differentiable wrappers that record the layer kernels on a tape.
namespace ciris::ops {

template <typename T>
Var<T> conv2d(const Var<T>& input, const Var<T>& kernel, const ConvGeometry& geometry);

template <typename T>
Var<T> zrelu(const Var<T>& input);

template <typename T>
Var<T> spectral_pool(const Var<T>& input, std::size_t out_h, std::size_t out_w);

/// Running statistics are updated in train mode; `running` must outlive the
/// tape. `zrelu` fuses the activation onto the output.
template <typename T>
Var<T> batchnorm(const Var<T>& input, const Var<T>& gamma, const Var<T>& beta,
                 BNRunning<T>& running, BNMode mode, bool zrelu = false);

template <typename T>
Var<T> concat_channels(const std::vector<Var<T>>& parts);

/// Projects onto the real axis (imaginary parts set to zero).
template <typename T>
Var<T> real_part(const Var<T>& input);

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b);

template <typename T>
Var<T> scale(const Var<T>& a, T factor);

/// Scalar sum of real parts.
template <typename T>
Var<T> sum_real(const Var<T>& a);

/// Scalar sum of squared moduli.
template <typename T>
Var<T> sum_abs2(const Var<T>& a);

}  // namespace ciris::ops

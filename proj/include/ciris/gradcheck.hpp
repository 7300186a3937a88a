#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ciris/autograd.hpp"

namespace ciris {

struct GradCheckOptions {
    double h = 1e-5;           ///< central-difference step on each real component
    double tolerance = 1e-4;   ///< on the per-tensor relative error
    std::uint64_t seed = 7;
    /// Test hook: replaces the Gabor conv backward with one that flips the
    /// sign of the kernel gradient.
    bool inject_conv_fault = false;
};

struct TensorError {
    std::string name;
    double rel_error = 0;  ///< |analytic - numeric| / max(|analytic|, |numeric|, 1e-6), L2 norms
};

struct GradCheckResult {
    std::string name;
    std::vector<TensorError> tensors;
    std::size_t components = 0;  ///< real components perturbed
    double max_rel_error = 0;
    bool passed = false;
};

using LossBuilder = std::function<Var<double>(Tape<double>&)>;

/// Compares the analytic gradient of every target (accumulated into its
/// `grad` by backward) with central differences, perturbing the real and
/// imaginary part of each element separately.
GradCheckResult check_gradients(const std::string& name,
                                const std::vector<Parameter<double>*>& targets,
                                const LossBuilder& loss, const GradCheckOptions& options);

/// Gabor conv, dense composite layer (with concatenation), transition
/// block, zReLU, train-mode BN (plain and fused with zReLU), spectral
/// pooling, FD, shift distance and the triplet loss.
std::vector<GradCheckResult> run_gradcheck_suite(const GradCheckOptions& options = {});

/// One line per op with its worst tensor.
std::string format_report(const std::vector<GradCheckResult>& results);

}  // namespace ciris

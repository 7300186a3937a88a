#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ciris/autograd.hpp"

namespace ciris {

/// Piecewise-constant learning rate: each (start_epoch, rate) entry holds
/// until the next start epoch.
class LrSchedule {
public:
    LrSchedule() = default;
    explicit LrSchedule(std::vector<std::pair<int, double>> steps);

    double rate(int epoch) const;
    const std::vector<std::pair<int, double>>& steps() const { return steps_; }

    /// 0.01 for [0,10), 0.1 for [10,130), 0.01 for [130,160), 0.001 after.
    static LrSchedule paper();
    /// Same shape compressed for short runs: 0.01 for [0,3), 0.1 for [3,21),
    /// 0.01 for [21,27), 0.001 after.
    static LrSchedule desk();
    /// Parses "0:0.01,10:0.1,130:0.01".
    static LrSchedule parse(const std::string& text);
    std::string to_string() const;

private:
    std::vector<std::pair<int, double>> steps_;
};

/// Nesterov SGD state. Velocities are created on the first step.
template <typename T>
struct OptimState {
    std::vector<ComplexTensor<T>> velocity;
    double momentum = 0.9;
    double clip_norm = 1.0;
    LrSchedule schedule = LrSchedule::paper();
};

struct StepReport {
    double grad_norm = 0;  ///< before clipping
    double clip_scale = 1;
    double learning_rate = 0;
};

/// One update of every trainable parameter from its accumulated `grad`:
/// clip the global norm (real and imaginary parts of all gradients) to
/// clip_norm, then v <- mu v - lr g, w <- w + mu v - lr g.
/// Throws std::domain_error naming the first parameter with a non-finite gradient.
template <typename T>
StepReport sgd_step(std::span<Parameter<T>* const> params, OptimState<T>& state, int epoch);

}  // namespace ciris

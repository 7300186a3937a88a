#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "ciris/ctensor.hpp"

namespace ciris {

/// A named trainable tensor and its accumulated gradient. Gradients follow
/// the real-pair convention grad = dC/dRe(w) + i dC/dIm(w).
template <typename T>
struct Parameter {
    std::string name;
    ComplexTensor<T> value;
    ComplexTensor<T> grad;
    bool trainable = true;
    bool real_only = false;  ///< updates ignore the imaginary gradient

    void zero_grad() { grad = ComplexTensor<T>(value.shape()); }
};

template <typename T>
class Tape;

/// Handle to a value recorded on a tape.
template <typename T>
class Var {
public:
    Var() = default;
    Var(Tape<T>* tape, std::size_t id) : tape_(tape), id_(id) {}

    const ComplexTensor<T>& value() const;
    const Shape& shape() const { return value().shape(); }
    std::size_t id() const { return id_; }
    Tape<T>* tape() const { return tape_; }
    bool requires_grad() const;

private:
    Tape<T>* tape_ = nullptr;
    std::size_t id_ = 0;
};

/// View handed to an op's backward function.
template <typename T>
class BackwardContext {
public:
    BackwardContext(Tape<T>& tape, std::size_t node) : tape_(tape), node_(node) {}

    const ComplexTensor<T>& grad_output() const;
    const ComplexTensor<T>& output() const;
    std::size_t num_inputs() const;
    const ComplexTensor<T>& input(std::size_t i) const;
    bool needs_grad(std::size_t i) const;
    /// Accumulates into input i's gradient (no-op if it does not need one).
    void accumulate(std::size_t i, const ComplexTensor<T>& g);

private:
    Tape<T>& tape_;
    std::size_t node_;
};

/// Reverse-mode tape. Ops are recorded in evaluation order; backward replays
/// them in reverse, composing local gradients in the real-pair convention:
/// for each input, dC/dRe(in) + i dC/dIm(in) is the sum over output
/// components of Re(g) * (dRe(out)/dRe(in) + i dRe(out)/dIm(in)) plus
/// Im(g) * (dIm(out)/dRe(in) + i dIm(out)/dIm(in)).
template <typename T>
class Tape {
public:
    using BackwardFn = std::function<void(BackwardContext<T>&)>;

    /// With grad disabled, ops only compute values (inference).
    explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    bool grad_enabled() const { return grad_enabled_; }

    Var<T> constant(ComplexTensor<T> value);
    /// Leaf whose gradient is accumulated into `p.grad` by backward().
    Var<T> parameter(Parameter<T>& p);
    /// Leaf that records its own gradient (read back with grad()).
    Var<T> variable(ComplexTensor<T> value);

    Var<T> record(std::string op, ComplexTensor<T> value, std::vector<Var<T>> inputs,
                  BackwardFn backward);

    /// Seeds d(loss) = seed and propagates. The loss must be a single real
    /// value (imaginary part exactly 0).
    void backward(const Var<T>& loss, T seed = T(1));

    /// Gradient recorded for a variable() leaf after backward().
    const ComplexTensor<T>& grad(const Var<T>& v) const;

    std::size_t size() const { return nodes_.size(); }
    const std::string& op_name(const Var<T>& v) const { return nodes_.at(v.id()).op; }

private:
    friend class Var<T>;
    friend class BackwardContext<T>;

    struct Node {
        std::string op;
        ComplexTensor<T> value;
        ComplexTensor<T> grad;
        bool has_grad = false;
        bool requires_grad = false;
        bool keep_grad = false;
        std::vector<std::size_t> inputs;
        BackwardFn backward;
        Parameter<T>* param = nullptr;
    };

    Node& node(const Var<T>& v);

    bool grad_enabled_;
    std::deque<Node> nodes_;  // stable addresses: Var::value() hands out references
};

}  // namespace ciris

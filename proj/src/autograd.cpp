#include "ciris/autograd.hpp"

#include <stdexcept>

namespace ciris {

template <typename T>
const ComplexTensor<T>& Var<T>::value() const {
    if (!tape_) throw std::logic_error("Var: unbound handle");
    return tape_->nodes_.at(id_).value;
}

template <typename T>
bool Var<T>::requires_grad() const {
    return tape_ && tape_->nodes_.at(id_).requires_grad;
}

template <typename T>
const ComplexTensor<T>& BackwardContext<T>::grad_output() const {
    return tape_.nodes_[node_].grad;
}

template <typename T>
const ComplexTensor<T>& BackwardContext<T>::output() const {
    return tape_.nodes_[node_].value;
}

template <typename T>
std::size_t BackwardContext<T>::num_inputs() const {
    return tape_.nodes_[node_].inputs.size();
}

template <typename T>
const ComplexTensor<T>& BackwardContext<T>::input(std::size_t i) const {
    return tape_.nodes_[tape_.nodes_[node_].inputs.at(i)].value;
}

template <typename T>
bool BackwardContext<T>::needs_grad(std::size_t i) const {
    return tape_.nodes_[tape_.nodes_[node_].inputs.at(i)].requires_grad;
}

template <typename T>
void BackwardContext<T>::accumulate(std::size_t i, const ComplexTensor<T>& g) {
    auto& in = tape_.nodes_[tape_.nodes_[node_].inputs.at(i)];
    if (!in.requires_grad) return;
    if (g.shape() != in.value.shape())
        throw std::logic_error("backward of '" + tape_.nodes_[node_].op + "': gradient shape " +
                               g.shape().to_string() + " for input of shape " +
                               in.value.shape().to_string());
    if (!in.has_grad) {
        in.grad = g;
        in.has_grad = true;
    } else {
        in.grad.axpy(T(1), g);
    }
}

template <typename T>
typename Tape<T>::Node& Tape<T>::node(const Var<T>& v) {
    if (v.tape() != this) throw std::invalid_argument("Var belongs to a different tape");
    return nodes_.at(v.id());
}

template <typename T>
Var<T> Tape<T>::constant(ComplexTensor<T> value) {
    Node n;
    n.op = "constant";
    n.value = std::move(value);
    nodes_.push_back(std::move(n));
    return Var<T>(this, nodes_.size() - 1);
}

template <typename T>
Var<T> Tape<T>::parameter(Parameter<T>& p) {
    Node n;
    n.op = "parameter:" + p.name;
    n.value = p.value;
    n.requires_grad = grad_enabled_ && p.trainable;
    n.param = &p;
    nodes_.push_back(std::move(n));
    return Var<T>(this, nodes_.size() - 1);
}

template <typename T>
Var<T> Tape<T>::variable(ComplexTensor<T> value) {
    Node n;
    n.op = "variable";
    n.grad = ComplexTensor<T>(value.shape());
    n.value = std::move(value);
    n.requires_grad = grad_enabled_;
    n.keep_grad = true;
    nodes_.push_back(std::move(n));
    return Var<T>(this, nodes_.size() - 1);
}

template <typename T>
Var<T> Tape<T>::record(std::string op, ComplexTensor<T> value, std::vector<Var<T>> inputs,
                       BackwardFn backward) {
    Node n;
    n.op = std::move(op);
    n.value = std::move(value);
    for (const auto& in : inputs) {
        const auto& src = node(in);
        n.inputs.push_back(in.id());
        n.requires_grad = n.requires_grad || src.requires_grad;
    }
    if (n.requires_grad) n.backward = std::move(backward);
    nodes_.push_back(std::move(n));
    return Var<T>(this, nodes_.size() - 1);
}

template <typename T>
void Tape<T>::backward(const Var<T>& loss, T seed) {
    Node& root = node(loss);
    if (root.value.size() != 1)
        throw std::invalid_argument("backward: loss must be a scalar, got shape " +
                                    root.value.shape().to_string());
    if (root.value.im()[0] != T(0))
        throw std::invalid_argument("backward: loss must be real-valued");
    if (!root.requires_grad) return;

    root.grad = ComplexTensor<T>::full(root.value.shape(), {seed, T(0)});
    root.has_grad = true;
    for (std::size_t id = loss.id() + 1; id-- > 0;) {
        Node& n = nodes_[id];
        if (!n.has_grad) continue;
        for (auto in : n.inputs)
            if (in >= id)
                throw std::logic_error("backward: cycle through node '" + n.op + "'");
        if (n.backward) {
            BackwardContext<T> ctx(*this, id);
            n.backward(ctx);
        }
        if (n.param) {
            auto& pg = n.param->grad;
            if (pg.shape() != n.value.shape()) pg = ComplexTensor<T>(n.value.shape());
            pg.axpy(T(1), n.grad);
        }
        if (!n.keep_grad && !n.param) {
            n.grad = ComplexTensor<T>();
            n.has_grad = false;
        }
    }
}

template <typename T>
const ComplexTensor<T>& Tape<T>::grad(const Var<T>& v) const {
    const auto& n = nodes_.at(v.id());
    if (!n.keep_grad) throw std::invalid_argument("grad: only variable() leaves keep gradients");
    return n.grad;
}

template class Var<float>;
template class Var<double>;
template class BackwardContext<float>;
template class BackwardContext<double>;
template class Tape<float>;
template class Tape<double>;

}  // namespace ciris

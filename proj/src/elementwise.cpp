#include <stdexcept>

#include "ciris/layers.hpp"

namespace ciris {

template <typename T>
ComplexTensor<T> zrelu(const ComplexTensor<T>& input) {
    ComplexTensor<T> out(input.shape());
    const T* xr = input.re().data();
    const T* xi = input.im().data();
    T* yr = out.re().data();
    T* yi = out.im().data();
    for (std::size_t i = 0; i < input.size(); ++i) {
        const bool pass = (xr[i] >= T(0)) & (xi[i] >= T(0));
        yr[i] = pass ? xr[i] : T(0);
        yi[i] = pass ? xi[i] : T(0);
    }
    return out;
}

template <typename T>
ComplexTensor<T> zrelu_backward(const ComplexTensor<T>& input, const ComplexTensor<T>& grad_output) {
    require_same_shape(input, grad_output, "zrelu_backward");
    ComplexTensor<T> g(input.shape());
    const T* xr = input.re().data();
    const T* xi = input.im().data();
    for (std::size_t i = 0; i < input.size(); ++i) {
        const bool pass = (xr[i] >= T(0)) & (xi[i] >= T(0));
        g.re()[i] = pass ? grad_output.re()[i] : T(0);
        g.im()[i] = pass ? grad_output.im()[i] : T(0);
    }
    return g;
}

template <typename T>
ComplexTensor<T> real_part(const ComplexTensor<T>& input) {
    return ComplexTensor<T>::from_real(input.shape(),
                                       std::vector<T>(input.re().begin(), input.re().end()));
}

template <typename T>
ComplexTensor<T> concat_channels(const std::vector<const ComplexTensor<T>*>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat_channels: no inputs");
    const Shape& first = parts.front()->shape();
    if (first.rank() == 0) throw std::invalid_argument("concat_channels: rank-0 input");
    const std::size_t lead = first.numel() / first[first.rank() - 1];
    std::size_t total = 0;
    for (const auto* p : parts) {
        const Shape& s = p->shape();
        if (s.rank() != first.rank() || s.numel() / std::max<std::size_t>(1, s[s.rank() - 1]) != lead)
            throw std::invalid_argument("concat_channels: incompatible shapes " + first.to_string() +
                                        " and " + s.to_string());
        for (std::size_t a = 0; a + 1 < s.rank(); ++a)
            if (s[a] != first[a])
                throw std::invalid_argument("concat_channels: incompatible shapes " +
                                            first.to_string() + " and " + s.to_string());
        total += s[s.rank() - 1];
    }
    auto dims = first.dims();
    dims.back() = total;
    ComplexTensor<T> out{Shape(dims)};
    std::size_t offset = 0;
    for (const auto* p : parts) {
        const std::size_t c = p->shape()[first.rank() - 1];
        for (std::size_t r = 0; r < lead; ++r) {
            std::copy_n(p->re().data() + r * c, c, out.re().data() + r * total + offset);
            std::copy_n(p->im().data() + r * c, c, out.im().data() + r * total + offset);
        }
        offset += c;
    }
    return out;
}

template ComplexTensor<float> zrelu(const ComplexTensor<float>&);
template ComplexTensor<double> zrelu(const ComplexTensor<double>&);
template ComplexTensor<float> zrelu_backward(const ComplexTensor<float>&, const ComplexTensor<float>&);
template ComplexTensor<double> zrelu_backward(const ComplexTensor<double>&,
                                              const ComplexTensor<double>&);
template ComplexTensor<float> real_part(const ComplexTensor<float>&);
template ComplexTensor<double> real_part(const ComplexTensor<double>&);
template ComplexTensor<float> concat_channels(const std::vector<const ComplexTensor<float>*>&);
template ComplexTensor<double> concat_channels(const std::vector<const ComplexTensor<double>*>&);

}  // namespace ciris

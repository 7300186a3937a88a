#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ciris/shape.hpp"

namespace ciris {

/// Phase of z in (-pi, pi]; 0 at the origin.
template <typename T>
T phase(std::complex<T> z) {
    if (z.real() == T(0) && z.imag() == T(0)) return T(0);
    T a = std::atan2(z.imag(), z.real());
    // atan2(-0.0, x<0) yields -pi; fold onto the closed end of the interval.
    if (a == -std::numbers::pi_v<T>) a = std::numbers::pi_v<T>;
    return a;
}

template <typename T>
struct RealTensor {
    Shape shape;
    std::vector<T> values;
};

/// Dense complex tensor stored as two contiguous planes (real, imaginary),
/// row-major over `shape`.
template <typename T>
class ComplexTensor {
public:
    using value_type = T;

    ComplexTensor() = default;

    explicit ComplexTensor(Shape shape)
        : shape_(std::move(shape)), re_(shape_.numel(), T(0)), im_(shape_.numel(), T(0)) {}

    ComplexTensor(Shape shape, std::vector<T> re, std::vector<T> im)
        : shape_(std::move(shape)), re_(std::move(re)), im_(std::move(im)) {
        if (re_.size() != shape_.numel() || im_.size() != shape_.numel())
            throw std::invalid_argument("ComplexTensor: plane length does not match shape " +
                                        shape_.to_string());
    }

    static ComplexTensor full(Shape shape, std::complex<T> value) {
        ComplexTensor t(std::move(shape));
        std::fill(t.re_.begin(), t.re_.end(), value.real());
        std::fill(t.im_.begin(), t.im_.end(), value.imag());
        return t;
    }

    static ComplexTensor from_real(Shape shape, std::vector<T> re) {
        std::vector<T> im(re.size(), T(0));
        return ComplexTensor(std::move(shape), std::move(re), std::move(im));
    }

    const Shape& shape() const { return shape_; }
    std::size_t size() const { return re_.size(); }
    bool empty() const { return re_.empty(); }

    std::span<T> re() { return re_; }
    std::span<const T> re() const { return re_; }
    std::span<T> im() { return im_; }
    std::span<const T> im() const { return im_; }

    std::complex<T> at(std::size_t i) const { return {re_[i], im_[i]}; }
    void set(std::size_t i, std::complex<T> v) {
        re_[i] = v.real();
        im_[i] = v.imag();
    }

    /// Reinterpret with a new shape of identical element count.
    ComplexTensor reshaped(Shape shape) const {
        if (shape.numel() != size())
            throw std::invalid_argument("reshape " + shape_.to_string() + " -> " +
                                        shape.to_string());
        return ComplexTensor(std::move(shape), re_, im_);
    }

    void fill_zero() {
        std::fill(re_.begin(), re_.end(), T(0));
        std::fill(im_.begin(), im_.end(), T(0));
    }

    bool is_real() const {
        for (T v : im_)
            if (v != T(0)) return false;
        return true;
    }

    template <typename U>
    ComplexTensor<U> cast() const {
        return ComplexTensor<U>(shape_, std::vector<U>(re_.begin(), re_.end()),
                                std::vector<U>(im_.begin(), im_.end()));
    }

    /// this += alpha * other
    void axpy(T alpha, const ComplexTensor& other) {
        require_same_shape(*this, other, "axpy");
        for (std::size_t i = 0; i < re_.size(); ++i) {
            re_[i] += alpha * other.re_[i];
            im_[i] += alpha * other.im_[i];
        }
    }

    friend void require_same_shape(const ComplexTensor& a, const ComplexTensor& b,
                                   const char* op) {
        if (a.shape_ != b.shape_)
            throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                                        a.shape_.to_string() + " vs " + b.shape_.to_string());
    }

private:
    Shape shape_;
    std::vector<T> re_;
    std::vector<T> im_;
};

template <typename T>
ComplexTensor<T> c_add(const ComplexTensor<T>& a, const ComplexTensor<T>& b) {
    require_same_shape(a, b, "c_add");
    ComplexTensor<T> out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) {
        out.re()[i] = a.re()[i] + b.re()[i];
        out.im()[i] = a.im()[i] + b.im()[i];
    }
    return out;
}

template <typename T>
ComplexTensor<T> c_sub(const ComplexTensor<T>& a, const ComplexTensor<T>& b) {
    require_same_shape(a, b, "c_sub");
    ComplexTensor<T> out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) {
        out.re()[i] = a.re()[i] - b.re()[i];
        out.im()[i] = a.im()[i] - b.im()[i];
    }
    return out;
}

template <typename T>
ComplexTensor<T> c_mul(const ComplexTensor<T>& a, const ComplexTensor<T>& b) {
    require_same_shape(a, b, "c_mul");
    ComplexTensor<T> out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) {
        const T x1 = a.re()[i], y1 = a.im()[i], x2 = b.re()[i], y2 = b.im()[i];
        out.re()[i] = x1 * x2 - y1 * y2;
        out.im()[i] = x1 * y2 + y1 * x2;
    }
    return out;
}

// Scalar broadcast forms.
template <typename T>
ComplexTensor<T> c_add(const ComplexTensor<T>& a, std::complex<T> s) {
    return c_add(a, ComplexTensor<T>::full(a.shape(), s));
}

template <typename T>
ComplexTensor<T> c_sub(const ComplexTensor<T>& a, std::complex<T> s) {
    return c_sub(a, ComplexTensor<T>::full(a.shape(), s));
}

template <typename T>
ComplexTensor<T> c_mul(const ComplexTensor<T>& a, std::complex<T> s) {
    return c_mul(a, ComplexTensor<T>::full(a.shape(), s));
}

template <typename T>
RealTensor<T> c_abs(const ComplexTensor<T>& a) {
    RealTensor<T> out{a.shape(), std::vector<T>(a.size())};
    for (std::size_t i = 0; i < a.size(); ++i) out.values[i] = std::hypot(a.re()[i], a.im()[i]);
    return out;
}

template <typename T>
RealTensor<T> c_arg(const ComplexTensor<T>& a) {
    RealTensor<T> out{a.shape(), std::vector<T>(a.size())};
    for (std::size_t i = 0; i < a.size(); ++i) out.values[i] = phase(a.at(i));
    return out;
}

/// Sum of squared moduli over all elements.
template <typename T>
double squared_norm(const ComplexTensor<T>& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += double(a.re()[i]) * a.re()[i] + double(a.im()[i]) * a.im()[i];
    return s;
}

/// 2-D transform over the spatial axes of a (H,W), (H,W,C) or (N,H,W,C)
/// tensor, applied independently per sample and channel. Forward is
/// unnormalized; the inverse carries 1/(H*W).
template <typename T>
ComplexTensor<T> fft2(const ComplexTensor<T>& a);
template <typename T>
ComplexTensor<T> ifft2(const ComplexTensor<T>& a);

/// Spatial layout helper for the tensor ranks accepted by fft2 and the
/// feature-map operations.
struct SpatialLayout {
    std::size_t batch = 1, height = 0, width = 0, channels = 1;

    static SpatialLayout of(const Shape& s) {
        switch (s.rank()) {
            case 2: return {1, s[0], s[1], 1};
            case 3: return {1, s[0], s[1], s[2]};
            case 4: return {s[0], s[1], s[2], s[3]};
            default:
                throw std::invalid_argument("expected rank 2, 3 or 4 spatial tensor, got " +
                                            s.to_string());
        }
    }
};

}  // namespace ciris

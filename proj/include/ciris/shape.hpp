#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace ciris {

/// Ordered tensor extents. Feature maps are (H, W, C) or (N, H, W, C);
/// kernels are (kH, kW, Cin, Cout).
class Shape {
public:
    Shape() = default;
    Shape(std::initializer_list<std::size_t> dims) : dims_(dims) {}
    explicit Shape(std::vector<std::size_t> dims) : dims_(std::move(dims)) {}

    std::size_t rank() const { return dims_.size(); }
    std::size_t operator[](std::size_t axis) const { return dims_.at(axis); }
    const std::vector<std::size_t>& dims() const { return dims_; }

    std::size_t numel() const {
        std::size_t n = 1;
        for (auto d : dims_) n *= d;
        return n;
    }

    std::string to_string() const {
        std::string s = "(";
        for (std::size_t i = 0; i < dims_.size(); ++i) {
            if (i) s += "x";
            s += std::to_string(dims_[i]);
        }
        return s + ")";
    }

    friend bool operator==(const Shape&, const Shape&) = default;

private:
    std::vector<std::size_t> dims_;
};

}  // namespace ciris

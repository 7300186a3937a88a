#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ciris {

/// Row-major binary grid; 1 marks a valid cell.
class BinaryGrid {
public:
    BinaryGrid() = default;
    BinaryGrid(std::size_t rows, std::size_t cols, std::uint8_t fill = 1)
        : rows_(rows), cols_(cols), cells_(rows * cols, fill ? 1 : 0) {}

    static BinaryGrid full(std::size_t rows, std::size_t cols) { return {rows, cols, 1}; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return cells_.size(); }

    bool at(std::size_t r, std::size_t c) const { return cells_[r * cols_ + c] != 0; }
    void set(std::size_t r, std::size_t c, bool v) { cells_[r * cols_ + c] = v ? 1 : 0; }
    std::uint8_t operator[](std::size_t i) const { return cells_[i]; }
    const std::vector<std::uint8_t>& cells() const { return cells_; }

    std::size_t count() const {
        std::size_t n = 0;
        for (auto v : cells_) n += v;
        return n;
    }

    /// Circular roll along columns: out(r, c) = in(r, c - shift).
    BinaryGrid rolled(int shift) const {
        BinaryGrid out(rows_, cols_, 0);
        const long w = long(cols_);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t c = 0; c < cols_; ++c) {
                const long src = ((long(c) - shift) % w + w) % w;
                out.cells_[r * cols_ + c] = cells_[r * cols_ + std::size_t(src)];
            }
        return out;
    }

    /// Block-majority downsampling: a cell is valid when more than half of
    /// its source block is valid. Extents must divide evenly.
    BinaryGrid downsampled(std::size_t rows, std::size_t cols) const {
        if (rows == 0 || cols == 0 || rows_ % rows || cols_ % cols)
            throw std::invalid_argument("mask " + std::to_string(rows_) + "x" +
                                        std::to_string(cols_) + " cannot be block-reduced to " +
                                        std::to_string(rows) + "x" + std::to_string(cols));
        const std::size_t bh = rows_ / rows, bw = cols_ / cols;
        BinaryGrid out(rows, cols, 0);
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c) {
                std::size_t n = 0;
                for (std::size_t y = 0; y < bh; ++y)
                    for (std::size_t x = 0; x < bw; ++x) n += at(r * bh + y, c * bw + x);
                out.set(r, c, 2 * n > bh * bw);
            }
        return out;
    }

    friend BinaryGrid operator&(const BinaryGrid& a, const BinaryGrid& b) {
        if (a.rows_ != b.rows_ || a.cols_ != b.cols_)
            throw std::invalid_argument("mask extents differ");
        BinaryGrid out(a.rows_, a.cols_, 0);
        for (std::size_t i = 0; i < a.cells_.size(); ++i) out.cells_[i] = a.cells_[i] & b.cells_[i];
        return out;
    }

    friend bool operator==(const BinaryGrid&, const BinaryGrid&) = default;

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<std::uint8_t> cells_;
};

}  // namespace ciris

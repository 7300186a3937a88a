#include <Eigen/Core>
#include <stdexcept>
#include <string>

#include "ciris/layers.hpp"
#include "ciris/parallel.hpp"

namespace ciris {

std::size_t ConvGeometry::out_extent(std::size_t in, std::size_t k, std::size_t stride,
                                     std::size_t pad) const {
    if (stride == 0) throw std::invalid_argument("convolution stride must be positive");
    if (k > in + 2 * pad)
        throw std::invalid_argument("kernel extent " + std::to_string(k) +
                                    " exceeds padded input " + std::to_string(in + 2 * pad));
    return (in + 2 * pad - k) / stride + 1;
}

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using ConstMap = Eigen::Map<const RowMat<T>>;
template <typename T>
using MutMap = Eigen::Map<RowMat<T>>;

struct ConvDims {
    std::size_t n, h, w, cin, kh, kw, cout, h2, w2;
    std::size_t sh, sw, ph, pw;
    bool batched;

    std::size_t rows() const { return h2 * w2; }
    std::size_t depth() const { return kh * kw * cin; }
    std::size_t in_stride() const { return h * w * cin; }
    std::size_t out_stride() const { return h2 * w2 * cout; }
    bool pointwise() const { return kh == 1 && kw == 1 && sh == 1 && sw == 1 && ph == 0 && pw == 0; }
};

template <typename T>
ConvDims resolve(const Shape& in, const ConvSpec<T>& spec) {
    const Shape& k = spec.kernel.shape();
    if (k.rank() != 4)
        throw std::invalid_argument("conv kernel must be (kH,kW,Cin,Cout), got " + k.to_string());
    if (in.rank() != 3 && in.rank() != 4)
        throw std::invalid_argument("conv input must be (H,W,C) or (N,H,W,C), got " +
                                    in.to_string());
    ConvDims d{};
    d.batched = in.rank() == 4;
    d.n = d.batched ? in[0] : 1;
    d.h = in[in.rank() - 3];
    d.w = in[in.rank() - 2];
    d.cin = in[in.rank() - 1];
    d.kh = k[0];
    d.kw = k[1];
    d.cout = k[3];
    if (k[2] != d.cin)
        throw std::invalid_argument("conv channel mismatch: input " + in.to_string() +
                                    " vs kernel " + k.to_string());
    const auto& g = spec.geometry;
    d.sh = g.stride_h;
    d.sw = g.stride_w;
    d.ph = g.pad_h;
    d.pw = g.pad_w;
    d.h2 = g.out_extent(d.h, d.kh, d.sh, d.ph);
    d.w2 = g.out_extent(d.w, d.kw, d.sw, d.pw);
    return d;
}

Shape output_shape(const ConvDims& d) {
    return d.batched ? Shape{d.n, d.h2, d.w2, d.cout} : Shape{d.h2, d.w2, d.cout};
}

// Unfolds output rows [r0, r1) of one plane into a row-major tile with
// leading dimension `ld`, starting at column `col0`:
// tile[p - r0, col0 + (ky*kW + kx)*Cin + ci] = plane[oy*S - P + ky, ox*S - P + kx, ci]
template <typename T>
void im2col_rows(const T* plane, const ConvDims& d, std::size_t r0, std::size_t r1, T* tile,
                 std::size_t ld, std::size_t col0) {
    for (std::size_t p = r0; p < r1; ++p) {
        const std::size_t oy = p / d.w2, ox = p % d.w2;
        T* row = tile + (p - r0) * ld + col0;
        for (std::size_t ky = 0; ky < d.kh; ++ky) {
            const long iy = long(oy * d.sh + ky) - long(d.ph);
            for (std::size_t kx = 0; kx < d.kw; ++kx) {
                const long ix = long(ox * d.sw + kx) - long(d.pw);
                T* dst = row + (ky * d.kw + kx) * d.cin;
                if (iy < 0 || ix < 0 || iy >= long(d.h) || ix >= long(d.w)) {
                    std::fill(dst, dst + d.cin, T(0));
                } else {
                    const T* src = plane + (std::size_t(iy) * d.w + std::size_t(ix)) * d.cin;
                    std::copy(src, src + d.cin, dst);
                }
            }
        }
    }
}

// Adjoint of im2col_rows: scatters tile columns [col0, col0 + depth) back.
template <typename T>
void col2im_rows_add(const T* tile, const ConvDims& d, std::size_t r0, std::size_t r1,
                     std::size_t ld, std::size_t col0, T* plane) {
    for (std::size_t p = r0; p < r1; ++p) {
        const std::size_t oy = p / d.w2, ox = p % d.w2;
        const T* row = tile + (p - r0) * ld + col0;
        for (std::size_t ky = 0; ky < d.kh; ++ky) {
            const long iy = long(oy * d.sh + ky) - long(d.ph);
            if (iy < 0 || iy >= long(d.h)) continue;
            for (std::size_t kx = 0; kx < d.kw; ++kx) {
                const long ix = long(ox * d.sw + kx) - long(d.pw);
                if (ix < 0 || ix >= long(d.w)) continue;
                const T* src = row + (ky * d.kw + kx) * d.cin;
                T* dst = plane + (std::size_t(iy) * d.w + std::size_t(ix)) * d.cin;
                for (std::size_t c = 0; c < d.cin; ++c) dst[c] += src[c];
            }
        }
    }
}

// Rows per tile so an unfolded tile stays cache resident.
std::size_t tile_rows(const ConvDims& d, std::size_t width) {
    const std::size_t r = std::max<std::size_t>(64, (std::size_t(1) << 17) / std::max<std::size_t>(width, 1));
    return std::min(r, d.rows());
}

// Real block form of the kernel: [[Kr, Ki], [-Ki, Kr]] (2D x 2Co), or only
// its top half [Kr, Ki] when the input is real.
template <typename T>
RowMat<T> block_kernel(const ComplexTensor<T>& k, const ConvDims& d, bool top_only) {
    const std::size_t D = d.depth(), co = d.cout;
    RowMat<T> b(top_only ? D : 2 * D, 2 * co);
    const ConstMap<T> kr(k.re().data(), D, co), ki(k.im().data(), D, co);
    b.topLeftCorner(D, co) = kr;
    b.topRightCorner(D, co) = ki;
    if (!top_only) {
        b.bottomLeftCorner(D, co) = -ki;
        b.bottomRightCorner(D, co) = kr;
    }
    return b;
}

}  // namespace

template <typename T>
ComplexTensor<T> complex_conv2d(const ComplexTensor<T>& input, const ConvSpec<T>& spec) {
    const ConvDims d = resolve(input.shape(), spec);
    ComplexTensor<T> out(output_shape(d));
    const bool input_real = input.is_real();
    const bool kernel_real = spec.kernel.is_real();

    if (d.pointwise()) {
        // The input already is the column matrix.
        const ConstMap<T> kr(spec.kernel.re().data(), d.depth(), d.cout);
        const ConstMap<T> ki(spec.kernel.im().data(), d.depth(), d.cout);
        const ConstMap<T> ar(input.re().data(), d.n * d.rows(), d.depth());
        const ConstMap<T> ai(input.im().data(), d.n * d.rows(), d.depth());
        MutMap<T> out_re(out.re().data(), d.n * d.rows(), d.cout);
        MutMap<T> out_im(out.im().data(), d.n * d.rows(), d.cout);
        out_re.noalias() = ar * kr;
        if (!kernel_real) out_im.noalias() = ar * ki;
        if (!input_real) {
            if (!kernel_real) out_re.noalias() -= ai * ki;
            out_im.noalias() += ai * kr;
        }
        return out;
    }

    const std::size_t D = d.depth(), width = input_real ? D : 2 * D;
    const RowMat<T> kb = block_kernel(spec.kernel, d, input_real);
    const std::size_t tr = tile_rows(d, width);

    parallel_for(d.n, [&](std::size_t n) {
        RowMat<T> tile(tr, width), res(tr, 2 * d.cout);
        const T* pr = input.re().data() + n * d.in_stride();
        const T* pi = input.im().data() + n * d.in_stride();
        T* o_re = out.re().data() + n * d.out_stride();
        T* o_im = out.im().data() + n * d.out_stride();
        for (std::size_t r0 = 0; r0 < d.rows(); r0 += tr) {
            const std::size_t r1 = std::min(d.rows(), r0 + tr), m = r1 - r0;
            im2col_rows(pr, d, r0, r1, tile.data(), width, 0);
            if (!input_real) im2col_rows(pi, d, r0, r1, tile.data(), width, D);
            res.topRows(m).noalias() = tile.topRows(m) * kb;
            for (std::size_t p = 0; p < m; ++p) {
                const T* src = res.data() + p * 2 * d.cout;
                std::copy(src, src + d.cout, o_re + (r0 + p) * d.cout);
                std::copy(src + d.cout, src + 2 * d.cout, o_im + (r0 + p) * d.cout);
            }
        }
    });
    return out;
}

template <typename T>
ConvGradients<T> complex_conv2d_backward(const ComplexTensor<T>& input, const ConvSpec<T>& spec,
                                         const ComplexTensor<T>& grad_output, bool want_input,
                                         bool want_kernel) {
    const ConvDims d = resolve(input.shape(), spec);
    if (grad_output.shape() != output_shape(d))
        throw std::invalid_argument("conv backward: gradient shape " +
                                    grad_output.shape().to_string() + " does not match output " +
                                    output_shape(d).to_string());
    const bool input_real = input.is_real();
    const std::size_t D = d.depth(), co = d.cout;

    ConvGradients<T> g;
    if (want_input) g.input = ComplexTensor<T>(input.shape());
    if (want_kernel) g.kernel = ComplexTensor<T>(spec.kernel.shape());

    if (d.pointwise()) {
        const bool kernel_real = spec.kernel.is_real();
        const ConstMap<T> kr(spec.kernel.re().data(), D, co);
        const ConstMap<T> ki(spec.kernel.im().data(), D, co);
        const std::size_t rows = d.n * d.rows();
        const ConstMap<T> g_re(grad_output.re().data(), rows, co);
        const ConstMap<T> g_im(grad_output.im().data(), rows, co);
        if (want_kernel) {
            const ConstMap<T> ar(input.re().data(), rows, D);
            const ConstMap<T> ai(input.im().data(), rows, D);
            MutMap<T> dk_r(g.kernel.re().data(), D, co), dk_i(g.kernel.im().data(), D, co);
            dk_r.noalias() = ar.transpose() * g_re;
            dk_i.noalias() = ar.transpose() * g_im;
            if (!input_real) {
                dk_r.noalias() += ai.transpose() * g_im;
                dk_i.noalias() -= ai.transpose() * g_re;
            }
        }
        if (want_input) {
            MutMap<T> da_r(g.input.re().data(), rows, D), da_i(g.input.im().data(), rows, D);
            da_r.noalias() = g_re * kr.transpose();
            da_i.noalias() = g_im * kr.transpose();
            if (!kernel_real) {
                da_r.noalias() += g_im * ki.transpose();
                da_i.noalias() -= g_re * ki.transpose();
            }
        }
        return g;
    }

    // Kernel gradient uses the (possibly halved) input columns; the input
    // gradient always needs both planes.
    const std::size_t kwidth = input_real ? D : 2 * D;
    const RowMat<T> kb = want_input ? block_kernel(spec.kernel, d, false) : RowMat<T>();
    const std::size_t tr = tile_rows(d, 2 * D);
    std::vector<RowMat<T>> partial(want_kernel ? d.n : 0);

    parallel_for(d.n, [&](std::size_t n) {
        RowMat<T> gt(tr, 2 * co), tile, dtile;
        if (want_kernel) {
            tile.resize(tr, kwidth);
            partial[n] = RowMat<T>::Zero(kwidth, 2 * co);
        }
        if (want_input) dtile.resize(tr, 2 * D);
        const T* pr = input.re().data() + n * d.in_stride();
        const T* pi = input.im().data() + n * d.in_stride();
        const T* g_re = grad_output.re().data() + n * d.out_stride();
        const T* g_im = grad_output.im().data() + n * d.out_stride();
        for (std::size_t r0 = 0; r0 < d.rows(); r0 += tr) {
            const std::size_t r1 = std::min(d.rows(), r0 + tr), m = r1 - r0;
            for (std::size_t p = 0; p < m; ++p) {
                T* dst = gt.data() + p * 2 * co;
                std::copy_n(g_re + (r0 + p) * co, co, dst);
                std::copy_n(g_im + (r0 + p) * co, co, dst + co);
            }
            if (want_kernel) {
                im2col_rows(pr, d, r0, r1, tile.data(), kwidth, 0);
                if (!input_real) im2col_rows(pi, d, r0, r1, tile.data(), kwidth, D);
                partial[n].noalias() += tile.topRows(m).transpose() * gt.topRows(m);
            }
            if (want_input) {
                dtile.topRows(m).noalias() = gt.topRows(m) * kb.transpose();
                col2im_rows_add(dtile.data(), d, r0, r1, 2 * D, 0,
                                g.input.re().data() + n * d.in_stride());
                col2im_rows_add(dtile.data(), d, r0, r1, 2 * D, D,
                                g.input.im().data() + n * d.in_stride());
            }
        }
    });

    if (want_kernel) {
        RowMat<T> total = RowMat<T>::Zero(kwidth, 2 * co);
        for (std::size_t n = 0; n < d.n; ++n) total += partial[n];
        MutMap<T> dk_r(g.kernel.re().data(), D, co), dk_i(g.kernel.im().data(), D, co);
        dk_r = total.topLeftCorner(D, co);
        dk_i = total.topRightCorner(D, co);
        if (!input_real) {
            dk_r += total.bottomRightCorner(D, co);
            dk_i -= total.bottomLeftCorner(D, co);
        }
    }
    return g;
}

template ComplexTensor<float> complex_conv2d(const ComplexTensor<float>&, const ConvSpec<float>&);
template ComplexTensor<double> complex_conv2d(const ComplexTensor<double>&,
                                              const ConvSpec<double>&);
template ConvGradients<float> complex_conv2d_backward(const ComplexTensor<float>&,
                                                      const ConvSpec<float>&,
                                                      const ComplexTensor<float>&, bool, bool);
template ConvGradients<double> complex_conv2d_backward(const ComplexTensor<double>&,
                                                       const ConvSpec<double>&,
                                                       const ComplexTensor<double>&, bool, bool);

}  // namespace ciris

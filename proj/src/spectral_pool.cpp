#include <stdexcept>
#include <string>

#include "ciris/fft.hpp"
#include "ciris/layers.hpp"

namespace ciris {

namespace {

// Frequency represented by index i of a length-s spectrum whose window is
// centered on DC, extra slot on the negative side when s is even.
long window_frequency(std::size_t i, std::size_t s) {
    const std::size_t neg = s / 2;
    return i < s - neg ? long(i) : long(i) - long(s);
}

std::size_t wrap(long k, std::size_t n) {
    const long m = long(n);
    return std::size_t(((k % m) + m) % m);
}

// Transform, crop or zero-pad each spatial axis to the target extent,
// normalized inverse transform at the target size, multiply by `scale`.
template <typename T>
ComplexTensor<T> resample_spectrum(const ComplexTensor<T>& x, std::size_t out_h,
                                   std::size_t out_w, double scale) {
    const auto lay = SpatialLayout::of(x.shape());
    const std::size_t h = lay.height, w = lay.width, c = lay.channels;
    if (out_h == 0 || out_w == 0) throw std::invalid_argument("spectral resample to empty extent");

    Shape out_shape = x.shape().rank() == 4   ? Shape{lay.batch, out_h, out_w, c}
                      : x.shape().rank() == 3 ? Shape{out_h, out_w, c}
                                              : Shape{out_h, out_w};
    ComplexTensor<T> out(out_shape);

    // Index maps between the two spectra along each axis, over the smaller window.
    auto axis_map = [](std::size_t from, std::size_t to) {
        const std::size_t s = std::min(from, to);
        std::vector<std::pair<std::size_t, std::size_t>> m(s);
        for (std::size_t i = 0; i < s; ++i) {
            const long k = window_frequency(i, s);
            m[i] = {wrap(k, from), wrap(k, to)};
        }
        return m;
    };
    const auto rows = axis_map(h, out_h);
    const auto cols = axis_map(w, out_w);

    // Separable: transform, crop/pad and inverse-transform along W, then H,
    // with all channels of a row processed together.
    const auto plan_w = FftPlan::get(w), plan_ow = FftPlan::get(out_w);
    const auto plan_h = FftPlan::get(h), plan_oh = FftPlan::get(out_h);
    const double k = scale / double(out_h * out_w);
    std::vector<double> ar(h * w * c), ai(h * w * c);
    std::vector<double> br(h * out_w * c), bi(h * out_w * c);
    std::vector<double> cr(out_h * out_w * c), ci(out_h * out_w * c);
    for (std::size_t n = 0; n < lay.batch; ++n) {
        const std::size_t in_base = n * h * w * c, out_base = n * out_h * out_w * c;
        std::copy_n(x.re().data() + in_base, h * w * c, ar.begin());
        std::copy_n(x.im().data() + in_base, h * w * c, ai.begin());
        std::fill(br.begin(), br.end(), 0.0);
        std::fill(bi.begin(), bi.end(), 0.0);
        for (std::size_t y = 0; y < h; ++y) {
            double* sr = ar.data() + y * w * c;
            double* si = ai.data() + y * w * c;
            plan_w->lines(sr, si, c, false);
            double* dr = br.data() + y * out_w * c;
            double* di = bi.data() + y * out_w * c;
            for (const auto& [sx, dx] : cols) {
                std::copy_n(sr + sx * c, c, dr + dx * c);
                std::copy_n(si + sx * c, c, di + dx * c);
            }
            plan_ow->lines(dr, di, c, true);
        }
        const std::size_t row = out_w * c;
        plan_h->lines(br.data(), bi.data(), row, false);
        std::fill(cr.begin(), cr.end(), 0.0);
        std::fill(ci.begin(), ci.end(), 0.0);
        for (const auto& [sy, dy] : rows) {
            std::copy_n(br.data() + sy * row, row, cr.data() + dy * row);
            std::copy_n(bi.data() + sy * row, row, ci.data() + dy * row);
        }
        plan_oh->lines(cr.data(), ci.data(), row, true);
        for (std::size_t i = 0; i < out_h * row; ++i) {
            out.re()[out_base + i] = T(cr[i] * k);
            out.im()[out_base + i] = T(ci[i] * k);
        }
    }
    return out;
}

}  // namespace

template <typename T>
ComplexTensor<T> spectral_pool(const ComplexTensor<T>& input, std::size_t out_h,
                               std::size_t out_w) {
    const auto lay = SpatialLayout::of(input.shape());
    if (out_h < 1 || out_w < 1 || out_h > lay.height || out_w > lay.width)
        throw std::invalid_argument("spectral_pool: requested " + std::to_string(out_h) + "x" +
                                    std::to_string(out_w) + " from input " +
                                    input.shape().to_string());
    const double scale = double(out_h * out_w) / double(lay.height * lay.width);
    return resample_spectrum(input, out_h, out_w, scale);
}

template <typename T>
ComplexTensor<T> spectral_pool_backward(const ComplexTensor<T>& grad_output, std::size_t in_h,
                                        std::size_t in_w) {
    const auto lay = SpatialLayout::of(grad_output.shape());
    if (in_h < lay.height || in_w < lay.width)
        throw std::invalid_argument("spectral_pool_backward: input smaller than output");
    return resample_spectrum(grad_output, in_h, in_w, 1.0);
}

template <typename T>
ComplexTensor<T> spectral_upsample(const ComplexTensor<T>& input, std::size_t out_h,
                                   std::size_t out_w) {
    const auto lay = SpatialLayout::of(input.shape());
    if (out_h < lay.height || out_w < lay.width)
        throw std::invalid_argument("spectral_upsample: target smaller than input");
    const double scale = double(out_h * out_w) / double(lay.height * lay.width);
    return resample_spectrum(input, out_h, out_w, scale);
}

template ComplexTensor<float> spectral_pool(const ComplexTensor<float>&, std::size_t, std::size_t);
template ComplexTensor<double> spectral_pool(const ComplexTensor<double>&, std::size_t,
                                             std::size_t);
template ComplexTensor<float> spectral_pool_backward(const ComplexTensor<float>&, std::size_t,
                                                     std::size_t);
template ComplexTensor<double> spectral_pool_backward(const ComplexTensor<double>&, std::size_t,
                                                      std::size_t);
template ComplexTensor<float> spectral_upsample(const ComplexTensor<float>&, std::size_t,
                                                std::size_t);
template ComplexTensor<double> spectral_upsample(const ComplexTensor<double>&, std::size_t,
                                                 std::size_t);

}  // namespace ciris

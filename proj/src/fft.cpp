#include "ciris/fft.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "ciris/ctensor.hpp"

namespace ciris {

namespace {

bool is_pow2(std::size_t n) { return n && !(n & (n - 1)); }

std::size_t next_pow2(std::size_t n) {
    std::size_t m = 1;
    while (m < n) m <<= 1;
    return m;
}

}  // namespace

FftPlan::FftPlan(std::size_t n) : n_(n), pow2_(is_pow2(n)) {
    if (n == 0) throw std::invalid_argument("FFT length must be positive");
    if (pow2_) {
        twiddles_.resize(n / 2);
        for (std::size_t k = 0; k < n / 2; ++k)
            twiddles_[k] = std::polar(1.0, -2.0 * std::numbers::pi * double(k) / double(n));
        bitrev_.resize(n);
        std::size_t bits = 0;
        while ((std::size_t(1) << bits) < n) ++bits;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t r = 0;
            for (std::size_t b = 0; b < bits; ++b)
                if (i & (std::size_t(1) << b)) r |= std::size_t(1) << (bits - 1 - b);
            bitrev_[i] = r;
        }
        return;
    }
    // Bluestein: jk = (j^2 + k^2 - (k-j)^2)/2. k^2 is reduced mod 2n before
    // the angle is formed so large lengths keep full phase accuracy.
    const std::size_t m = next_pow2(2 * n - 1);
    chirp_.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t k2 = (k * k) % (2 * n);
        chirp_[k] = std::polar(1.0, -std::numbers::pi * double(k2) / double(n));
    }
    inner_ = get(m);
    chirp_fft_.assign(m, {0.0, 0.0});
    chirp_fft_[0] = std::conj(chirp_[0]);
    for (std::size_t k = 1; k < n; ++k) {
        chirp_fft_[k] = std::conj(chirp_[k]);
        chirp_fft_[m - k] = std::conj(chirp_[k]);
    }
    inner_->forward(chirp_fft_);
}

std::shared_ptr<const FftPlan> FftPlan::get(std::size_t n) {
    static std::mutex mutex;
    static std::map<std::size_t, std::shared_ptr<const FftPlan>> cache;
    {
        std::lock_guard lock(mutex);
        if (auto it = cache.find(n); it != cache.end()) return it->second;
    }
    // Built outside the lock: a Bluestein plan recursively requests its
    // power-of-two inner plan.
    auto plan = std::make_shared<const FftPlan>(n);
    std::lock_guard lock(mutex);
    return cache.emplace(n, std::move(plan)).first->second;
}

void FftPlan::forward(std::span<std::complex<double>> data) const {
    if (data.size() != n_) throw std::invalid_argument("FFT buffer length mismatch");
    if (n_ == 1) return;
    if (pow2_)
        radix2(data);
    else
        bluestein(data);
}

void FftPlan::backward(std::span<std::complex<double>> data) const {
    for (auto& v : data) v = std::conj(v);
    forward(data);
    for (auto& v : data) v = std::conj(v);
}

void FftPlan::radix2(std::span<std::complex<double>> a) const {
    for (std::size_t i = 0; i < n_; ++i)
        if (i < bitrev_[i]) std::swap(a[i], a[bitrev_[i]]);
    for (std::size_t len = 2; len <= n_; len <<= 1) {
        const std::size_t half = len / 2;
        const std::size_t step = n_ / len;
        for (std::size_t start = 0; start < n_; start += len) {
            for (std::size_t j = 0; j < half; ++j) {
                const auto w = twiddles_[j * step];
                const auto u = a[start + j];
                const auto v = a[start + j + half] * w;
                a[start + j] = u + v;
                a[start + j + half] = u - v;
            }
        }
    }
}

void FftPlan::bluestein(std::span<std::complex<double>> data) const {
    const std::size_t m = chirp_fft_.size();
    std::vector<std::complex<double>> buf(m, {0.0, 0.0});
    for (std::size_t k = 0; k < n_; ++k) buf[k] = data[k] * chirp_[k];
    inner_->forward(buf);
    for (std::size_t k = 0; k < m; ++k) buf[k] *= chirp_fft_[k];
    inner_->backward(buf);
    const double scale = 1.0 / double(m);
    for (std::size_t k = 0; k < n_; ++k) data[k] = buf[k] * scale * chirp_[k];
}

void FftPlan::lines(double* re, double* im, std::size_t inner, bool inverse) const {
    if (n_ == 1 || inner == 0) return;
    if (!pow2_) {
        std::vector<std::complex<double>> line(n_);
        for (std::size_t c = 0; c < inner; ++c) {
            for (std::size_t k = 0; k < n_; ++k) line[k] = {re[k * inner + c], im[k * inner + c]};
            inverse ? backward(line) : forward(line);
            for (std::size_t k = 0; k < n_; ++k) {
                re[k * inner + c] = line[k].real();
                im[k * inner + c] = line[k].imag();
            }
        }
        return;
    }
    for (std::size_t i = 0; i < n_; ++i) {
        const std::size_t j = bitrev_[i];
        if (i < j) {
            std::swap_ranges(re + i * inner, re + (i + 1) * inner, re + j * inner);
            std::swap_ranges(im + i * inner, im + (i + 1) * inner, im + j * inner);
        }
    }
    const double sign = inverse ? -1.0 : 1.0;
    for (std::size_t len = 2; len <= n_; len <<= 1) {
        const std::size_t half = len / 2, step = n_ / len;
        for (std::size_t start = 0; start < n_; start += len) {
            for (std::size_t j = 0; j < half; ++j) {
                const double wr = twiddles_[j * step].real(), wi = sign * twiddles_[j * step].imag();
                double* ur = re + (start + j) * inner;
                double* ui = im + (start + j) * inner;
                double* vr = re + (start + j + half) * inner;
                double* vi = im + (start + j + half) * inner;
                for (std::size_t c = 0; c < inner; ++c) {
                    const double tr = vr[c] * wr - vi[c] * wi;
                    const double ti = vr[c] * wi + vi[c] * wr;
                    vr[c] = ur[c] - tr;
                    vi[c] = ui[c] - ti;
                    ur[c] += tr;
                    ui[c] += ti;
                }
            }
        }
    }
}

void fft2_plane(std::span<std::complex<double>> plane, std::size_t h, std::size_t w,
                bool inverse) {
    if (h == 0 || w == 0) throw std::invalid_argument("fft2: zero-sized axis");
    if (plane.size() != h * w) throw std::invalid_argument("fft2: plane size mismatch");
    const auto row_plan = FftPlan::get(w);
    const auto col_plan = FftPlan::get(h);
    for (std::size_t y = 0; y < h; ++y) {
        auto row = plane.subspan(y * w, w);
        inverse ? row_plan->backward(row) : row_plan->forward(row);
    }
    std::vector<std::complex<double>> col(h);
    for (std::size_t x = 0; x < w; ++x) {
        for (std::size_t y = 0; y < h; ++y) col[y] = plane[y * w + x];
        inverse ? col_plan->backward(col) : col_plan->forward(col);
        for (std::size_t y = 0; y < h; ++y) plane[y * w + x] = col[y];
    }
    if (inverse) {
        const double scale = 1.0 / double(h * w);
        for (auto& v : plane) v *= scale;
    }
}

namespace {

template <typename T>
ComplexTensor<T> transform(const ComplexTensor<T>& a, bool inverse) {
    const auto lay = SpatialLayout::of(a.shape());
    const std::size_t h = lay.height, w = lay.width, c = lay.channels;
    if (h == 0 || w == 0) throw std::invalid_argument("fft2: zero-sized axis in " + a.shape().to_string());
    ComplexTensor<T> out(a.shape());
    const std::size_t plane = h * w * c;
    if (plane == 0) return out;
    const auto row_plan = FftPlan::get(w);
    const auto col_plan = FftPlan::get(h);
    std::vector<double> re(plane), im(plane);
    const double scale = inverse ? 1.0 / double(h * w) : 1.0;
    for (std::size_t n = 0; n < lay.batch; ++n) {
        const std::size_t base = n * plane;
        std::copy_n(a.re().data() + base, plane, re.begin());
        std::copy_n(a.im().data() + base, plane, im.begin());
        for (std::size_t y = 0; y < h; ++y)
            row_plan->lines(re.data() + y * w * c, im.data() + y * w * c, c, inverse);
        col_plan->lines(re.data(), im.data(), w * c, inverse);
        for (std::size_t i = 0; i < plane; ++i) {
            out.re()[base + i] = T(re[i] * scale);
            out.im()[base + i] = T(im[i] * scale);
        }
    }
    return out;
}

}  // namespace

template <typename T>
ComplexTensor<T> fft2(const ComplexTensor<T>& a) {
    return transform(a, false);
}

template <typename T>
ComplexTensor<T> ifft2(const ComplexTensor<T>& a) {
    return transform(a, true);
}

template ComplexTensor<float> fft2(const ComplexTensor<float>&);
template ComplexTensor<double> fft2(const ComplexTensor<double>&);
template ComplexTensor<float> ifft2(const ComplexTensor<float>&);
template ComplexTensor<double> ifft2(const ComplexTensor<double>&);

}  // namespace ciris

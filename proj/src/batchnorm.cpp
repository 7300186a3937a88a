#include <cmath>
#include <vector>
#include <stdexcept>
#include <string>

#include "ciris/layers.hpp"

namespace ciris {

Mat2 sqrt_spd(const Mat2& m) {
    // sqrt(A) = (A + s I) / t, s = sqrt(det A), t = sqrt(tr A + 2 s)
    const double det = std::max(0.0, m.a * m.d - m.b * m.c);
    const double s = std::sqrt(det);
    const double t = std::sqrt(m.a + m.d + 2 * s);
    if (!(t > 0)) throw std::domain_error("sqrt_spd: matrix is not positive definite");
    return {(m.a + s) / t, m.b / t, m.c / t, (m.d + s) / t};
}

Mat2 inverse(const Mat2& m) {
    const double det = m.a * m.d - m.b * m.c;
    if (det == 0) throw std::domain_error("inverse: singular 2x2 matrix");
    return {m.d / det, -m.b / det, -m.c / det, m.a / det};
}

Mat2 solve_sylvester(const Mat2& s, const Mat2& g) {
    // Unknowns (x1, x2, x3, x4) = X row-major; rows of (I (x) S + S^T (x) I).
    double a[4][5] = {
        {s.a + s.a, s.c, s.b, 0, g.a},
        {s.b, s.a + s.d, 0, s.b, g.b},
        {s.c, 0, s.a + s.d, s.c, g.c},
        {0, s.c, s.b, s.d + s.d, g.d},
    };
    for (int col = 0; col < 4; ++col) {
        int piv = col;
        for (int r = col + 1; r < 4; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        if (a[piv][col] == 0) throw std::domain_error("solve_sylvester: singular system");
        if (piv != col)
            for (int k = 0; k < 5; ++k) std::swap(a[piv][k], a[col][k]);
        for (int r = 0; r < 4; ++r) {
            if (r == col) continue;
            const double f = a[r][col] / a[col][col];
            for (int k = col; k < 5; ++k) a[r][k] -= f * a[col][k];
        }
    }
    return {a[0][4] / a[0][0], a[1][4] / a[1][1], a[2][4] / a[2][2], a[3][4] / a[3][3]};
}

namespace {

Mat2 mul(const Mat2& x, const Mat2& y) {
    return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d, x.c * y.a + x.d * y.c,
            x.c * y.b + x.d * y.d};
}

std::size_t channels_of(const Shape& s) {
    if (s.rank() == 0) throw std::invalid_argument("batchnorm: rank-0 input");
    return s[s.rank() - 1];
}

template <typename T>
void check_params(std::size_t c, const ComplexTensor<T>& gamma, const ComplexTensor<T>& beta,
                  const BNRunning<T>& running) {
    if (gamma.shape() != Shape{c, 2} || beta.shape() != Shape{c} ||
        running.mean.shape() != Shape{c} || running.cov.shape() != Shape{c, 2})
        throw std::invalid_argument("batchnorm: parameter shapes do not match " +
                                    std::to_string(c) + " channels");
    if (!(running.epsilon > 0)) throw std::invalid_argument("batchnorm: epsilon must be positive");
}

}  // namespace

template <typename T>
BNRunning<T> BNRunning<T>::fresh(std::size_t channels) {
    BNRunning r;
    r.mean = ComplexTensor<T>(Shape{channels});
    r.cov = ComplexTensor<T>(Shape{channels, 2});
    for (std::size_t c = 0; c < channels; ++c) {
        r.cov.re()[2 * c] = T(1);      // Vrr
        r.cov.im()[2 * c + 1] = T(1);  // Vii
    }
    return r;
}

template <typename T>
BNState<T> BNState<T>::identity(std::size_t channels, double scale) {
    BNState s;
    s.gamma = ComplexTensor<T>(Shape{channels, 2});
    for (std::size_t c = 0; c < channels; ++c) {
        s.gamma.re()[2 * c] = T(scale);
        s.gamma.im()[2 * c + 1] = T(scale);
    }
    s.beta = ComplexTensor<T>(Shape{channels});
    s.running = BNRunning<T>::fresh(channels);
    return s;
}

namespace {

template <typename T>
struct Affine {
    const T* a00;
    const T* a01;
    const T* a10;
    const T* a11;
    const T* b0;
    const T* b1;
};

// y = A x + b per channel over m rows of nc channels, optionally followed by
// zReLU.
template <typename T, bool Relu>
void apply_affine(const Affine<T>& af, const T* __restrict xr, const T* __restrict xi,
                  T* __restrict yr, T* __restrict yi, std::size_t m, std::size_t nc) {
    const T* __restrict a00 = af.a00;
    const T* __restrict a01 = af.a01;
    const T* __restrict a10 = af.a10;
    const T* __restrict a11 = af.a11;
    const T* __restrict b0 = af.b0;
    const T* __restrict b1 = af.b1;
    for (std::size_t k = 0; k < m; ++k, xr += nc, xi += nc, yr += nc, yi += nc)
        for (std::size_t c = 0; c < nc; ++c) {
            const T pr = a00[c] * xr[c] + a01[c] * xi[c] + b0[c];
            const T pi = a10[c] * xr[c] + a11[c] * xi[c] + b1[c];
            if constexpr (Relu) {
                const bool pass = (pr >= T(0)) & (pi >= T(0));
                yr[c] = pass ? pr : T(0);
                yi[c] = pass ? pi : T(0);
            } else {
                yr[c] = pr;
                yi[c] = pi;
            }
        }
}

// Zeroes the gradient wherever the recomputed pre-activation is cut by zReLU.
template <typename T>
void gate_gradient(const Affine<T>& af, const T* __restrict xr, const T* __restrict xi,
                   const T* __restrict gr, const T* __restrict gi, T* __restrict hr,
                   T* __restrict hi, std::size_t m, std::size_t nc) {
    const T* __restrict a00 = af.a00;
    const T* __restrict a01 = af.a01;
    const T* __restrict a10 = af.a10;
    const T* __restrict a11 = af.a11;
    const T* __restrict b0 = af.b0;
    const T* __restrict b1 = af.b1;
    for (std::size_t k = 0; k < m; ++k, xr += nc, xi += nc, gr += nc, gi += nc, hr += nc,
                     hi += nc)
        for (std::size_t c = 0; c < nc; ++c) {
            const T pr = a00[c] * xr[c] + a01[c] * xi[c] + b0[c];
            const T pi = a10[c] * xr[c] + a11[c] * xi[c] + b1[c];
            const bool pass = (pr >= T(0)) & (pi >= T(0));
            hr[c] = pass ? gr[c] : T(0);
            hi[c] = pass ? gi[c] : T(0);
        }
}

}  // namespace

template <typename T>
ComplexTensor<T> complex_batchnorm(const ComplexTensor<T>& input, const ComplexTensor<T>& gamma,
                                   const ComplexTensor<T>& beta, BNRunning<T>& running,
                                   BNMode mode, BNCache* cache, bool zrelu) {
    const std::size_t nc = channels_of(input.shape());
    check_params(nc, gamma, beta, running);
    const std::size_t m = nc ? input.size() / nc : 0;
    if (mode == BNMode::train && m < 2)
        throw std::invalid_argument("batchnorm: train mode needs at least 2 values per channel");

    BNCache local;
    BNCache& cc = cache ? *cache : local;
    cc.mode = mode;
    cc.mean.assign(nc, {0.0, 0.0});
    cc.whiten.assign(nc, {});
    cc.sqrt_cov.assign(nc, {});
    cc.affine.assign(nc, {});
    cc.zrelu = zrelu;

    const auto re = input.re();
    const auto im = input.im();
    ComplexTensor<T> out(input.shape());

    // Statistics are accumulated row by row so the channel axis stays contiguous.
    std::vector<double> mr(nc, 0.0), mi(nc, 0.0);
    std::vector<Mat2> v(nc);
    if (mode == BNMode::train) {
        for (std::size_t k = 0; k < m; ++k)
            for (std::size_t c = 0; c < nc; ++c) {
                mr[c] += re[k * nc + c];
                mi[c] += im[k * nc + c];
            }
        for (std::size_t c = 0; c < nc; ++c) {
            mr[c] /= double(m);
            mi[c] /= double(m);
        }
        std::vector<double> vrr(nc, 0.0), vri(nc, 0.0), vii(nc, 0.0);
        for (std::size_t k = 0; k < m; ++k)
            for (std::size_t c = 0; c < nc; ++c) {
                const double dr = re[k * nc + c] - mr[c], di = im[k * nc + c] - mi[c];
                vrr[c] += dr * dr;
                vri[c] += dr * di;
                vii[c] += di * di;
            }
        const double keep = running.momentum, take = 1.0 - running.momentum;
        for (std::size_t c = 0; c < nc; ++c) {
            v[c] = {vrr[c] / double(m), vri[c] / double(m), vri[c] / double(m), vii[c] / double(m)};
            running.mean.re()[c] = T(keep * running.mean.re()[c] + take * mr[c]);
            running.mean.im()[c] = T(keep * running.mean.im()[c] + take * mi[c]);
            running.cov.re()[2 * c] = T(keep * running.cov.re()[2 * c] + take * v[c].a);
            running.cov.im()[2 * c] = T(keep * running.cov.im()[2 * c] + take * v[c].c);
            running.cov.re()[2 * c + 1] = T(keep * running.cov.re()[2 * c + 1] + take * v[c].b);
            running.cov.im()[2 * c + 1] = T(keep * running.cov.im()[2 * c + 1] + take * v[c].d);
        }
    } else {
        for (std::size_t c = 0; c < nc; ++c) {
            mr[c] = running.mean.re()[c];
            mi[c] = running.mean.im()[c];
            v[c] = {double(running.cov.re()[2 * c]), double(running.cov.re()[2 * c + 1]),
                    double(running.cov.im()[2 * c]), double(running.cov.im()[2 * c + 1])};
        }
    }

    // Per-channel affine map y = A (x - mean) + beta with A = Gamma W.
    std::vector<T> a00(nc), a01(nc), a10(nc), a11(nc), b0(nc), b1(nc);
    for (std::size_t c = 0; c < nc; ++c) {
        const Mat2 a{v[c].a + running.epsilon, v[c].b, v[c].c, v[c].d + running.epsilon};
        const Mat2 s = sqrt_spd(a);
        const Mat2 w = inverse(s);
        cc.mean[c] = {mr[c], mi[c]};
        cc.whiten[c] = w;
        cc.sqrt_cov[c] = s;
        const Mat2 g{gamma.re()[2 * c], gamma.re()[2 * c + 1], gamma.im()[2 * c],
                     gamma.im()[2 * c + 1]};
        const Mat2 aw = mul(g, w);
        a00[c] = T(aw.a);
        a01[c] = T(aw.b);
        a10[c] = T(aw.c);
        a11[c] = T(aw.d);
        b0[c] = T(beta.re()[c] - aw.a * mr[c] - aw.b * mi[c]);
        b1[c] = T(beta.im()[c] - aw.c * mr[c] - aw.d * mi[c]);
        cc.affine[c] = {a00[c], a01[c], a10[c], a11[c], b0[c], b1[c]};
    }
    const Affine<T> af{a00.data(), a01.data(), a10.data(), a11.data(), b0.data(), b1.data()};
    if (zrelu)
        apply_affine<T, true>(af, re.data(), im.data(), out.re().data(), out.im().data(), m, nc);
    else
        apply_affine<T, false>(af, re.data(), im.data(), out.re().data(), out.im().data(), m, nc);
    return out;
}

template <typename T>
BNGradients<T> complex_batchnorm_backward(const ComplexTensor<T>& input,
                                          const ComplexTensor<T>& gamma, const BNCache& cache,
                                          const ComplexTensor<T>& grad_output) {
    require_same_shape(input, grad_output, "batchnorm_backward");
    const std::size_t nc = channels_of(input.shape());
    if (cache.whiten.size() != nc) throw std::invalid_argument("batchnorm_backward: stale cache");
    const std::size_t m = nc ? input.size() / nc : 0;

    BNGradients<T> g{ComplexTensor<T>(input.shape()), ComplexTensor<T>(gamma.shape()),
                     ComplexTensor<T>(Shape{nc})};
    const auto re = input.re();
    const auto im = input.im();
    // With a fused zReLU the incoming gradient is first gated by the
    // recomputed pre-activation (same arithmetic as the forward pass).
    ComplexTensor<T> gated;
    if (cache.zrelu) {
        if (cache.affine.size() != nc)
            throw std::invalid_argument("batchnorm_backward: stale cache");
        gated = ComplexTensor<T>(input.shape());
        std::vector<T> a00(nc), a01(nc), a10(nc), a11(nc), b0(nc), b1(nc);
        for (std::size_t c = 0; c < nc; ++c) {
            const auto& a = cache.affine[c];
            a00[c] = T(a[0]);
            a01[c] = T(a[1]);
            a10[c] = T(a[2]);
            a11[c] = T(a[3]);
            b0[c] = T(a[4]);
            b1[c] = T(a[5]);
        }
        gate_gradient(Affine<T>{a00.data(), a01.data(), a10.data(), a11.data(), b0.data(),
                                b1.data()},
                      input.re().data(), input.im().data(), grad_output.re().data(),
                      grad_output.im().data(), gated.re().data(), gated.im().data(), m, nc);
    }
    const ComplexTensor<T>& gsrc = cache.zrelu ? gated : grad_output;
    const auto gr = gsrc.re();
    const auto gi = gsrc.im();

    // Pass 1 (row-major): affine gradients, the gradient w.r.t. the
    // whitening matrix and the batch sum of the whitened-value gradient.
    std::vector<double> dg0r(nc, 0), dg0i(nc, 0), dg1r(nc, 0), dg1i(nc, 0), dbr(nc, 0), dbi(nc, 0);
    std::vector<double> sdu(nc, 0), sdz(nc, 0), gwa(nc, 0), gwb(nc, 0), gwc(nc, 0), gwd(nc, 0);
    std::vector<double> mr(nc), mi(nc), wa(nc), wb(nc), wc(nc), wd(nc), g0r(nc), g0i(nc), g1r(nc),
        g1i(nc);
    for (std::size_t c = 0; c < nc; ++c) {
        mr[c] = cache.mean[c][0];
        mi[c] = cache.mean[c][1];
        const Mat2& w = cache.whiten[c];
        wa[c] = w.a;
        wb[c] = w.b;
        wc[c] = w.c;
        wd[c] = w.d;
        g0r[c] = gamma.re()[2 * c];
        g0i[c] = gamma.im()[2 * c];
        g1r[c] = gamma.re()[2 * c + 1];
        g1i[c] = gamma.im()[2 * c + 1];
    }
    for (std::size_t k = 0; k < m; ++k)
        for (std::size_t c = 0; c < nc; ++c) {
            const std::size_t i = k * nc + c;
            const double dr = re[i] - mr[c], di = im[i] - mi[c];
            const double u = wa[c] * dr + wb[c] * di;
            const double z = wc[c] * dr + wd[c] * di;
            const double yr = gr[i], yi = gi[i];
            dg0r[c] += yr * u;
            dg0i[c] += yi * u;
            dg1r[c] += yr * z;
            dg1i[c] += yi * z;
            dbr[c] += yr;
            dbi[c] += yi;
            const double du = g0r[c] * yr + g0i[c] * yi;
            const double dz = g1r[c] * yr + g1i[c] * yi;
            sdu[c] += du;
            sdz[c] += dz;
            gwa[c] += du * dr;
            gwb[c] += du * di;
            gwc[c] += dz * dr;
            gwd[c] += dz * di;
        }

    // Per-channel input-gradient map:
    // dx = W^T (du, dz) + Sym (x - mean) - mean(W^T (du, dz)), where
    // W = S^-1, S^2 = V + eps I, dL/dS = -W^T G_W W^T and S X + X S = dL/dS.
    std::vector<double> sa(nc, 0), sb(nc, 0), sc(nc, 0), sd(nc, 0), mdr(nc, 0), mdi(nc, 0);
    const double inv_m = 1.0 / double(m);
    for (std::size_t c = 0; c < nc; ++c) {
        g.gamma.re()[2 * c] = T(dg0r[c]);
        g.gamma.im()[2 * c] = T(dg0i[c]);
        g.gamma.re()[2 * c + 1] = T(dg1r[c]);
        g.gamma.im()[2 * c + 1] = T(dg1i[c]);
        g.beta.re()[c] = T(dbr[c]);
        g.beta.im()[c] = T(dbi[c]);
        if (cache.mode == BNMode::eval) continue;
        const Mat2& w = cache.whiten[c];
        const Mat2 wt{w.a, w.c, w.b, w.d};
        Mat2 gs = mul(mul(wt, Mat2{gwa[c], gwb[c], gwc[c], gwd[c]}), wt);
        gs = {-gs.a, -gs.b, -gs.c, -gs.d};
        const Mat2 gv = solve_sylvester(cache.sqrt_cov[c], gs);
        sa[c] = 2 * gv.a * inv_m;
        sb[c] = sc[c] = (gv.b + gv.c) * inv_m;
        sd[c] = 2 * gv.d * inv_m;
        mdr[c] = (w.a * sdu[c] + w.c * sdz[c]) * inv_m;
        mdi[c] = (w.b * sdu[c] + w.d * sdz[c]) * inv_m;
    }
    for (std::size_t k = 0; k < m; ++k)
        for (std::size_t c = 0; c < nc; ++c) {
            const std::size_t i = k * nc + c;
            const double dr = re[i] - mr[c], di = im[i] - mi[c];
            const double yr = gr[i], yi = gi[i];
            const double du = g0r[c] * yr + g0i[c] * yi;
            const double dz = g1r[c] * yr + g1i[c] * yi;
            const double xr = wa[c] * du + wc[c] * dz + sa[c] * dr + sb[c] * di;
            const double xi = wb[c] * du + wd[c] * dz + sc[c] * dr + sd[c] * di;
            g.input.re()[i] = T(xr - mdr[c]);
            g.input.im()[i] = T(xi - mdi[c]);
        }
    return g;
}

template struct BNRunning<float>;
template struct BNRunning<double>;
template struct BNState<float>;
template struct BNState<double>;
template ComplexTensor<float> complex_batchnorm(const ComplexTensor<float>&,
                                                const ComplexTensor<float>&,
                                                const ComplexTensor<float>&, BNRunning<float>&,
                                                BNMode, BNCache*, bool);
template ComplexTensor<double> complex_batchnorm(const ComplexTensor<double>&,
                                                 const ComplexTensor<double>&,
                                                 const ComplexTensor<double>&, BNRunning<double>&,
                                                 BNMode, BNCache*, bool);
template BNGradients<float> complex_batchnorm_backward(const ComplexTensor<float>&,
                                                       const ComplexTensor<float>&, const BNCache&,
                                                       const ComplexTensor<float>&);
template BNGradients<double> complex_batchnorm_backward(const ComplexTensor<double>&,
                                                        const ComplexTensor<double>&,
                                                        const BNCache&,
                                                        const ComplexTensor<double>&);

}  // namespace ciris

#include "ciris/ops.hpp"

#include <memory>

namespace ciris::ops {

template <typename T>
Var<T> conv2d(const Var<T>& input, const Var<T>& kernel, const ConvGeometry& geometry) {
    auto& tape = *input.tape();
    ConvSpec<T> spec{kernel.value(), geometry};
    auto out = complex_conv2d(input.value(), spec);
    return tape.record("conv2d", std::move(out), {input, kernel}, [geometry](BackwardContext<T>& ctx) {
        // Kernel copies are small next to the activations.
        ConvSpec<T> s{ctx.input(1), geometry};
        auto g = complex_conv2d_backward(ctx.input(0), s, ctx.grad_output(), ctx.needs_grad(0),
                                         ctx.needs_grad(1));
        if (ctx.needs_grad(0)) ctx.accumulate(0, g.input);
        if (ctx.needs_grad(1)) ctx.accumulate(1, g.kernel);
    });
}

template <typename T>
Var<T> zrelu(const Var<T>& input) {
    return input.tape()->record("zrelu", ciris::zrelu(input.value()), {input},
                                [](BackwardContext<T>& ctx) {
                                    ctx.accumulate(0, zrelu_backward(ctx.input(0), ctx.grad_output()));
                                });
}

template <typename T>
Var<T> spectral_pool(const Var<T>& input, std::size_t out_h, std::size_t out_w) {
    const auto lay = SpatialLayout::of(input.shape());
    const std::size_t in_h = lay.height, in_w = lay.width;
    return input.tape()->record(
        "spectral_pool", ciris::spectral_pool(input.value(), out_h, out_w), {input},
        [in_h, in_w](BackwardContext<T>& ctx) {
            ctx.accumulate(0, spectral_pool_backward(ctx.grad_output(), in_h, in_w));
        });
}

template <typename T>
Var<T> batchnorm(const Var<T>& input, const Var<T>& gamma, const Var<T>& beta,
                 BNRunning<T>& running, BNMode mode, bool zrelu) {
    auto cache = std::make_shared<BNCache>();
    auto out = complex_batchnorm(input.value(), gamma.value(), beta.value(), running, mode,
                                 cache.get(), zrelu);
    return input.tape()->record(
        zrelu ? "batchnorm_zrelu" : "batchnorm", std::move(out), {input, gamma, beta}, [cache](BackwardContext<T>& ctx) {
            auto g = complex_batchnorm_backward(ctx.input(0), ctx.input(1), *cache,
                                                ctx.grad_output());
            ctx.accumulate(0, g.input);
            ctx.accumulate(1, g.gamma);
            ctx.accumulate(2, g.beta);
        });
}

template <typename T>
Var<T> concat_channels(const std::vector<Var<T>>& parts) {
    std::vector<const ComplexTensor<T>*> values;
    std::vector<std::size_t> widths;
    for (const auto& p : parts) {
        values.push_back(&p.value());
        widths.push_back(p.shape()[p.shape().rank() - 1]);
    }
    auto out = ciris::concat_channels(values);
    return parts.front().tape()->record(
        "concat", std::move(out), parts, [widths](BackwardContext<T>& ctx) {
            const auto& g = ctx.grad_output();
            const std::size_t total = g.shape()[g.shape().rank() - 1];
            const std::size_t lead = g.size() / total;
            std::size_t offset = 0;
            for (std::size_t i = 0; i < widths.size(); ++i) {
                const std::size_t c = widths[i];
                if (ctx.needs_grad(i)) {
                    ComplexTensor<T> part(ctx.input(i).shape());
                    for (std::size_t r = 0; r < lead; ++r) {
                        std::copy_n(g.re().data() + r * total + offset, c, part.re().data() + r * c);
                        std::copy_n(g.im().data() + r * total + offset, c, part.im().data() + r * c);
                    }
                    ctx.accumulate(i, part);
                }
                offset += c;
            }
        });
}

template <typename T>
Var<T> real_part(const Var<T>& input) {
    return input.tape()->record("real_part", ciris::real_part(input.value()), {input},
                                [](BackwardContext<T>& ctx) {
                                    ctx.accumulate(0, ciris::real_part(ctx.grad_output()));
                                });
}

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
    return a.tape()->record("add", c_add(a.value(), b.value()), {a, b},
                            [](BackwardContext<T>& ctx) {
                                ctx.accumulate(0, ctx.grad_output());
                                ctx.accumulate(1, ctx.grad_output());
                            });
}

template <typename T>
Var<T> scale(const Var<T>& a, T factor) {
    ComplexTensor<T> out(a.shape());
    out.axpy(factor, a.value());
    return a.tape()->record("scale", std::move(out), {a}, [factor](BackwardContext<T>& ctx) {
        ComplexTensor<T> g(ctx.grad_output().shape());
        g.axpy(factor, ctx.grad_output());
        ctx.accumulate(0, g);
    });
}

template <typename T>
Var<T> sum_real(const Var<T>& a) {
    double s = 0;
    for (T v : a.value().re()) s += v;
    auto out = ComplexTensor<T>::full(Shape{1}, {T(s), T(0)});
    return a.tape()->record("sum_real", std::move(out), {a}, [](BackwardContext<T>& ctx) {
        const T seed = ctx.grad_output().re()[0];
        ctx.accumulate(0, ComplexTensor<T>::full(ctx.input(0).shape(), {seed, T(0)}));
    });
}

template <typename T>
Var<T> sum_abs2(const Var<T>& a) {
    auto out = ComplexTensor<T>::full(Shape{1}, {T(squared_norm(a.value())), T(0)});
    return a.tape()->record("sum_abs2", std::move(out), {a}, [](BackwardContext<T>& ctx) {
        const T seed = ctx.grad_output().re()[0];
        ComplexTensor<T> g(ctx.input(0).shape());
        g.axpy(T(2) * seed, ctx.input(0));
        ctx.accumulate(0, g);
    });
}

#define CIRIS_INSTANTIATE_OPS(T)                                                              \
    template Var<T> conv2d(const Var<T>&, const Var<T>&, const ConvGeometry&);               \
    template Var<T> zrelu(const Var<T>&);                                                     \
    template Var<T> spectral_pool(const Var<T>&, std::size_t, std::size_t);                   \
    template Var<T> batchnorm(const Var<T>&, const Var<T>&, const Var<T>&, BNRunning<T>&,     \
                              BNMode, bool);                                                    \
    template Var<T> concat_channels(const std::vector<Var<T>>&);                              \
    template Var<T> real_part(const Var<T>&);                                                 \
    template Var<T> add(const Var<T>&, const Var<T>&);                                        \
    template Var<T> scale(const Var<T>&, T);                                                  \
    template Var<T> sum_real(const Var<T>&);                                                  \
    template Var<T> sum_abs2(const Var<T>&);

CIRIS_INSTANTIATE_OPS(float)
CIRIS_INSTANTIATE_OPS(double)

}  // namespace ciris::ops

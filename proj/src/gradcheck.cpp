#include "ciris/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>
#include <stdexcept>

#include "ciris/layers.hpp"
#include "ciris/loss.hpp"
#include "ciris/model.hpp"
#include "ciris/ops.hpp"

namespace ciris {

namespace {

using C = ComplexTensor<double>;
using P = Parameter<double>;

double eval_loss(const LossBuilder& loss) {
    Tape<double> tape(false);
    return loss(tape).value().re()[0];
}

double l2(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

}  // namespace

GradCheckResult check_gradients(const std::string& name, const std::vector<P*>& targets,
                                const LossBuilder& loss, const GradCheckOptions& options) {
    GradCheckResult res;
    res.name = name;
    for (auto* p : targets) p->zero_grad();
    {
        Tape<double> tape;
        tape.backward(loss(tape));
    }
    for (auto* p : targets) {
        std::vector<double> diff, ana, num;
        const std::size_t n = p->value.size();
        for (int part = 0; part < 2; ++part)
            for (std::size_t i = 0; i < n; ++i) {
                double& v = part == 0 ? p->value.re()[i] : p->value.im()[i];
                const double saved = v;
                v = saved + options.h;
                const double up = eval_loss(loss);
                v = saved - options.h;
                const double down = eval_loss(loss);
                v = saved;
                const double fd = (up - down) / (2 * options.h);
                const double a = part == 0 ? p->grad.re()[i] : p->grad.im()[i];
                ana.push_back(a);
                num.push_back(fd);
                diff.push_back(a - fd);
                ++res.components;
            }
        const double denom = std::max({l2(ana), l2(num), 1e-6});
        const double err = l2(diff) / denom;
        res.tensors.push_back({p->name, err});
        res.max_rel_error = std::max(res.max_rel_error, err);
    }
    res.passed = res.max_rel_error < options.tolerance;
    return res;
}

namespace {

C random_tensor(Shape shape, std::mt19937_64& rng, double scale = 1.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    C t(std::move(shape));
    for (std::size_t i = 0; i < t.size(); ++i) {
        t.re()[i] = u(rng);
        t.im()[i] = u(rng);
    }
    return t;
}

C random_real(Shape shape, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    C t(std::move(shape));
    for (auto& v : t.re()) v = u(rng);
    return t;
}

BinaryGrid random_mask(std::size_t h, std::size_t w, std::mt19937_64& rng, double keep = 0.7) {
    std::bernoulli_distribution b(keep);
    BinaryGrid m(h, w, 0);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) m.set(y, x, b(rng));
    return m;
}

P leaf(std::string name, C value) {
    P p;
    p.name = std::move(name);
    p.value = std::move(value);
    return p;
}

// True when some element sits within `margin` of the zReLU quadrant edge,
// where a finite-difference step could flip the gate.
bool near_kink(const C& t, double margin = 1e-3) {
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double r = t.re()[i], m = t.im()[i];
        if ((std::abs(r) < margin && m > -margin) || (std::abs(m) < margin && r > -margin)) return true;
    }
    return false;
}

template <typename Setup>
void resample(std::mt19937_64& rng, Setup setup, const char* what) {
    for (int attempt = 0; attempt < 500; ++attempt)
        if (setup(rng)) return;
    throw std::runtime_error(std::string("gradcheck: could not draw inputs away from kinks for ") + what);
}

// Conv whose backward negates the kernel gradient.
Var<double> faulty_conv(const Var<double>& input, const Var<double>& kernel, ConvGeometry g) {
    auto out = complex_conv2d(input.value(), ConvSpec<double>{kernel.value(), g});
    return input.tape()->record("conv2d", std::move(out), {input, kernel},
                                [g](BackwardContext<double>& ctx) {
                                    const ConvSpec<double> s{ctx.input(1), g};
                                    auto gr = complex_conv2d_backward(ctx.input(0), s, ctx.grad_output(),
                                                                      ctx.needs_grad(0), ctx.needs_grad(1));
                                    if (ctx.needs_grad(0)) ctx.accumulate(0, gr.input);
                                    if (ctx.needs_grad(1)) {
                                        C neg(gr.kernel.shape());
                                        neg.axpy(-1.0, gr.kernel);
                                        ctx.accumulate(1, neg);
                                    }
                                });
}

BNRunning<double> scratch_running(const BNRunning<double>& r) { return r; }

}  // namespace

std::vector<GradCheckResult> run_gradcheck_suite(const GradCheckOptions& options) {
    std::mt19937_64 rng(options.seed);
    std::vector<GradCheckResult> out;

    {  // Gabor block: real image lifted by a Gabor-initialized conv.
        P image = leaf("input", random_real(Shape{2, 9, 11, 1}, rng));
        P kernel = leaf("kernel", gabor_bank<double>(7, 7, 4));
        const ConvGeometry g{1, 1, 3, 3};
        const C w = random_tensor(Shape{2, 9, 11, 4}, rng);
        const bool fault = options.inject_conv_fault;
        out.push_back(check_gradients("gabor_conv", {&kernel, &image}, [&](Tape<double>& t) {
            auto x = t.parameter(image), k = t.parameter(kernel);
            auto y = fault ? faulty_conv(x, k, g) : ops::conv2d(x, k, g);
            return ops::dot_real(y, w);
        }, options));
    }

    {  // Strided, padded complex conv.
        P input = leaf("input", random_tensor(Shape{2, 7, 8, 3}, rng));
        P kernel = leaf("kernel", random_tensor(Shape{3, 3, 3, 2}, rng));
        const ConvGeometry g{2, 1, 1, 0};
        const Shape os{2, g.out_extent(7, 3, 2, 1), g.out_extent(8, 3, 1, 0), 2};
        const C w = random_tensor(os, rng);
        out.push_back(check_gradients("complex_conv", {&kernel, &input}, [&](Tape<double>& t) {
            return ops::dot_real(ops::conv2d(t.parameter(input), t.parameter(kernel), g), w);
        }, options));
    }

    {
        P x;
        resample(rng, [&](std::mt19937_64& r) {
            x = leaf("input", random_tensor(Shape{2, 4, 5, 3}, r));
            return !near_kink(x.value);
        }, "zrelu");
        const C w = random_tensor(x.value.shape(), rng);
        out.push_back(check_gradients("zrelu", {&x}, [&](Tape<double>& t) {
            return ops::dot_real(ops::zrelu(t.parameter(x)), w);
        }, options));
    }

    {
        P x = leaf("input", random_tensor(Shape{2, 3, 4, 3}, rng));
        auto state = BNState<double>::identity(3);
        P gamma = leaf("gamma", random_tensor(Shape{3, 2}, rng));
        P beta = leaf("beta", random_tensor(Shape{3}, rng, 0.3));
        for (std::size_t i = 0; i < 3; ++i) x.value.re()[i * 3] += 2.0;  // nonzero mean
        const C w = random_tensor(x.value.shape(), rng);
        out.push_back(check_gradients("batchnorm_train", {&x, &gamma, &beta}, [&](Tape<double>& t) {
            return ops::dot_real(ops::batchnorm(t.parameter(x), t.parameter(gamma), t.parameter(beta),
                                                state.running, BNMode::train),
                                 w);
        }, options));

        resample(rng, [&](std::mt19937_64& r) {
            x.value = random_tensor(Shape{2, 3, 4, 3}, r);
            auto run = scratch_running(state.running);
            return !near_kink(complex_batchnorm(x.value, gamma.value, beta.value, run, BNMode::train));
        }, "batchnorm_zrelu");
        out.push_back(check_gradients("batchnorm_zrelu", {&x, &gamma, &beta}, [&](Tape<double>& t) {
            return ops::dot_real(ops::batchnorm(t.parameter(x), t.parameter(gamma), t.parameter(beta),
                                                state.running, BNMode::train, true),
                                 w);
        }, options));
    }

    {
        P x = leaf("input", random_tensor(Shape{2, 8, 12, 2}, rng));
        const C w1 = random_tensor(Shape{2, 4, 6, 2}, rng), w2 = random_tensor(Shape{2, 3, 5, 2}, rng);
        out.push_back(check_gradients("spectral_pool", {&x}, [&](Tape<double>& t) {
            auto v = t.parameter(x);
            auto a = ops::dot_real(ops::spectral_pool(v, 4, 6), w1);
            auto b = ops::dot_real(ops::spectral_pool(v, 3, 5), w2);
            return ops::add(a, b);
        }, options));
    }

    {  // Composite layer output concatenated onto its input (dense connectivity).
        std::mt19937_64 init(options.seed + 1);
        auto layer = make_composite<double>("composite", 4, 3, 2, false, init);
        P x;
        resample(rng, [&](std::mt19937_64& r) {
            x = leaf("input", random_tensor(Shape{2, 5, 6, 4}, r));
            auto run1 = scratch_running(layer.bn1.running), run2 = scratch_running(layer.bn2.running);
            const C pre1 = complex_batchnorm(x.value, layer.bn1.gamma.value, layer.bn1.beta.value, run1,
                                             BNMode::train);
            if (near_kink(pre1)) return false;
            const C mid = complex_conv2d(zrelu(pre1), ConvSpec<double>{layer.conv1.value, {}});
            return !near_kink(complex_batchnorm(mid, layer.bn2.gamma.value, layer.bn2.beta.value, run2,
                                                BNMode::train));
        }, "composite layer");
        const C w = random_tensor(Shape{2, 5, 6, 7}, rng);
        out.push_back(check_gradients(
            "dense_composite",
            {&x, &layer.bn1.gamma, &layer.bn1.beta, &layer.conv1, &layer.bn2.gamma, &layer.bn2.beta,
             &layer.conv2},
            [&](Tape<double>& t) {
                auto v = t.parameter(x);
                auto y = layer.forward(t, v, BNMode::train);
                return ops::dot_real(ops::concat_channels<double>({v, y}), w);
            },
            options));
    }

    {
        std::mt19937_64 init(options.seed + 2);
        auto layer = make_transition<double>("transition", 5, 3, false, init);
        P x;
        resample(rng, [&](std::mt19937_64& r) {
            x = leaf("input", random_tensor(Shape{2, 8, 8, 5}, r));
            auto run = scratch_running(layer.bn.running);
            const C pre = complex_batchnorm(x.value, layer.bn.gamma.value, layer.bn.beta.value, run,
                                            BNMode::train);
            return !near_kink(complex_conv2d(pre, ConvSpec<double>{layer.conv.value, {}}));
        }, "transition");
        const C w = random_tensor(Shape{2, 4, 4, 3}, rng);
        out.push_back(check_gradients("transition", {&x, &layer.bn.gamma, &layer.bn.beta, &layer.conv},
                                      [&](Tape<double>& t) {
                                          return ops::dot_real(
                                              layer.forward(t, t.parameter(x), BNMode::train, 4, 4), w);
                                      },
                                      options));
    }

    {
        P a = leaf("a", random_tensor(Shape{4, 8, 2}, rng)), b = leaf("b", random_tensor(Shape{4, 8, 2}, rng));
        const BinaryGrid ma = random_mask(4, 8, rng), mb = random_mask(4, 8, rng);
        out.push_back(check_gradients("fractional_distance", {&a, &b}, [&](Tape<double>& t) {
            return ops::fractional_distance(t.parameter(a), t.parameter(b), ma, mb, 0);
        }, options));
    }

    {  // b is a noisy roll of a, so one shift wins clearly.
        P a, b;
        BinaryGrid ma, mb;
        resample(rng, [&](std::mt19937_64& r) {
            a = leaf("a", random_tensor(Shape{4, 10, 2}, r));
            C nb = roll_columns(a.value, 2);
            nb.axpy(0.3, random_tensor(nb.shape(), r));
            b = leaf("b", nb);
            ma = random_mask(4, 10, r, 0.8);
            mb = random_mask(4, 10, r, 0.8);
            std::vector<double> d;
            for (int s = -3; s <= 3; ++s)
                d.push_back(fractional_distance(FeatureMap<double>{roll_columns(a.value, s), ma.rolled(s)},
                                                FeatureMap<double>{b.value, mb}));
            std::sort(d.begin(), d.end());
            return d[1] - d[0] > 1e-2;
        }, "shift_distance");
        out.push_back(check_gradients("shift_distance", {&a, &b}, [&](Tape<double>& t) {
            return ops::shift_distance(t.parameter(a), t.parameter(b), ma, mb, 3);
        }, options));
    }

    {
        std::vector<P> f(4);
        std::vector<BinaryGrid> masks(4);
        const std::vector<Triplet> triplets{{0, 1, 2}, {1, 0, 3}, {2, 3, 0}, {3, 2, 1}};
        const double alpha = 0.2;
        resample(rng, [&](std::mt19937_64& r) {
            for (std::size_t i = 0; i < 4; ++i) {
                f[i] = leaf("feature" + std::to_string(i), random_tensor(Shape{3, 8, 2}, r, 0.5));
                masks[i] = random_mask(3, 8, r, 0.8);
            }
            std::vector<FeatureMap<double>> fm;
            for (std::size_t i = 0; i < 4; ++i) fm.push_back({f[i].value, masks[i]});
            for (const auto& t : triplets) {
                const double dap = shift_distance(fm[t.anchor], fm[t.positive], 2).distance;
                const double dan = shift_distance(fm[t.anchor], fm[t.negative], 2).distance;
                if (std::abs(dap - dan + alpha) < 1e-2) return false;
            }
            // Every pair needs a clear best shift.
            for (std::size_t i = 0; i < 4; ++i)
                for (std::size_t j = 0; j < 4; ++j) {
                    if (i == j) continue;
                    std::vector<double> d;
                    for (int s = -2; s <= 2; ++s)
                        d.push_back(fractional_distance(
                            FeatureMap<double>{roll_columns(fm[i].values, s), masks[i].rolled(s)}, fm[j]));
                    std::sort(d.begin(), d.end());
                    if (d[1] - d[0] < 1e-3) return false;
                }
            return true;
        }, "triplet loss");
        std::vector<P*> targets;
        for (auto& p : f) targets.push_back(&p);
        out.push_back(check_gradients("triplet_loss", targets, [&](Tape<double>& t) {
            std::vector<Var<double>> vars;
            for (auto& p : f) vars.push_back(t.parameter(p));
            return ops::extended_triplet_loss(vars, masks, triplets, alpha, 2);
        }, options));
    }
    return out;
}

std::string format_report(const std::vector<GradCheckResult>& results) {
    std::ostringstream os;
    std::size_t width = 0;
    for (const auto& r : results) width = std::max(width, r.name.size());
    for (const auto& r : results) {
        const TensorError* worst = nullptr;
        for (const auto& t : r.tensors)
            if (!worst || t.rel_error > worst->rel_error) worst = &t;
        os << std::left << std::setw(int(width) + 2) << r.name << (r.passed ? "ok    " : "FAIL  ")
           << "max_rel_error=" << std::scientific << std::setprecision(3) << r.max_rel_error
           << std::defaultfloat << "  components=" << r.components;
        if (worst) os << "  worst=" << worst->name;
        os << '\n';
    }
    return os.str();
}

}  // namespace ciris

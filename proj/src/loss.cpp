#include "ciris/loss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>

namespace ciris {

namespace {

template <typename T>
void check_pair(const ComplexTensor<T>& a, const BinaryGrid& ma, const ComplexTensor<T>& b,
                const BinaryGrid& mb) {
    if (a.shape().rank() != 3)
        throw std::invalid_argument("feature map must be (h,w,c), got " + a.shape().to_string());
    require_same_shape(a, b, "fractional_distance");
    for (const BinaryGrid* m : {&ma, &mb})
        if (m->rows() != a.shape()[0] || m->cols() != a.shape()[1])
            throw std::invalid_argument("mask extents do not match feature map " +
                                        a.shape().to_string());
}

// FD(roll(a, shift), b) evaluated without materializing the roll.
template <typename T>
double shifted_fd(const ComplexTensor<T>& a, const BinaryGrid& ma, const ComplexTensor<T>& b,
                  const BinaryGrid& mb, int shift) {
    const std::size_t h = a.shape()[0], w = a.shape()[1], c = a.shape()[2];
    const long lw = long(w);
    double sum = 0;
    std::size_t valid = 0;
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) {
            const std::size_t xs = std::size_t(((long(x) - shift) % lw + lw) % lw);
            if (!ma.at(y, xs) || !mb.at(y, x)) continue;
            ++valid;
            const std::size_t pa = (y * w + xs) * c, pb = (y * w + x) * c;
            for (std::size_t k = 0; k < c; ++k) {
                const double dr = double(a.re()[pa + k]) - b.re()[pb + k];
                const double di = double(a.im()[pa + k]) - b.im()[pb + k];
                sum += dr * dr + di * di;
            }
        }
    if (valid == 0) throw std::invalid_argument("fractional distance: no valid overlap");
    return sum / double(valid);
}

// Candidate order 0, -1, 1, -2, 2, ... so strict improvement encodes the tie rule.
template <typename T>
ShiftResult best_shift(const ComplexTensor<T>& a, const BinaryGrid& ma, const ComplexTensor<T>& b,
                       const BinaryGrid& mb, int max_shift) {
    if (max_shift < 0) throw std::invalid_argument("maximum shift must be non-negative");
    check_pair(a, ma, b, mb);
    ShiftResult best{shifted_fd(a, ma, b, mb, 0), 0};
    for (int m = 1; m <= max_shift; ++m)
        for (int s : {-m, m}) {
            double d;
            try {
                d = shifted_fd(a, ma, b, mb, s);
            } catch (const std::invalid_argument&) {
                continue;
            }
            if (d < best.distance) best = {d, s};
        }
    return best;
}

}  // namespace

template <typename T>
ComplexTensor<T> roll_columns(const ComplexTensor<T>& values, int shift) {
    if (values.shape().rank() != 3)
        throw std::invalid_argument("roll_columns expects (h,w,c), got " +
                                    values.shape().to_string());
    const std::size_t h = values.shape()[0], w = values.shape()[1], c = values.shape()[2];
    ComplexTensor<T> out(values.shape());
    const long lw = long(w);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) {
            const std::size_t xs = std::size_t(((long(x) - shift) % lw + lw) % lw);
            for (std::size_t k = 0; k < c; ++k) out.set((y * w + x) * c + k, values.at((y * w + xs) * c + k));
        }
    return out;
}

template <typename T>
double fractional_distance(const FeatureMap<T>& f1, const FeatureMap<T>& f2) {
    check_pair(f1.values, f1.mask, f2.values, f2.mask);
    return shifted_fd(f1.values, f1.mask, f2.values, f2.mask, 0);
}

template <typename T>
ShiftResult shift_distance(const FeatureMap<T>& f1, const FeatureMap<T>& f2, int max_shift) {
    return best_shift(f1.values, f1.mask, f2.values, f2.mask, max_shift);
}

template <typename T>
double extended_triplet_loss(const std::vector<FeatureMap<T>>& features,
                             const std::vector<Triplet>& triplets, double alpha, int max_shift) {
    if (triplets.empty()) throw std::invalid_argument("triplet loss: empty batch");
    if (!(alpha > 0)) throw std::invalid_argument("triplet loss: margin must be positive");
    double total = 0;
    for (const auto& t : triplets) {
        const auto& a = features.at(t.anchor);
        const double dap = shift_distance(a, features.at(t.positive), max_shift).distance;
        const double dan = shift_distance(a, features.at(t.negative), max_shift).distance;
        total += std::max(0.0, dap - dan + alpha);
    }
    return total / double(triplets.size());
}

MiningStrategy parse_mining_strategy(const std::string& name) {
    if (name == "random") return MiningStrategy::random;
    if (name == "semi_hard" || name == "semi-hard") return MiningStrategy::semi_hard;
    throw std::invalid_argument("unknown mining strategy '" + name + "'");
}

std::string to_string(MiningStrategy s) {
    return s == MiningStrategy::random ? "random" : "semi_hard";
}

std::vector<Triplet> mine_triplets(const std::vector<int>& labels, MiningStrategy strategy,
                                   std::size_t count, std::uint64_t seed,
                                   const DistanceFn& distance, double alpha) {
    std::map<int, std::vector<std::size_t>> by_id;
    for (std::size_t i = 0; i < labels.size(); ++i) by_id[labels[i]].push_back(i);
    if (by_id.size() < 2) throw std::invalid_argument("triplet mining needs at least 2 identities");
    std::vector<std::size_t> anchors;
    for (const auto& [id, members] : by_id)
        if (members.size() >= 2) anchors.insert(anchors.end(), members.begin(), members.end());
    std::sort(anchors.begin(), anchors.end());
    if (anchors.empty())
        throw std::invalid_argument("triplet mining needs an identity with at least 2 samples");
    if (strategy == MiningStrategy::semi_hard && !distance)
        throw std::invalid_argument("semi-hard mining needs a distance function");

    std::mt19937_64 rng(seed);
    auto pick = [&rng](std::size_t n) {
        return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    };
    std::vector<Triplet> out;
    out.reserve(count);
    std::vector<std::size_t> positives, negatives, band;
    for (std::size_t k = 0; k < count; ++k) {
        const std::size_t a = anchors[pick(anchors.size())];
        positives.clear();
        negatives.clear();
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (i == a) continue;
            (labels[i] == labels[a] ? positives : negatives).push_back(i);
        }
        const std::size_t p = positives[pick(positives.size())];
        std::size_t n;
        if (strategy == MiningStrategy::semi_hard) {
            const double dap = distance(a, p);
            band.clear();
            for (std::size_t c : negatives) {
                const double dan = distance(a, c);
                if (dan > dap && dan < dap + alpha) band.push_back(c);
            }
            n = band.empty() ? negatives[pick(negatives.size())] : band[pick(band.size())];
        } else {
            n = negatives[pick(negatives.size())];
        }
        out.push_back({a, p, n});
    }
    return out;
}

template <typename T>
std::vector<Triplet> mine_triplets(const std::vector<FeatureMap<T>>& features,
                                   const std::vector<int>& labels, MiningStrategy strategy,
                                   std::size_t count, std::uint64_t seed, double alpha,
                                   int max_shift) {
    if (features.size() != labels.size())
        throw std::invalid_argument("triplet mining: feature and label counts differ");
    std::map<std::pair<std::size_t, std::size_t>, double> memo;
    DistanceFn dist = [&](std::size_t i, std::size_t j) {
        auto [it, fresh] = memo.try_emplace({i, j}, 0.0);
        if (fresh) it->second = shift_distance(features[i], features[j], max_shift).distance;
        return it->second;
    };
    return mine_triplets(labels, strategy, count, seed, dist, alpha);
}

namespace ops {

template <typename T>
Var<T> select(const Var<T>& batch, std::size_t index) {
    const Shape& s = batch.shape();
    if (s.rank() < 2 || index >= s[0])
        throw std::invalid_argument("select: index " + std::to_string(index) + " out of range for " +
                                    s.to_string());
    std::vector<std::size_t> dims(s.dims().begin() + 1, s.dims().end());
    Shape item(dims);
    const std::size_t n = item.numel(), off = index * n;
    const auto& v = batch.value();
    ComplexTensor<T> out(item, std::vector<T>(v.re().begin() + off, v.re().begin() + off + n),
                         std::vector<T>(v.im().begin() + off, v.im().begin() + off + n));
    return batch.tape()->record("select", std::move(out), {batch}, [off, n](BackwardContext<T>& ctx) {
        ComplexTensor<T> g(ctx.input(0).shape());
        const auto& go = ctx.grad_output();
        std::copy_n(go.re().data(), n, g.re().data() + off);
        std::copy_n(go.im().data(), n, g.im().data() + off);
        ctx.accumulate(0, g);
    });
}

template <typename T>
Var<T> fractional_distance(const Var<T>& a, const Var<T>& b, const BinaryGrid& mask_a,
                           const BinaryGrid& mask_b, int shift) {
    check_pair(a.value(), mask_a, b.value(), mask_b);
    const double d = shifted_fd(a.value(), mask_a, b.value(), mask_b, shift);
    auto out = ComplexTensor<T>::full(Shape{1}, {T(d), T(0)});
    return a.tape()->record(
        "fractional_distance", std::move(out), {a, b},
        [mask_a, mask_b, shift](BackwardContext<T>& ctx) {
            const auto& va = ctx.input(0);
            const auto& vb = ctx.input(1);
            const std::size_t h = va.shape()[0], w = va.shape()[1], c = va.shape()[2];
            const long lw = long(w);
            std::size_t valid = 0;
            for (std::size_t y = 0; y < h; ++y)
                for (std::size_t x = 0; x < w; ++x) {
                    const std::size_t xs = std::size_t(((long(x) - shift) % lw + lw) % lw);
                    valid += mask_a.at(y, xs) && mask_b.at(y, x);
                }
            const T k = T(2) * ctx.grad_output().re()[0] / T(valid);
            ComplexTensor<T> ga(va.shape()), gb(vb.shape());
            for (std::size_t y = 0; y < h; ++y)
                for (std::size_t x = 0; x < w; ++x) {
                    const std::size_t xs = std::size_t(((long(x) - shift) % lw + lw) % lw);
                    if (!mask_a.at(y, xs) || !mask_b.at(y, x)) continue;
                    const std::size_t pa = (y * w + xs) * c, pb = (y * w + x) * c;
                    for (std::size_t q = 0; q < c; ++q) {
                        const T dr = va.re()[pa + q] - vb.re()[pb + q];
                        const T di = va.im()[pa + q] - vb.im()[pb + q];
                        ga.re()[pa + q] += k * dr;
                        ga.im()[pa + q] += k * di;
                        gb.re()[pb + q] -= k * dr;
                        gb.im()[pb + q] -= k * di;
                    }
                }
            ctx.accumulate(0, ga);
            ctx.accumulate(1, gb);
        });
}

template <typename T>
Var<T> shift_distance(const Var<T>& a, const Var<T>& b, const BinaryGrid& mask_a,
                      const BinaryGrid& mask_b, int max_shift, int* shift) {
    const auto s = best_shift(a.value(), mask_a, b.value(), mask_b, max_shift);
    if (shift) *shift = s.shift;
    return fractional_distance(a, b, mask_a, mask_b, s.shift);
}

template <typename T>
Var<T> hinge(const Var<T>& x, T offset) {
    if (x.value().size() != 1) throw std::invalid_argument("hinge expects a scalar");
    const T t = x.value().re()[0] + offset;
    auto out = ComplexTensor<T>::full(Shape{1}, {std::max(T(0), t), T(0)});
    return x.tape()->record("hinge", std::move(out), {x}, [t](BackwardContext<T>& ctx) {
        const T g = t > T(0) ? ctx.grad_output().re()[0] : T(0);
        ctx.accumulate(0, ComplexTensor<T>::full(Shape{1}, {g, T(0)}));
    });
}

template <typename T>
Var<T> sub(const Var<T>& a, const Var<T>& b) {
    return a.tape()->record("sub", c_sub(a.value(), b.value()), {a, b}, [](BackwardContext<T>& ctx) {
        ctx.accumulate(0, ctx.grad_output());
        ComplexTensor<T> g(ctx.grad_output().shape());
        g.axpy(T(-1), ctx.grad_output());
        ctx.accumulate(1, g);
    });
}

template <typename T>
Var<T> mean(const std::vector<Var<T>>& scalars) {
    if (scalars.empty()) throw std::invalid_argument("mean of no values");
    std::complex<double> s = 0;
    for (const auto& v : scalars) {
        if (v.value().size() != 1) throw std::invalid_argument("mean expects scalars");
        s += std::complex<double>(v.value().at(0));
    }
    const double n = double(scalars.size());
    auto out = ComplexTensor<T>::full(Shape{1}, {T(s.real() / n), T(s.imag() / n)});
    return scalars.front().tape()->record("mean", std::move(out), scalars,
                                          [n](BackwardContext<T>& ctx) {
                                              ComplexTensor<T> g(Shape{1});
                                              g.axpy(T(1 / n), ctx.grad_output());
                                              for (std::size_t i = 0; i < ctx.num_inputs(); ++i)
                                                  ctx.accumulate(i, g);
                                          });
}

template <typename T>
Var<T> dot_real(const Var<T>& a, const ComplexTensor<T>& w) {
    require_same_shape(a.value(), w, "dot_real");
    double s = 0;
    for (std::size_t i = 0; i < w.size(); ++i)
        s += double(a.value().re()[i]) * w.re()[i] + double(a.value().im()[i]) * w.im()[i];
    auto out = ComplexTensor<T>::full(Shape{1}, {T(s), T(0)});
    return a.tape()->record("dot_real", std::move(out), {a}, [w](BackwardContext<T>& ctx) {
        ComplexTensor<T> g(w.shape());
        g.axpy(ctx.grad_output().re()[0], w);
        ctx.accumulate(0, g);
    });
}

template <typename T>
Var<T> extended_triplet_loss(const std::vector<Var<T>>& features,
                             const std::vector<BinaryGrid>& masks,
                             const std::vector<Triplet>& triplets, T alpha, int max_shift) {
    if (triplets.empty()) throw std::invalid_argument("triplet loss: empty batch");
    if (!(alpha > T(0))) throw std::invalid_argument("triplet loss: margin must be positive");
    if (features.size() != masks.size())
        throw std::invalid_argument("triplet loss: feature and mask counts differ");
    std::vector<Var<T>> terms;
    terms.reserve(triplets.size());
    auto distance = [&](std::size_t i, std::size_t j) {
        return shift_distance(features.at(i), features.at(j), masks.at(i), masks.at(j), max_shift);
    };
    for (const auto& t : triplets) {
        auto dap = distance(t.anchor, t.positive);
        auto dan = distance(t.anchor, t.negative);
        terms.push_back(hinge(sub(dap, dan), alpha));
    }
    return mean(terms);
}

}  // namespace ops

#define CIRIS_INSTANTIATE_LOSS(T)                                                                 \
    template ComplexTensor<T> roll_columns(const ComplexTensor<T>&, int);                         \
    template double fractional_distance(const FeatureMap<T>&, const FeatureMap<T>&);              \
    template ShiftResult shift_distance(const FeatureMap<T>&, const FeatureMap<T>&, int);         \
    template double extended_triplet_loss(const std::vector<FeatureMap<T>>&,                      \
                                          const std::vector<Triplet>&, double, int);              \
    template std::vector<Triplet> mine_triplets(const std::vector<FeatureMap<T>>&,                \
                                                const std::vector<int>&, MiningStrategy,          \
                                                std::size_t, std::uint64_t, double, int);         \
    template Var<T> ops::select(const Var<T>&, std::size_t);                                      \
    template Var<T> ops::fractional_distance(const Var<T>&, const Var<T>&, const BinaryGrid&,     \
                                             const BinaryGrid&, int);                             \
    template Var<T> ops::shift_distance(const Var<T>&, const Var<T>&, const BinaryGrid&,          \
                                        const BinaryGrid&, int, int*);                            \
    template Var<T> ops::hinge(const Var<T>&, T);                                                 \
    template Var<T> ops::sub(const Var<T>&, const Var<T>&);                                       \
    template Var<T> ops::mean(const std::vector<Var<T>>&);                                        \
    template Var<T> ops::dot_real(const Var<T>&, const ComplexTensor<T>&);                        \
    template Var<T> ops::extended_triplet_loss(const std::vector<Var<T>>&,                        \
                                               const std::vector<BinaryGrid>&,                    \
                                               const std::vector<Triplet>&, T, int);

CIRIS_INSTANTIATE_LOSS(float)
CIRIS_INSTANTIATE_LOSS(double)

}  // namespace ciris

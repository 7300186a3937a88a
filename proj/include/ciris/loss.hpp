#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ciris/autograd.hpp"
#include "ciris/grid.hpp"

namespace ciris {

/// (h, w, c) complex features with an (h, w) validity mask.
template <typename T>
struct FeatureMap {
    ComplexTensor<T> values;
    BinaryGrid mask;

    std::size_t height() const { return values.shape()[0]; }
    std::size_t width() const { return values.shape()[1]; }
    std::size_t channels() const { return values.shape()[2]; }
};

/// Circular column roll of an (h, w, c) tensor: out[y, x] = in[y, x - shift].
template <typename T>
ComplexTensor<T> roll_columns(const ComplexTensor<T>& values, int shift);

/// Mean over jointly valid cells of the channel-summed squared modulus of
/// the difference.
template <typename T>
double fractional_distance(const FeatureMap<T>& f1, const FeatureMap<T>& f2);

struct ShiftResult {
    double distance = 0;
    int shift = 0;
};

/// Minimum of FD(roll(f1, b), f2) over b in [-B, B]. Ties go to the smaller
/// |b|, then to the negative shift.
template <typename T>
ShiftResult shift_distance(const FeatureMap<T>& f1, const FeatureMap<T>& f2, int max_shift);

struct Triplet {
    std::size_t anchor = 0, positive = 0, negative = 0;
    friend bool operator==(const Triplet&, const Triplet&) = default;
};

/// Hinged triplet loss on plain values; `features` is indexed by the
/// triplets.
template <typename T>
double extended_triplet_loss(const std::vector<FeatureMap<T>>& features,
                             const std::vector<Triplet>& triplets, double alpha, int max_shift);

enum class MiningStrategy { random, semi_hard };
MiningStrategy parse_mining_strategy(const std::string& name);
std::string to_string(MiningStrategy s);

using DistanceFn = std::function<double(std::size_t, std::size_t)>;

/// Draws `count` triplets over samples with the given identity labels.
/// Semi-hard mining needs `distance` and prefers negatives whose distance to
/// the anchor lies strictly between D(A,P) and D(A,P) + alpha.
std::vector<Triplet> mine_triplets(const std::vector<int>& labels, MiningStrategy strategy,
                                   std::size_t count, std::uint64_t seed,
                                   const DistanceFn& distance = {}, double alpha = 0.2);

template <typename T>
std::vector<Triplet> mine_triplets(const std::vector<FeatureMap<T>>& features,
                                   const std::vector<int>& labels, MiningStrategy strategy,
                                   std::size_t count, std::uint64_t seed, double alpha,
                                   int max_shift);

namespace ops {

/// Sample i of an (N, ...) batch as a tensor of the trailing shape.
template <typename T>
Var<T> select(const Var<T>& batch, std::size_t index);

/// Differentiable FD(roll(a, shift), b) for (h, w, c) inputs.
template <typename T>
Var<T> fractional_distance(const Var<T>& a, const Var<T>& b, const BinaryGrid& mask_a,
                           const BinaryGrid& mask_b, int shift);

/// FD at the shift that minimizes it on the current values. The shift is
/// held fixed in the backward pass and optionally reported.
template <typename T>
Var<T> shift_distance(const Var<T>& a, const Var<T>& b, const BinaryGrid& mask_a,
                      const BinaryGrid& mask_b, int max_shift, int* shift = nullptr);

/// max(0, Re(x) + offset) for a scalar x.
template <typename T>
Var<T> hinge(const Var<T>& x, T offset);

template <typename T>
Var<T> sub(const Var<T>& a, const Var<T>& b);

/// Mean of scalar vars.
template <typename T>
Var<T> mean(const std::vector<Var<T>>& scalars);

/// Sum over elements of Re(a) * Re(w) + Im(a) * Im(w) for a fixed w.
template <typename T>
Var<T> dot_real(const Var<T>& a, const ComplexTensor<T>& w);

/// Extended triplet loss on tape. `features` holds one (h, w, c) var per
/// sample; shifts are chosen on the forward values and held fixed.
template <typename T>
Var<T> extended_triplet_loss(const std::vector<Var<T>>& features,
                             const std::vector<BinaryGrid>& masks,
                             const std::vector<Triplet>& triplets, T alpha, int max_shift);

}  // namespace ops

}  // namespace ciris

#include <doctest.h>

#include <random>

#include "ciris/gradcheck.hpp"
#include "ciris/loss.hpp"
#include "ciris/ops.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace ciris;
using ciris::testing::random_tensor;
using CT = ComplexTensor<double>;

namespace {

BinaryGrid random_mask(std::size_t h, std::size_t w, std::mt19937_64& rng, double p_valid = 0.7) {
    std::bernoulli_distribution b(p_valid);
    BinaryGrid m(h, w, 0);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) m.set(y, x, b(rng));
    return m;
}

FeatureMap<double> random_map(std::mt19937_64& rng, std::size_t h = 4, std::size_t w = 12,
                              std::size_t c = 2) {
    return {random_tensor(Shape{h, w, c}, rng), random_mask(h, w, rng)};
}

void scale(CT& t, double k) {
    for (auto& v : t.re()) v *= k;
    for (auto& v : t.im()) v *= k;
}

FeatureMap<double> rolled(const FeatureMap<double>& f, int b) {
    return {roll_columns(f.values, b), f.mask.rolled(b)};
}

}  // namespace

TEST_CASE("fractional distance matches the loop oracle") {
    std::mt19937_64 rng(1);
    for (int t = 0; t < 20; ++t) {
        const auto a = random_map(rng), b = random_map(rng);
        const double want = oracle::fd_loop(a.values, a.mask, b.values, b.mask, 0);
        CHECK(std::abs(fractional_distance(a, b) - want) <= 1e-12 * want);
        CHECK(fractional_distance(a, b) == doctest::Approx(fractional_distance(b, a)).epsilon(1e-14));
        CHECK(fractional_distance(a, a) == 0);
    }
    // half-masked 4x8x2
    auto a = random_map(rng, 4, 8, 2), b = random_map(rng, 4, 8, 2);
    a.mask = BinaryGrid::full(4, 8);
    for (std::size_t x = 0; x < 4; ++x)
        for (std::size_t y = 0; y < 4; ++y) a.mask.set(y, x, false);
    b.mask = BinaryGrid::full(4, 8);
    const double want = oracle::fd_loop(a.values, a.mask, b.values, b.mask, 0);
    CHECK(std::abs(fractional_distance(a, b) - want) <= 1e-12 * want);
}

TEST_CASE("fractional distance needs a jointly valid cell") {
    std::mt19937_64 rng(2);
    auto a = random_map(rng), b = random_map(rng);
    a.mask = BinaryGrid(4, 12, 0);
    CHECK_THROWS(fractional_distance(a, b));
}

TEST_CASE("shift distance is the minimum over explicit shifts") {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 20; ++t) {
        const auto a = random_map(rng), b = random_map(rng);
        const auto got = shift_distance(a, b, 4);
        const auto [want, arg] = oracle::shift_loop(a.values, a.mask, b.values, b.mask, 4);
        CHECK(std::abs(got.distance - want) <= 1e-12 * want);
        CHECK(got.shift == arg);
        CHECK(got.distance <= fractional_distance(a, b));
        CHECK(shift_distance(a, b, 0).distance == fractional_distance(a, b));
    }
}

TEST_CASE("shift distance against a circular shift is exactly zero") {
    std::mt19937_64 rng(4);
    const auto a = random_map(rng, 4, 16, 3);
    for (int b = -4; b <= 4; ++b) {
        const auto r = shift_distance(rolled(a, b), a, 4);
        CHECK(r.distance == 0);
        CHECK(r.shift == -b);
        CHECK(shift_distance(a, rolled(a, b), 4).shift == b);
    }
}

TEST_CASE("shift ties prefer small then negative shifts") {
    // Columns alternate, so every even shift matches and every odd one does not.
    FeatureMap<double> f{CT(Shape{1, 8, 1}), BinaryGrid::full(1, 8)};
    for (std::size_t x = 0; x < 8; ++x) f.values.re()[x] = double(x % 2);
    FeatureMap<double> g = rolled(f, 1);
    const auto r = shift_distance(f, g, 3);
    CHECK(r.distance == 0);
    CHECK(r.shift == -1);
    CHECK(shift_distance(f, f, 3).shift == 0);
}

TEST_CASE("triplet loss hinge cases") {
    std::mt19937_64 rng(5);
    const auto a = random_map(rng);
    auto far = random_map(rng);
    scale(far.values, 10.0);
    far.mask = a.mask;
    std::vector<FeatureMap<double>> fs{a, a, far};
    CHECK(extended_triplet_loss(fs, {{0, 1, 2}}, 0.2, 4) == 0);
    CHECK(extended_triplet_loss(fs, {{0, 1, 1}}, 0.2, 4) == doctest::Approx(0.2).epsilon(1e-15));
}

TEST_CASE("triplet loss matches the loop oracle") {
    std::mt19937_64 rng(6);
    std::vector<FeatureMap<double>> fs;
    std::vector<CT> vals;
    std::vector<BinaryGrid> masks;
    for (int i = 0; i < 5; ++i) {
        fs.push_back(random_map(rng));
        scale(fs.back().values, 0.3);
        vals.push_back(fs.back().values);
        masks.push_back(fs.back().mask);
    }
    const std::vector<Triplet> ts{{0, 1, 2}, {1, 0, 3}, {2, 3, 4}, {4, 3, 0}};
    std::vector<std::array<std::size_t, 3>> arr;
    for (const auto& t : ts) arr.push_back({t.anchor, t.positive, t.negative});
    for (double alpha : {0.05, 0.2, 1.5}) {
        const double want = oracle::etl_loop(vals, masks, arr, alpha, 4);
        const double got = extended_triplet_loss(fs, ts, alpha, 4);
        CHECK(std::abs(got - want) <= 1e-10 * std::max(want, 1e-3));

        Tape<double> tape;
        std::vector<Var<double>> vars;
        for (const auto& v : vals) vars.push_back(tape.constant(v));
        const double on_tape = ops::extended_triplet_loss(vars, masks, ts, alpha, 4).value().re()[0];
        CHECK(std::abs(on_tape - want) <= 1e-10 * std::max(want, 1e-3));
    }
}

TEST_CASE("triplet loss gradient matches finite differences") {
    std::mt19937_64 rng(7);
    std::vector<Parameter<double>> ps;
    std::vector<BinaryGrid> masks;
    for (int i = 0; i < 4; ++i) {
        auto f = random_map(rng, 3, 10, 2);
        ps.push_back({"f" + std::to_string(i), f.values, {}});
        masks.push_back(f.mask);
    }
    const std::vector<Triplet> ts{{0, 1, 2}, {1, 0, 3}, {3, 2, 0}};
    auto loss = [&](Tape<double>& tape) {
        std::vector<Var<double>> vars;
        for (auto& p : ps) vars.push_back(tape.parameter(p));
        return ops::extended_triplet_loss(vars, masks, ts, 2.0, 3);
    };
    std::vector<Parameter<double>*> targets;
    for (auto& p : ps) targets.push_back(&p);
    const auto r = check_gradients("etl", targets, loss, {});
    CHECK(r.passed);
}

TEST_CASE("random mining is reproducible and never anchors a singleton") {
    const std::vector<int> labels{0, 0, 1, 1};
    const auto t1 = mine_triplets(labels, MiningStrategy::random, 1, 42);
    CHECK(t1 == mine_triplets(labels, MiningStrategy::random, 1, 42));
    REQUIRE(t1.size() == 1);
    CHECK(labels[t1[0].anchor] == labels[t1[0].positive]);
    CHECK(labels[t1[0].anchor] != labels[t1[0].negative]);

    const std::vector<int> lonely{0, 0, 0, 1, 2};
    for (const auto& t : mine_triplets(lonely, MiningStrategy::random, 50, 1)) {
        CHECK(lonely[t.anchor] == 0);
        CHECK(t.anchor != t.positive);
    }
    CHECK_THROWS(mine_triplets({0, 1, 2}, MiningStrategy::random, 1, 1));
    CHECK_THROWS(mine_triplets({0, 0, 0}, MiningStrategy::random, 1, 1));
}

TEST_CASE("semi-hard mining picks the negative inside the margin band") {
    // D(0,1) = 1; negatives 2, 3, 4 sit at 0.5, 1.1 and 3.
    const std::vector<int> labels{0, 0, 1, 2, 3};
    auto d = [](std::size_t a, std::size_t b) {
        if (a > b) std::swap(a, b);
        if (a == 0 && b == 1) return 1.0;
        if (a == 0 && b == 2) return 0.5;
        if (a == 0 && b == 3) return 1.1;
        if (a == 0 && b == 4) return 3.0;
        if (a == 1 && b == 3) return 1.1;
        return 5.0;
    };
    const auto ts = mine_triplets(labels, MiningStrategy::semi_hard, 8, 3, d, 0.2);
    for (const auto& t : ts) CHECK(t.negative == 3);
    CHECK(parse_mining_strategy("semi_hard") == MiningStrategy::semi_hard);
    CHECK_THROWS(parse_mining_strategy("hardest"));
}

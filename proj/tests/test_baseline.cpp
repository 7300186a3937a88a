#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numbers>
#include <random>

#include "ciris/baseline.hpp"
#include "ciris/synthdata.hpp"
#include "oracles.hpp"

using namespace ciris;
namespace fs = std::filesystem;

namespace {

NormalizedIris from_grid(RealGrid g) {
    const std::size_t r = g.rows, c = g.cols;
    return {std::move(g), BinaryGrid(r, c, 1)};
}

NormalizedIris rolled(const NormalizedIris& n, int k) {
    NormalizedIris out = n;
    const std::size_t w = n.strip.cols;
    for (std::size_t i = 0; i < n.strip.rows; ++i)
        for (std::size_t j = 0; j < w; ++j) {
            const std::size_t src = (j + w - std::size_t((k % long(w) + long(w)) % long(w))) % w;
            out.strip.at(i, j) = n.strip.at(i, src);
            out.mask.set(i, j, n.mask.at(i, src));
        }
    return out;
}

IrisCode random_code(std::mt19937_64& rng, std::size_t rows = 8, std::size_t cols = 128,
                     std::size_t filters = 4) {
    IrisCode c{rows, cols, filters, {}, {}, false};
    std::bernoulli_distribution b(0.5);
    c.bits.resize(c.cells() * 2);
    c.mask.assign(c.cells(), 1);
    for (auto& v : c.bits) v = b(rng);
    return c;
}

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / "ciris_test_baseline";
    fs::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST_CASE("default code geometry") {
    IrisCodeConfig cfg;
    CHECK(cfg.rows == 8);
    CHECK(cfg.cols == 128);
    CHECK(cfg.bank.size() == 4);
    CHECK(cfg.rows * cfg.cols * cfg.bank.size() * 2 == 8192);
    cfg.bank.clear();
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("sinusoid along the angle drives the matched filter's real bit") {
    const double lambda = 8, phase = 0.3;
    RealGrid g(64, 256);
    for (std::size_t i = 0; i < 64; ++i)
        for (std::size_t j = 0; j < 256; ++j)
            g.at(i, j) = 0.5 + 0.3 * std::cos(2 * std::numbers::pi * double(j) / lambda + phase);
    const IrisCodeConfig cfg;
    std::size_t f = cfg.bank.size();
    for (std::size_t k = 0; k < cfg.bank.size(); ++k)
        if (cfg.bank[k].lambda == lambda && cfg.bank[k].theta == 0) f = k;
    REQUIRE(f < cfg.bank.size());
    const auto code = encode(from_grid(g), cfg);
    CHECK_FALSE(code.degenerate);
    // Code column j samples strip column 2j, so the real bit repeats every lambda / 2 columns.
    for (std::size_t r = 0; r < code.rows; ++r)
        for (std::size_t c = 0; c < code.cols; ++c) {
            const std::size_t i = (r * code.cols + c) * code.filters + f;
            const bool want = std::cos(2 * std::numbers::pi * double(2 * c) / lambda + phase) >= 0;
            CHECK(bool(code.bits[i * 2]) == want);
            const std::size_t next = (r * code.cols + (c + 4) % code.cols) * code.filters + f;
            CHECK(code.bits[i * 2] == code.bits[next * 2]);
        }
}

TEST_CASE("constant strip is degenerate with all bits set") {
    const auto code = encode(from_grid(RealGrid(64, 256, 0.4)));
    CHECK(code.degenerate);
    for (auto b : code.bits) CHECK(b == 1);
}

TEST_CASE("encode is deterministic and respects the mask majority") {
    SynthSpec spec;
    const auto strip = from_grid(base_texture(spec, 2));
    CHECK(encode(strip) == encode(strip));
    auto masked = strip;
    for (std::size_t i = 0; i < 64; ++i)
        for (std::size_t j = 0; j < 64; ++j) masked.mask.set(i, j, false);
    const auto code = encode(masked);
    CHECK(code.valid_bits() < code.cells() * 2);
    CHECK(code.mask[0] == 0);
    CHECK(code.mask[(0 * code.cols + 100) * code.filters] == 1);
    CHECK_THROWS(encode(masked, IrisCodeConfig{65, 128}));
}

TEST_CASE("hamming basics") {
    std::mt19937_64 rng(1);
    const auto a = random_code(rng);
    CHECK(hamming(a, a, 4).distance == 0);
    auto inv = a;
    for (auto& b : inv.bits) b ^= 1;
    CHECK(hamming(a, inv, 0).distance == 1.0);
    const auto b = random_code(rng);
    CHECK(hamming(a, b, 0).distance == hamming(b, a, 0).distance);
    CHECK(hamming(a, b, 4).distance <= hamming(a, b, 0).distance);
    auto empty = b;
    std::fill(empty.mask.begin(), empty.mask.end(), 0);
    CHECK_THROWS(hamming(a, empty, 0));
}

TEST_CASE("hamming matches the loop oracle at every shift") {
    std::mt19937_64 rng(2);
    for (int t = 0; t < 5; ++t) {
        auto a = random_code(rng, 4, 16, 2), b = random_code(rng, 4, 16, 2);
        std::bernoulli_distribution keep(0.8);
        for (auto& m : a.mask) m = keep(rng);
        for (auto& m : b.mask) m = keep(rng);
        double best = 2;
        int arg = 0;
        for (int k = 0; k <= 3; ++k)
            for (int s : {-k, k}) {
                const double d = oracle::hamming_loop(a.bits, a.mask, b.bits, b.mask, 4, 16, 2, s);
                if (d < best) {
                    best = d;
                    arg = s;
                }
            }
        const auto r = hamming(a, b, 3);
        CHECK(r.distance == best);
        CHECK(r.shift == arg);
    }
}

TEST_CASE("random code pairs centre on one half") {
    std::mt19937_64 rng(3);
    double sum = 0, sq = 0;
    const int pairs = 1000;
    for (int i = 0; i < pairs; ++i) {
        const double d = hamming(random_code(rng), random_code(rng), 0).distance;
        sum += d;
        sq += d * d;
    }
    const double mean = sum / pairs, sd = std::sqrt(sq / pairs - mean * mean);
    CHECK(std::abs(mean - 0.5) < 0.02);
    CHECK(sd == doctest::Approx(std::sqrt(0.25 / 8192)).epsilon(0.15));
}

TEST_CASE("rotated strips match after shift compensation") {
    SynthSpec spec;
    const auto strip = from_grid(base_texture(spec, 5));
    const auto code = encode(strip);
    for (int k : {-3, 1, 4}) CHECK(hamming(code, encode(rolled(strip, 2 * k)), 4).distance == 0);
    CHECK(hamming(code, encode(rolled(strip, 5)), 4).distance < 0.2);
    const auto other = encode(from_grid(base_texture(spec, 6)));
    CHECK(hamming(code, other, 4).distance > 0.3);
}

TEST_CASE("icod round trip and corrupt files") {
    std::mt19937_64 rng(4);
    auto c = random_code(rng, 3, 5, 3);
    c.mask[4] = 0;
    c.degenerate = true;
    const auto p = scratch("c.icod");
    write_iriscode(p.string(), c);
    CHECK(read_iriscode(p.string()) == c);

    std::ifstream in(p, std::ios::binary);
    const std::string bytes{std::istreambuf_iterator<char>(in), {}};
    const auto q = scratch("bad.icod");
    std::ofstream(q, std::ios::binary) << "XCOD" << bytes.substr(4);
    CHECK_THROWS_AS(read_iriscode(q.string()), std::runtime_error);
    std::ofstream(q, std::ios::binary) << bytes.substr(0, bytes.size() - 1);
    CHECK_THROWS_AS(read_iriscode(q.string()), std::runtime_error);
    std::ofstream(q, std::ios::binary) << bytes << 'x';
    CHECK_THROWS_AS(read_iriscode(q.string()), std::runtime_error);
}

TEST_CASE("d prime and the parameter grid") {
    // population variances 0.01
    CHECK(d_prime({0.1, 0.3}, {0.5, 0.7}) == doctest::Approx(4.0));
    SynthSpec spec;
    spec.identities = 3;
    spec.samples = 3;
    spec.occlusion_p = 0;
    std::vector<NormalizedIris> strips;
    std::vector<int> labels;
    for (std::size_t id = 0; id < 3; ++id) {
        const auto base = base_texture(spec, id);
        for (std::size_t s = 0; s < 3; ++s) {
            const auto smp = make_sample(spec, base, id, s);
            strips.push_back(smp.iris);
            labels.push_back(int(id));
        }
    }
    const auto grid = iriscode_grid(strips, labels, {4, 8}, {0.5, 0.7}, {}, 4);
    REQUIRE(grid.size() == 4);
    for (std::size_t i = 1; i < grid.size(); ++i) CHECK(grid[i - 1].d_prime >= grid[i].d_prime);
    for (const auto& p : grid) CHECK(p.genuine_mean < p.impostor_mean);
}

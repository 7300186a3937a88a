#include "ciris/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>
#include <stdexcept>

namespace ciris {

std::vector<GaborParams> IrisCodeConfig::default_bank() { return bank_for(8.0, 0.5); }

std::vector<GaborParams> IrisCodeConfig::bank_for(double lambda, double delta_ratio) {
    std::vector<GaborParams> bank;
    for (double l : {lambda, 2 * lambda})
        for (double theta : {0.0, std::numbers::pi / 2})
            bank.push_back({l, theta, 0.0, delta_ratio * l, 1.0});
    return bank;
}

void IrisCodeConfig::validate() const {
    if (bank.empty()) throw std::invalid_argument("iriscode: empty filter bank");
    if (rows == 0 || cols == 0) throw std::invalid_argument("iriscode: empty code lattice");
    for (const auto& p : bank) p.validate();
}

std::size_t IrisCode::valid_bits() const {
    std::size_t n = 0;
    for (auto m : mask) n += m;
    return 2 * n;
}

namespace {

struct Filter {
    int half;
    std::vector<std::complex<double>> taps;  // (2 half + 1)^2, row-major, unit L2 norm
};

Filter make_filter(const GaborParams& p) {
    const double reach = 2 * p.delta * std::max(1.0, 1.0 / p.gamma);
    Filter f{int(std::ceil(reach)), {}};
    const int k = 2 * f.half + 1;
    const auto g = gabor_kernel<double>(p, k, k);
    double norm = 0;
    for (std::size_t i = 0; i < g.size(); ++i) norm += std::norm(std::complex<double>(g.at(i)));
    norm = std::sqrt(norm);
    f.taps.resize(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) f.taps[i] = std::complex<double>(g.at(i)) / norm;
    return f;
}

}  // namespace

IrisCode encode(const NormalizedIris& iris, const IrisCodeConfig& config) {
    config.validate();
    const std::size_t h = iris.strip.rows, w = iris.strip.cols;
    if (iris.mask.rows() != h || iris.mask.cols() != w)
        throw std::invalid_argument("iriscode: mask does not match strip");
    if (config.rows > h || config.cols > w)
        throw std::invalid_argument("iriscode: code lattice larger than the strip");

    double mean = 0;
    std::size_t valid = 0;
    for (std::size_t i = 0; i < iris.strip.values.size(); ++i)
        if (iris.mask[i]) {
            mean += iris.strip.values[i];
            ++valid;
        }
    if (valid == 0) throw std::invalid_argument("iriscode: strip has no valid pixels");
    mean /= double(valid);
    std::vector<double> centered(h * w, 0.0);
    for (std::size_t i = 0; i < centered.size(); ++i)
        if (iris.mask[i]) centered[i] = iris.strip.values[i] - mean;

    IrisCode code;
    code.rows = config.rows;
    code.cols = config.cols;
    code.filters = config.bank.size();
    code.bits.assign(code.cells() * 2, 0);
    code.mask.assign(code.cells(), 0);
    double peak = 0;
    const long lw = long(w), lh = long(h);
    for (std::size_t f = 0; f < code.filters; ++f) {
        const Filter filt = make_filter(config.bank[f]);
        const int k = 2 * filt.half + 1;
        for (std::size_t i = 0; i < code.rows; ++i) {
            const long y = long((2 * i + 1) * h / (2 * code.rows));
            for (std::size_t j = 0; j < code.cols; ++j) {
                const long x = long(j * w / code.cols);
                std::complex<double> acc = 0;
                std::size_t inside = 0, ok = 0;
                for (int dy = -filt.half; dy <= filt.half; ++dy) {
                    const long yy = y + dy;
                    const long yc = std::clamp(yy, 0L, lh - 1);
                    const bool in_strip = yy >= 0 && yy < lh;
                    for (int dx = -filt.half; dx <= filt.half; ++dx) {
                        const long xc = ((x + dx) % lw + lw) % lw;
                        const std::size_t p = std::size_t(yc * lw + xc);
                        acc += filt.taps[std::size_t((dy + filt.half) * k + dx + filt.half)] * centered[p];
                        if (in_strip) {
                            ++inside;
                            ok += iris.mask[p];
                        }
                    }
                }
                double re = acc.real(), im = acc.imag();
                if (std::abs(re) <= kZeroResponse) re = 0;
                if (std::abs(im) <= kZeroResponse) im = 0;
                peak = std::max({peak, std::abs(re), std::abs(im)});
                const std::size_t cell = (i * code.cols + j) * code.filters + f;
                code.bits[2 * cell] = re >= 0;
                code.bits[2 * cell + 1] = im >= 0;
                bool cell_ok = 2 * ok > inside;
                if (config.response_floor > 0 &&
                    (std::abs(re) < config.response_floor || std::abs(im) < config.response_floor))
                    cell_ok = false;
                code.mask[cell] = cell_ok;
            }
        }
    }
    code.degenerate = peak == 0;
    return code;
}

HammingResult hamming(const IrisCode& a, const IrisCode& b, int max_shift) {
    if (a.rows != b.rows || a.cols != b.cols || a.filters != b.filters)
        throw std::invalid_argument("hamming: code extents differ");
    if (max_shift < 0) throw std::invalid_argument("hamming: negative shift range");
    const long lc = long(a.cols);
    const std::size_t nf = a.filters;
    HammingResult best;
    bool found = false;
    for (int step = 0; step <= 2 * max_shift; ++step) {
        const int s = step == 0 ? 0 : (step % 2 ? -(step + 1) / 2 : step / 2);
        std::size_t diff = 0, count = 0;
        for (std::size_t i = 0; i < a.rows; ++i)
            for (std::size_t j = 0; j < a.cols; ++j) {
                const auto ja = std::size_t(((long(j) - s) % lc + lc) % lc);
                const std::size_t ca = (i * a.cols + ja) * nf, cb = (i * a.cols + j) * nf;
                for (std::size_t f = 0; f < nf; ++f) {
                    if (!a.mask[ca + f] || !b.mask[cb + f]) continue;
                    count += 2;
                    diff += (a.bits[2 * (ca + f)] != b.bits[2 * (cb + f)]) +
                            (a.bits[2 * (ca + f) + 1] != b.bits[2 * (cb + f) + 1]);
                }
            }
        if (count == 0) continue;
        const double d = double(diff) / double(count);
        if (!found || d < best.distance) {
            best = {d, s, count};
            found = true;
        }
    }
    if (!found) throw std::invalid_argument("hamming: no jointly valid bits");
    return best;
}

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
    const unsigned char b[4] = {std::uint8_t(v), std::uint8_t(v >> 8), std::uint8_t(v >> 16),
                                std::uint8_t(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in, const std::string& path) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4))
        throw std::runtime_error("iriscode '" + path + "': truncated file");
    return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 | std::uint32_t(b[2]) << 16 |
           std::uint32_t(b[3]) << 24;
}

std::vector<std::uint8_t> pack(const std::vector<std::uint8_t>& bits) {
    std::vector<std::uint8_t> out((bits.size() + 7) / 8, 0);
    for (std::size_t i = 0; i < bits.size(); ++i)
        if (bits[i]) out[i / 8] |= std::uint8_t(1u << (i % 8));
    return out;
}

std::vector<std::uint8_t> unpack(const std::vector<std::uint8_t>& bytes, std::size_t n) {
    std::vector<std::uint8_t> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = (bytes[i / 8] >> (i % 8)) & 1u;
    return out;
}

}  // namespace

void write_iriscode(const std::string& path, const IrisCode& code) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out.write("ICOD", 4);
    put_u32(out, 1);
    put_u32(out, std::uint32_t(code.rows));
    put_u32(out, std::uint32_t(code.cols));
    put_u32(out, std::uint32_t(code.filters));
    out.put(code.degenerate ? 1 : 0);
    const auto bits = pack(code.bits), mask = pack(code.mask);
    out.write(reinterpret_cast<const char*>(bits.data()), std::streamsize(bits.size()));
    out.write(reinterpret_cast<const char*>(mask.data()), std::streamsize(mask.size()));
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

IrisCode read_iriscode(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open iriscode '" + path + "'");
    char magic[4];
    if (!in.read(magic, 4) || std::string(magic, 4) != "ICOD")
        throw std::runtime_error("iriscode '" + path + "': bad magic");
    if (const auto v = get_u32(in, path); v != 1)
        throw std::runtime_error("iriscode '" + path + "': unsupported version " + std::to_string(v));
    IrisCode code;
    code.rows = get_u32(in, path);
    code.cols = get_u32(in, path);
    code.filters = get_u32(in, path);
    if (code.rows > 4096 || code.cols > 4096 || code.filters > 4096)
        throw std::runtime_error("iriscode '" + path + "': dimension overflow");
    const int flag = in.get();
    if (flag != 0 && flag != 1) throw std::runtime_error("iriscode '" + path + "': truncated file");
    code.degenerate = flag == 1;
    std::vector<std::uint8_t> bits((code.cells() * 2 + 7) / 8), mask((code.cells() + 7) / 8);
    if (!in.read(reinterpret_cast<char*>(bits.data()), std::streamsize(bits.size())) ||
        !in.read(reinterpret_cast<char*>(mask.data()), std::streamsize(mask.size())))
        throw std::runtime_error("iriscode '" + path + "': truncated file");
    if (in.peek() != EOF) throw std::runtime_error("iriscode '" + path + "': trailing bytes");
    code.bits = unpack(bits, code.cells() * 2);
    code.mask = unpack(mask, code.cells());
    return code;
}

double d_prime(const std::vector<double>& genuine, const std::vector<double>& impostor) {
    if (genuine.empty() || impostor.empty()) throw std::invalid_argument("d': empty score list");
    auto stats = [](const std::vector<double>& v) {
        double m = 0, s = 0;
        for (double x : v) m += x;
        m /= double(v.size());
        for (double x : v) s += (x - m) * (x - m);
        return std::pair{m, s / double(v.size())};
    };
    const auto [mg, vg] = stats(genuine);
    const auto [mi, vi] = stats(impostor);
    const double pooled = std::sqrt((vg + vi) / 2);
    return pooled > 0 ? std::abs(mi - mg) / pooled : (mi != mg ? INFINITY : 0.0);
}

std::vector<GridPoint> iriscode_grid(const std::vector<NormalizedIris>& strips,
                                     const std::vector<int>& labels,
                                     const std::vector<double>& lambdas,
                                     const std::vector<double>& delta_ratios,
                                     const IrisCodeConfig& base, int max_shift) {
    if (strips.size() != labels.size()) throw std::invalid_argument("grid search: label count mismatch");
    std::vector<GridPoint> out;
    for (double lambda : lambdas)
        for (double ratio : delta_ratios) {
            IrisCodeConfig cfg = base;
            cfg.bank = IrisCodeConfig::bank_for(lambda, ratio);
            std::vector<IrisCode> codes;
            codes.reserve(strips.size());
            for (const auto& s : strips) codes.push_back(encode(s, cfg));
            std::vector<double> gen, imp;
            for (std::size_t i = 0; i < codes.size(); ++i)
                for (std::size_t j = i + 1; j < codes.size(); ++j) {
                    const double d = hamming(codes[i], codes[j], max_shift).distance;
                    (labels[i] == labels[j] ? gen : imp).push_back(d);
                }
            GridPoint p{lambda, ratio, 0, 0, 0};
            if (!gen.empty() && !imp.empty()) {
                p.d_prime = d_prime(gen, imp);
                for (double d : gen) p.genuine_mean += d / double(gen.size());
                for (double d : imp) p.impostor_mean += d / double(imp.size());
            }
            out.push_back(p);
        }
    std::stable_sort(out.begin(), out.end(),
                     [](const GridPoint& a, const GridPoint& b) { return a.d_prime > b.d_prime; });
    return out;
}

}  // namespace ciris

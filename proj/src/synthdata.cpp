#include "ciris/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "ciris/fft.hpp"

namespace ciris {

namespace fs = std::filesystem;

namespace {

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t tag) {
    std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(a),
                      std::uint32_t(b), std::uint32_t(tag)};
    return std::mt19937_64(seq);
}

// Signed frequency of bin k for length n, in cycles per sample.
double frequency(std::size_t k, std::size_t n) {
    const long kk = k <= n / 2 ? long(k) : long(k) - long(n);
    return double(kk) / double(n);
}

std::string stem_of(std::size_t identity, std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "id%03zu_s%02zu", identity, index);
    return buf;
}

}  // namespace

void SynthSpec::validate() const {
    auto fail = [](const std::string& m) { throw std::invalid_argument("synth: " + m); };
    if (identities < 1 || samples < 1) fail("identity and sample counts must be at least 1");
    if (!(noise_std >= 0)) fail("noise_std must be non-negative");
    if (max_rotation < 0 || max_rotation > 64) fail("max_rotation must lie in [0, 64]");
    if (!(occlusion_p >= 0 && occlusion_p <= 1)) fail("occlusion probability must lie in [0, 1]");
    if (!(alpha >= 0)) fail("alpha must be non-negative");
    if (rows < 2 || cols < 16) fail("strip must be at least 2 x 16");
    if (!(train_fraction >= 0 && val_fraction >= 0 && train_fraction + val_fraction <= 1))
        fail("split fractions must be non-negative and sum to at most 1");
}

std::string SynthSpec::split_of(std::size_t identity) const {
    const auto n_train = std::size_t(std::lround(train_fraction * double(identities)));
    const auto n_val = std::size_t(std::lround(val_fraction * double(identities)));
    if (identity < n_train) return "train";
    if (identity < n_train + n_val) return "val";
    return "test";
}

RealGrid base_texture(const SynthSpec& spec, std::size_t identity) {
    auto rng = stream(spec.seed, identity, 0, 1);
    std::normal_distribution<double> normal(0.0, 1.0);
    const std::size_t h = spec.rows, w = spec.cols;
    std::vector<std::complex<double>> plane(h * w);
    for (auto& v : plane) v = normal(rng);
    fft2_plane(plane, h, w, false);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) {
            const double fy = frequency(y, h), fx = frequency(x, w);
            const double f = std::sqrt(fy * fy + fx * fx);
            plane[y * w + x] *= f > 0 ? std::pow(f, -spec.alpha) : 0.0;
        }
    fft2_plane(plane, h, w, true);
    double mean = 0, sq = 0;
    for (const auto& v : plane) mean += v.real();
    mean /= double(plane.size());
    for (const auto& v : plane) sq += (v.real() - mean) * (v.real() - mean);
    const double sd = std::sqrt(sq / double(plane.size()));
    RealGrid g(h, w);
    for (std::size_t i = 0; i < plane.size(); ++i) {
        const double z = sd > 0 ? (plane[i].real() - mean) / sd : 0.0;
        g.values[i] = std::clamp(spec.texture_mean + spec.texture_std * z, 0.0, 1.0);
    }
    return g;
}

SynthSample make_sample(const SynthSpec& spec, const RealGrid& base, std::size_t identity,
                        std::size_t index) {
    auto rng = stream(spec.seed, identity, index, 2);
    std::uniform_int_distribution<int> rot(-spec.max_rotation, spec.max_rotation);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);

    SynthSample s;
    s.rotation = rot(rng);
    const std::size_t h = base.rows, w = base.cols;
    s.iris.strip = RealGrid(h, w);
    s.iris.mask = BinaryGrid(h, w, 1);
    const long lw = long(w);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) {
            const auto src = std::size_t(((long(x) - s.rotation) % lw + lw) % lw);
            double v = base.at(y, src);
            if (spec.noise_std > 0) v += spec.noise_std * noise(rng);
            s.iris.strip.at(y, x) = std::clamp(v, 0.0, 1.0);
        }
    s.occluded = u(rng) < spec.occlusion_p;
    if (s.occluded) {
        std::uniform_int_distribution<std::size_t> width(w / 16, w / 6);
        std::uniform_int_distribution<std::size_t> start(0, w - 1);
        const std::size_t bw = width(rng), x0 = start(rng);
        for (std::size_t k = 0; k < bw; ++k) {
            const std::size_t x = (x0 + k) % w;
            for (std::size_t y = 0; y < h; ++y) {
                s.iris.strip.at(y, x) = spec.occluder_level;
                s.iris.mask.set(y, x, false);
            }
        }
    }
    return s;
}

void write_manifest(const std::string& path, const Manifest& manifest) {
    const fs::path dir = fs::path(path).parent_path();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    auto rel = [&](const std::string& p) {
        const fs::path pp(p);
        if (dir.empty()) return pp.generic_string();
        const fs::path r =
            fs::absolute(pp).lexically_normal().lexically_relative(fs::absolute(dir).lexically_normal());
        return (r.empty() ? pp : r).generic_string();
    };
    out << "strip_path,mask_path,identity,split\n";
    for (const auto& e : manifest)
        out << rel(e.strip_path) << ',' << rel(e.mask_path) << ',' << e.identity << ',' << e.split
            << '\n';
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

Manifest read_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open manifest '" + path + "'");
    const fs::path dir = fs::path(path).parent_path();
    Manifest m;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (lineno == 1 && line.rfind("strip_path", 0) == 0) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (f.size() != 4)
            throw std::runtime_error("manifest '" + path + "' line " + std::to_string(lineno) +
                                     ": expected 4 fields");
        ManifestEntry e;
        auto resolve = [&](const std::string& p) {
            const fs::path pp(p);
            return (pp.is_relative() ? dir / pp : pp).generic_string();
        };
        e.strip_path = resolve(f[0]);
        e.mask_path = resolve(f[1]);
        try {
            std::size_t pos = 0;
            e.identity = std::stoi(f[2], &pos);
            if (pos != f[2].size()) throw std::invalid_argument(f[2]);
        } catch (const std::exception&) {
            throw std::runtime_error("manifest '" + path + "' line " + std::to_string(lineno) +
                                     ": bad identity '" + f[2] + "'");
        }
        e.split = f[3];
        if (e.split != "train" && e.split != "val" && e.split != "test")
            throw std::runtime_error("manifest '" + path + "' line " + std::to_string(lineno) +
                                     ": unknown split '" + e.split + "'");
        m.push_back(std::move(e));
    }
    return m;
}

Manifest generate(const SynthSpec& spec, const std::string& out_dir) {
    spec.validate();
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec || !fs::is_directory(out_dir))
        throw std::runtime_error("cannot create output directory '" + out_dir + "'");
    Manifest m;
    const IrisGeometry geom = synthetic_geometry();
    for (std::size_t id = 0; id < spec.identities; ++id) {
        const RealGrid base = base_texture(spec, id);
        for (std::size_t j = 0; j < spec.samples; ++j) {
            const SynthSample s = make_sample(spec, base, id, j);
            const std::string stem = (fs::path(out_dir) / stem_of(id, j)).generic_string();
            write_normalized(stem, s.iris);
            if (spec.eyes) write_pgm(stem + ".eye.pgm", render_eye(s.iris.strip, geom, 320, 280));
            m.push_back({stem + ".norm.pgm", stem + ".mask.pgm", int(id), spec.split_of(id)});
        }
    }
    write_manifest((fs::path(out_dir) / "manifest.csv").generic_string(), m);
    return m;
}

IrisGeometry synthetic_geometry() { return {160.0, 140.0, 32.0, 100.0, false}; }

GrayImage render_eye(const RealGrid& strip, const IrisGeometry& geometry, std::size_t width,
                     std::size_t height, double pupil_level, double sclera_level) {
    geometry.validate();
    RealGrid img(height, width);
    const double h = double(strip.rows), w = double(strip.cols);
    for (std::size_t y = 0; y < height; ++y)
        for (std::size_t x = 0; x < width; ++x) {
            const double dx = double(x) - geometry.cx, dy = double(y) - geometry.cy;
            const double r = std::hypot(dx, dy);
            double v;
            if (r < geometry.r_pupil) {
                v = pupil_level;
            } else if (r > geometry.r_limbus) {
                v = sclera_level;
            } else {
                double t = std::atan2(dy, dx);
                if (t < 0) t += 2 * std::numbers::pi;
                const double fr = (r - geometry.r_pupil) / (geometry.r_limbus - geometry.r_pupil) * (h - 1);
                const double fc = t / (2 * std::numbers::pi) * w;
                const auto r0 = std::size_t(std::min(std::floor(fr), h - 2));
                const double ar = fr - double(r0);
                const double c0f = std::floor(fc);
                const double ac = fc - c0f;
                const auto c0 = std::size_t(c0f) % strip.cols, c1 = (c0 + 1) % strip.cols;
                v = (1 - ar) * ((1 - ac) * strip.at(r0, c0) + ac * strip.at(r0, c1)) +
                    ar * ((1 - ac) * strip.at(r0 + 1, c0) + ac * strip.at(r0 + 1, c1));
            }
            img.at(y, x) = v;
        }
    return to_image(img);
}

}  // namespace ciris

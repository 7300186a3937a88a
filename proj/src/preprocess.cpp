#include "ciris/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace ciris {

namespace {

struct Plane {
    std::size_t w, h;
    std::vector<double> v;

    explicit Plane(const GrayImage& img) : w(img.width), h(img.height), v(img.pixels.size()) {
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = img.pixels[i] / 255.0;
    }

    // Bilinear sample; false when the 2x2 neighbourhood leaves the image.
    bool sample(double x, double y, double& out) const {
        const double fx = std::floor(x), fy = std::floor(y);
        const long x0 = long(fx), y0 = long(fy);
        const double ax = x - fx, ay = y - fy;
        const long x1 = ax > 0 ? x0 + 1 : x0, y1 = ay > 0 ? y0 + 1 : y0;
        if (x0 < 0 || y0 < 0 || x1 >= long(w) || y1 >= long(h)) return false;
        auto at = [&](long xx, long yy) { return v[std::size_t(yy) * w + std::size_t(xx)]; };
        out = (1 - ay) * ((1 - ax) * at(x0, y0) + ax * at(x1, y0)) +
              ay * ((1 - ax) * at(x0, y1) + ax * at(x1, y1));
        return true;
    }
};

// Unit directions for one contour radius.
struct Contour {
    std::vector<double> c, s;

    explicit Contour(double r) {
        const std::size_t n = std::max<std::size_t>(32, std::size_t(std::ceil(2 * std::numbers::pi * r)));
        c.resize(n);
        s.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            const double t = 2 * std::numbers::pi * double(k) / double(n);
            c[k] = std::cos(t);
            s[k] = std::sin(t);
        }
    }
};

class Operator {
public:
    Operator(const GrayImage& img, int r_min, int r_max, double sigma)
        : plane_(img), r_min_(r_min), r_max_(r_max) {
        pad_ = int(std::ceil(3 * sigma));
        // Contour means at half-integer radii r_min - pad - 0.5 ... r_max + pad + 0.5.
        for (int k = 0; k <= (r_max_ - r_min_) + 2 * pad_ + 1; ++k) {
            const double r = radius(k);
            radii_.push_back(r);
            contours_.emplace_back(std::max(r, 0.5));
        }
        for (int d = -pad_; d <= pad_; ++d) blur_.push_back(std::exp(-0.5 * d * d / (sigma * sigma)));
    }

    // Best |blurred derivative| over radii for one center.
    std::pair<double, int> best(double cx, double cy) const {
        const std::size_t nr = radii_.size();
        std::vector<double> mean(nr, 0);
        std::vector<char> ok(nr, 0);
        for (std::size_t k = 0; k < nr; ++k) {
            if (radii_[k] <= 0) continue;
            const Contour& ct = contours_[k];
            double sum = 0;
            std::size_t n = 0;
            for (std::size_t a = 0; a < ct.c.size(); ++a) {
                double v;
                if (plane_.sample(cx + radii_[k] * ct.c[a], cy + radii_[k] * ct.s[a], v)) {
                    sum += v;
                    ++n;
                }
            }
            // Contours mostly outside the image carry no usable edge.
            if (2 * n >= ct.c.size()) {
                mean[k] = sum / double(n);
                ok[k] = 1;
            }
        }
        // deriv[j] = I(r + 1/2) - I(r - 1/2) for r = r_min - pad + j
        const std::size_t nd = nr - 1;
        std::vector<double> deriv(nd, 0);
        std::vector<char> dok(nd, 0);
        for (std::size_t j = 0; j < nd; ++j)
            if (ok[j] && ok[j + 1]) {
                deriv[j] = mean[j + 1] - mean[j];
                dok[j] = 1;
            }
        double top = -1;
        int top_r = r_min_;
        for (int r = r_min_; r <= r_max_; ++r) {
            const std::size_t j = std::size_t(r - r_min_ + pad_);
            if (!dok[j]) continue;
            double acc = 0, wsum = 0;
            for (int d = -pad_; d <= pad_; ++d) {
                const std::size_t q = std::size_t(long(j) + d);
                if (!dok[q]) continue;
                acc += blur_[std::size_t(d + pad_)] * deriv[q];
                wsum += blur_[std::size_t(d + pad_)];
            }
            const double resp = std::abs(acc / wsum);
            if (resp > top) {
                top = resp;
                top_r = r;
            }
        }
        return {std::max(top, 0.0), top_r};
    }

private:
    double radius(int k) const { return double(r_min_ - pad_) - 0.5 + double(k); }

    Plane plane_;
    int r_min_, r_max_, pad_;
    std::vector<double> radii_;
    std::vector<Contour> contours_;
    std::vector<double> blur_;
};

}  // namespace

LocateResult integro_differential_locate(const GrayImage& img, int r_min, int r_max,
                                         const LocateOptions& options) {
    const int limit = int(std::min(img.width, img.height) / 2);
    if (r_min < 1 || r_min >= r_max || r_max > limit)
        throw std::invalid_argument("integro-differential search: degenerate radius range [" +
                                    std::to_string(r_min) + ", " + std::to_string(r_max) +
                                    "] for a " + std::to_string(img.width) + "x" +
                                    std::to_string(img.height) + " image");
    if (options.sigma <= 0 || options.coarse_stride < 1 || options.refine_window < 0)
        throw std::invalid_argument("integro-differential search: bad options");

    int x0 = r_min, y0 = r_min, x1 = int(img.width) - 1 - r_min, y1 = int(img.height) - 1 - r_min;
    if (options.x1 >= options.x0) {
        x0 = std::max(0, options.x0);
        y0 = std::max(0, options.y0);
        x1 = std::min(int(img.width) - 1, options.x1);
        y1 = std::min(int(img.height) - 1, options.y1);
    }
    if (x0 > x1 || y0 > y1) throw std::invalid_argument("integro-differential search: empty center window");

    const Operator op(img, r_min, r_max, options.sigma);
    LocateResult res;
    res.response = -1;
    auto visit = [&](int cx, int cy) {
        const auto [resp, r] = op.best(cx, cy);
        if (resp > res.response) {
            res.response = resp;
            res.circle = {double(cx), double(cy), double(r)};
        }
    };
    for (int cy = y0; cy <= y1; cy += options.coarse_stride)
        for (int cx = x0; cx <= x1; cx += options.coarse_stride) visit(cx, cy);
    const int bx = int(res.circle.cx), by = int(res.circle.cy), w = options.refine_window;
    for (int cy = std::max(y0, by - w); cy <= std::min(y1, by + w); ++cy)
        for (int cx = std::max(x0, bx - w); cx <= std::min(x1, bx + w); ++cx) visit(cx, cy);
    res.response = std::max(res.response, 0.0);
    res.low_confidence = res.response < options.min_response;
    return res;
}

void IrisGeometry::validate() const {
    if (!(r_pupil > 0) || !(r_limbus > r_pupil))
        throw std::invalid_argument("iris geometry needs 0 < pupil radius < limbus radius");
}

IrisGeometry segment(const GrayImage& img, const SegmentOptions& options) {
    const LocateResult pupil =
        integro_differential_locate(img, options.pupil_min, options.pupil_max, options.locate);
    const int lo = std::max(options.iris_min, int(pupil.circle.r) + 2);
    if (lo >= options.iris_max)
        throw std::invalid_argument("segment: limbus range [" + std::to_string(lo) + ", " +
                                    std::to_string(options.iris_max) + "] is empty");
    LocateOptions at_center = options.locate;
    at_center.x0 = at_center.x1 = int(pupil.circle.cx);
    at_center.y0 = at_center.y1 = int(pupil.circle.cy);
    at_center.refine_window = 0;
    const LocateResult limbus = integro_differential_locate(img, lo, options.iris_max, at_center);
    IrisGeometry g{pupil.circle.cx, pupil.circle.cy, pupil.circle.r, limbus.circle.r,
                   pupil.low_confidence || limbus.low_confidence};
    return g;
}

NormalizedIris rubber_sheet(const GrayImage& img, const IrisGeometry& geometry,
                            const BinaryGrid* valid, std::size_t rows, std::size_t cols) {
    geometry.validate();
    if (rows < 2 || cols < 1) throw std::invalid_argument("rubber sheet needs at least 2 rows");
    if (valid && (valid->rows() != img.height || valid->cols() != img.width))
        throw std::invalid_argument("occlusion grid does not match the image extents");
    const Plane plane(img);
    NormalizedIris out{RealGrid(rows, cols), BinaryGrid(rows, cols, 0)};
    for (std::size_t j = 0; j < cols; ++j) {
        const double t = 2 * std::numbers::pi * double(j) / double(cols);
        const double c = std::cos(t), s = std::sin(t);
        for (std::size_t i = 0; i < rows; ++i) {
            const double rho = double(i) / double(rows - 1);
            const double r = (1 - rho) * geometry.r_pupil + rho * geometry.r_limbus;
            const double x = geometry.cx + r * c, y = geometry.cy + r * s;
            double v;
            if (!plane.sample(x, y, v)) continue;
            if (valid) {
                const long nx = std::lround(x), ny = std::lround(y);
                if (!valid->at(std::size_t(ny), std::size_t(nx))) continue;
            }
            out.strip.at(i, j) = v;
            out.mask.set(i, j, true);
        }
    }
    return out;
}

void write_normalized(const std::string& stem, const NormalizedIris& iris) {
    write_pgm(stem + ".norm.pgm", to_image(iris.strip));
    write_pgm(stem + ".mask.pgm", mask_to_image(iris.mask));
}

NormalizedIris read_normalized(const std::string& strip_path, const std::string& mask_path) {
    NormalizedIris n{to_grid(read_pgm(strip_path)), image_to_mask(read_pgm(mask_path))};
    if (n.mask.rows() != n.strip.rows || n.mask.cols() != n.strip.cols)
        throw std::runtime_error("mask '" + mask_path + "' does not match strip '" + strip_path + "'");
    return n;
}

}  // namespace ciris

#pragma once

#include <cstddef>
#include <string>

#include "ciris/grid.hpp"
#include "ciris/image.hpp"

namespace ciris {

struct Circle {
    double cx = 0, cy = 0, r = 0;
};

struct LocateOptions {
    double sigma = 1.5;       ///< radial blur of the contour derivative, px
    int coarse_stride = 2;    ///< center grid spacing of the first pass
    int refine_window = 2;    ///< second pass searches +-window around the coarse hit at 1 px
    double min_response = 0.02;  ///< below this the result is flagged low-confidence
    /// Restricts candidate centers to [x0, x1] x [y0, y1] when x1 >= x0.
    int x0 = 0, y0 = 0, x1 = -1, y1 = -1;
};

struct LocateResult {
    Circle circle;
    double response = 0;  ///< |d/dr| of the blurred contour mean, intensities in [0, 1]
    bool low_confidence = false;
};

/// Searches centers and integer radii in [r_min, r_max] for the circle with
/// the strongest blurred radial derivative of the mean contour intensity.
LocateResult integro_differential_locate(const GrayImage& img, int r_min, int r_max,
                                         const LocateOptions& options = {});

/// Concentric pupil and limbus circles.
struct IrisGeometry {
    double cx = 0, cy = 0;
    double r_pupil = 0, r_limbus = 0;
    bool low_confidence = false;

    void validate() const;
};

struct SegmentOptions {
    int pupil_min = 10, pupil_max = 60;
    int iris_min = 40, iris_max = 120;
    LocateOptions locate;
};

/// Pupil search over the whole image, then a radius-only limbus search at
/// the pupil center.
IrisGeometry segment(const GrayImage& img, const SegmentOptions& options = {});

struct NormalizedIris {
    RealGrid strip;    ///< rows = radial fraction (pupil to limbus), cols = angle
    BinaryGrid mask;   ///< 1 = valid sample
};

/// Samples `rows` radial fractions in [0, 1] and `cols` angles in [0, 2 pi)
/// with bilinear interpolation. A sample is invalid when its bilinear
/// neighbourhood leaves the image or when the nearest pixel is invalid in
/// `valid` (image-sized, 1 = usable).
NormalizedIris rubber_sheet(const GrayImage& img, const IrisGeometry& geometry,
                            const BinaryGrid* valid = nullptr, std::size_t rows = 64,
                            std::size_t cols = 256);

/// `<stem>.norm.pgm` and `<stem>.mask.pgm`.
void write_normalized(const std::string& stem, const NormalizedIris& iris);
NormalizedIris read_normalized(const std::string& strip_path, const std::string& mask_path);

}  // namespace ciris

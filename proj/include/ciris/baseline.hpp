#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ciris/layers.hpp"
#include "ciris/preprocess.hpp"

namespace ciris {

struct IrisCodeConfig {
    std::size_t rows = 8, cols = 128;
    std::vector<GaborParams> bank = default_bank();
    /// Cells whose real or imaginary response magnitude is below the floor
    /// are masked out; 0 disables the floor.
    double response_floor = 0;

    /// Wavelengths {8, 16} x orientations {0, pi/2}, psi = 0, delta = lambda/2,
    /// isotropic envelope.
    static std::vector<GaborParams> default_bank();
    /// Wavelengths {lambda, 2 lambda} x orientations {0, pi/2} with
    /// delta = delta_ratio * wavelength.
    static std::vector<GaborParams> bank_for(double lambda, double delta_ratio);
    void validate() const;
};

/// Two bits per (row, col, filter) cell: Re >= 0 and Im >= 0 of the Gabor
/// response. One mask bit per cell.
struct IrisCode {
    std::size_t rows = 0, cols = 0, filters = 0;
    std::vector<std::uint8_t> bits;  ///< ((row * cols + col) * filters + f) * 2 + {0 re, 1 im}
    std::vector<std::uint8_t> mask;  ///< (row * cols + col) * filters + f
    bool degenerate = false;         ///< every response was (numerically) zero

    std::size_t cells() const { return rows * cols * filters; }
    std::size_t valid_bits() const;
    friend bool operator==(const IrisCode&, const IrisCode&) = default;
};

/// Responses below this magnitude count as exactly zero.
inline constexpr double kZeroResponse = 1e-12;

/// Each filter is evaluated at a rows x cols lattice of the strip
/// (row centers, every cols-th column), with circular wrap along the angle
/// axis and edge replication along the radius. The strip is centered on
/// its valid mean first and invalid pixels contribute nothing. A cell is
/// valid when most strip pixels under its kernel footprint are valid.
IrisCode encode(const NormalizedIris& iris, const IrisCodeConfig& config = {});

struct HammingResult {
    double distance = 0;
    int shift = 0;
    std::size_t bits = 0;  ///< compared bits at the best shift
};

/// Minimum over circular column shifts b in [-B, B] of the fraction of
/// disagreeing bits among jointly valid cells, with a's columns rolled by b.
/// Ties favour the smaller |b|, then the negative shift.
HammingResult hamming(const IrisCode& a, const IrisCode& b, int max_shift);

/// "ICOD" file: version, extents, degenerate flag, packed bits, packed mask.
void write_iriscode(const std::string& path, const IrisCode& code);
IrisCode read_iriscode(const std::string& path);

/// Decidability |mu_i - mu_g| / sqrt((var_g + var_i) / 2).
double d_prime(const std::vector<double>& genuine, const std::vector<double>& impostor);

struct GridPoint {
    double lambda = 0, delta_ratio = 0;
    double d_prime = 0;
    double genuine_mean = 0, impostor_mean = 0;
};

/// Scores every pair of the given strips for each (lambda, delta ratio)
/// candidate bank and reports the separation; sorted by decreasing d'.
std::vector<GridPoint> iriscode_grid(const std::vector<NormalizedIris>& strips,
                                     const std::vector<int>& labels,
                                     const std::vector<double>& lambdas,
                                     const std::vector<double>& delta_ratios,
                                     const IrisCodeConfig& base, int max_shift);

}  // namespace ciris

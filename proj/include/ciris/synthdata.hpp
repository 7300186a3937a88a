#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ciris/image.hpp"
#include "ciris/preprocess.hpp"

namespace ciris {

/// Synthetic iris strips: one 1/f^alpha texture per identity, per-sample
/// circular rotation, pixel noise and optional occlusion band.
struct SynthSpec {
    std::size_t identities = 10;
    std::size_t samples = 8;       ///< per identity
    double noise_std = 0.08;       ///< Gaussian pixel noise, [0, 1] intensity units
    int max_rotation = 8;          ///< columns, uniform in [-max, max]
    double occlusion_p = 0.3;      ///< probability of an occluded angular band
    double alpha = 1.0;            ///< amplitude spectrum falls off as 1/f^alpha
    std::uint64_t seed = 7;
    std::size_t rows = 64, cols = 256;
    double texture_mean = 0.5, texture_std = 0.04;
    double occluder_level = 0.85;  ///< intensity painted into occluded bands
    double train_fraction = 0.6, val_fraction = 0.1;  ///< identity split, rest is test
    bool eyes = false;             ///< also render eye images around each strip

    void validate() const;
    /// "train", "val" or "test" for an identity index.
    std::string split_of(std::size_t identity) const;
};

struct ManifestEntry {
    std::string strip_path;
    std::string mask_path;
    int identity = 0;
    std::string split;
};

using Manifest = std::vector<ManifestEntry>;

/// `strip_path,mask_path,identity,split` with a header line. Relative paths
/// are written relative to the manifest's directory.
void write_manifest(const std::string& path, const Manifest& manifest);
/// Relative paths are resolved against the manifest's directory.
Manifest read_manifest(const std::string& path);

/// Clean texture of one identity, values clipped to [0, 1].
RealGrid base_texture(const SynthSpec& spec, std::size_t identity);

struct SynthSample {
    NormalizedIris iris;
    int rotation = 0;
    bool occluded = false;
};

/// Sample `index` of an identity from its base texture.
SynthSample make_sample(const SynthSpec& spec, const RealGrid& base, std::size_t identity,
                        std::size_t index);

/// Writes `id<k>_s<j>.norm.pgm` / `.mask.pgm` (plus `.eye.pgm` when
/// spec.eyes) and `manifest.csv` into out_dir, which is created if needed.
Manifest generate(const SynthSpec& spec, const std::string& out_dir);

/// Geometry used for rendered eyes.
IrisGeometry synthetic_geometry();

/// Eye image whose annulus carries `strip` (row 0 at the pupil, column j at
/// angle 2 pi j / cols); pupil and sclera are flat.
GrayImage render_eye(const RealGrid& strip, const IrisGeometry& geometry, std::size_t width,
                     std::size_t height, double pupil_level = 0.1, double sclera_level = 0.85);

}  // namespace ciris

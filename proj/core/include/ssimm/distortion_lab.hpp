#pragma once

#include "ssimm/image_blocks.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace ssimm {

/// Distortion families; the numeric value is the class label.
enum class DistortionKind : int {
  Original = 0,
  ContrastStretch = 1,
  GaussianNoise = 2,
  LuminanceEnhance = 3,
  GaussianBlur = 4,
  SaltPepper = 5,
  JpegLike = 6,
};

inline constexpr int kDistortionClassCount = 7;

std::string_view to_string(DistortionKind kind);
/// One-letter code: O C G L B I J.
char short_code(DistortionKind kind);
DistortionKind distortion_from_label(int label);
DistortionKind parse_distortion_kind(std::string_view name);

/// The six non-identity families in label order.
std::vector<DistortionKind> all_distortions();

/// Strength units by kind: stretch gain - 1, noise sigma, luminance offset,
/// blur sigma in pixels, impulse fraction, quantization-table scale.
struct DistortionSpec {
  DistortionKind kind = DistortionKind::Original;
  double strength = 0.0;
  std::uint64_t seed = 0;
};

/// Applies one distortion; output clamped to [0, 1]. Deterministic in
/// (image, spec). strength = 0 returns the input unchanged.
///   ContrastStretch  x -> (1 + s)(x - 0.5) + 0.5
///   GaussianNoise    x -> x + s z,  z ~ N(0, 1) i.i.d. from the seed
///   LuminanceEnhance x -> x + s on average: each pixel moves floor(255 s) or
///                    floor(255 s) + 1 grey levels (seeded choice), so the
///                    shift survives 8-bit rounding as a continuous MSE
///   GaussianBlur     separable Gaussian, sigma s, radius ceil(3s), reflected borders
///   SaltPepper       fraction s of pixels (seeded order) set to 0 or 1; the
///                    pixel at the fractional boundary moves part of the way
///   JpegLike         8x8 DCT, quantization by the luminance table times s
/// Throws InvalidParameter for negative or non-finite strength.
GrayImage apply(const GrayImage& image, const DistortionSpec& spec);

/// Upper end of the calibration bracket for a kind.
double max_strength(DistortionKind kind, const GrayImage& image);

struct CalibrationOptions {
  double relative_tolerance = 0.01;
  int max_steps = 100;
  /// Measure MSE after rounding the distorted image to 8 bits, so the value
  /// holds for the image as written to disk.
  bool quantize_8bit = false;
};

/// Bisection on strength until the byte-scale MSE is within the relative
/// tolerance of `target_mse`. Stochastic kinds keep one noise realization
/// (the seed) throughout, so the MSE is a deterministic function of strength.
/// Throws InvalidParameter for kind Original with a positive target or a
/// negative target, CalibrationFailure when the target is not reached.
DistortionSpec calibrate_to_mse(const GrayImage& image, DistortionKind kind, double target_mse, std::uint64_t seed,
                                const CalibrationOptions& options = {});

struct LabeledImage {
  std::string name;
  GrayImage image;
  DistortionSpec spec;
  double target_mse = 0.0;
  double achieved_mse = 0.0;

  int label() const noexcept { return static_cast<int>(spec.kind); }
};

/// The original plus one calibrated image per (kind, level), kinds outermost.
/// Outputs are rounded to 8 bits. Per-cell seeds are derived from `seed`.
std::vector<LabeledImage> synth_dataset(const GrayImage& base, const std::vector<double>& levels,
                                        const std::vector<DistortionKind>& kinds, std::uint64_t seed,
                                        const CalibrationOptions& options = {.quantize_8bit = true});

/// Parses "first:last:step" (inclusive) or a comma list "45,90,135".
std::vector<double> parse_levels(std::string_view text);

/// Writes <dir>/<name> PGMs plus <dir>/manifest.json.
void write_dataset(const std::vector<LabeledImage>& images, const std::filesystem::path& dir);

/// Reads a directory written by write_dataset, in manifest order.
std::vector<LabeledImage> read_dataset(const std::filesystem::path& dir);

/// Deterministic textured test image (gratings, edges, ramps, fine noise),
/// rounded to 8 bits, with intensities kept away from 0 and 1.
GrayImage synthetic_texture(std::size_t width, std::size_t height, std::uint64_t seed = 7);

}  // namespace ssimm

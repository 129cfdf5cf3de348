#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <filesystem>
#include <utility>

namespace ssimm {

/// Grayscale image with intensities in [0, 1], stored row-major.
class GrayImage {
public:
  GrayImage() = default;

  /// Throws InvalidParameter on zero size or size mismatch, InvalidInput on
  /// intensities outside [0, 1] or non-finite.
  GrayImage(std::size_t width, std::size_t height, Eigen::VectorXd pixels);

  /// Uniform image filled with `value`.
  static GrayImage filled(std::size_t width, std::size_t height, double value);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(pixels_.size()); }
  bool empty() const noexcept { return pixels_.size() == 0; }

  const Eigen::VectorXd& pixels() const noexcept { return pixels_; }
  double operator()(std::size_t row, std::size_t col) const { return pixels_[static_cast<Eigen::Index>(row * width_ + col)]; }

  friend bool operator==(const GrayImage& a, const GrayImage& b) {
    return a.width_ == b.width_ && a.height_ == b.height_ && a.pixels_ == b.pixels_;
  }

private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  Eigen::VectorXd pixels_;
};

/// Split of a d-pixel raster into b = ceil(d / q) consecutive length-q blocks.
/// The final block is zero-padded when q does not divide d.
struct BlockPartition {
  std::size_t pixel_count = 0;  // d
  std::size_t block_length = 0; // q
  std::size_t block_count = 0;  // b
  std::size_t pad_length = 0;   // b*q - d

  /// Pixel index range [first, last) covered by block `i`, excluding padding.
  std::pair<std::size_t, std::size_t> pixel_range(std::size_t i) const;

  /// Number of real (non-padding) pixels in block `i`.
  std::size_t valid_length(std::size_t i) const;

  friend bool operator==(const BlockPartition&, const BlockPartition&) = default;
};

/// Zero-mean blocks of one image plus the removed means.
struct CenteredBlockSet {
  Eigen::MatrixXd blocks; // b x q, each row zero-mean
  Eigen::VectorXd means;  // b
  BlockPartition partition;
  bool byte_grid = false;  // every source pixel was a multiple of 1/255
};

BlockPartition partition(std::size_t pixel_count, std::size_t block_length);
BlockPartition partition(const GrayImage& image, std::size_t block_length);

/// Raw (uncentered) blocks, b x q, final block zero-padded.
Eigen::MatrixXd extract_blocks(const GrayImage& image, const BlockPartition& part);

/// Subtracts each block's mean over its valid pixels. Padding stays zero.
CenteredBlockSet center_blocks(const GrayImage& image, const BlockPartition& part);

/// Inverse of center_blocks: adds the means back and drops the padding.
/// Sums are snapped back to the 8-bit grid when the source was on it, which
/// makes the round trip exact for every image read from a PGM file; other
/// inputs come back within one rounding of the original.
Eigen::VectorXd reassemble(const CenteredBlockSet& set);

enum class MseScale { Unit, Byte255 };

/// Mean squared error, optionally on the 0..255 intensity scale.
double mse(const GrayImage& a, const GrayImage& b, MseScale scale = MseScale::Byte255);

/// Rounds every intensity to the nearest multiple of 1/255.
GrayImage quantize_8bit(const GrayImage& image);

/// Binary 8-bit PGM (P5). Intensities are v / maxval.
GrayImage read_pgm(const std::filesystem::path& path);

/// Writes a P5 file with maxval 255; intensities are rounded to the byte grid.
void write_pgm(const GrayImage& image, const std::filesystem::path& path);

}  // namespace ssimm

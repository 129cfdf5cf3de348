#include "ssimm/image_blocks.hpp"

#include "ssimm/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace ssimm {

GrayImage::GrayImage(std::size_t width, std::size_t height, Eigen::VectorXd pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (width_ == 0 || height_ == 0) {
    throw InvalidParameter("GrayImage: width and height must be positive");
  }
  if (static_cast<std::size_t>(pixels_.size()) != width_ * height_) {
    throw InvalidParameter("GrayImage: pixel count " + std::to_string(pixels_.size()) +
                           " does not match " + std::to_string(width_) + "x" + std::to_string(height_));
  }
  for (Eigen::Index i = 0; i < pixels_.size(); ++i) {
    const double v = pixels_[i];
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      throw InvalidInput("GrayImage: intensity " + std::to_string(v) + " at pixel " + std::to_string(i) +
                         " outside [0,1]");
    }
  }
}

GrayImage GrayImage::filled(std::size_t width, std::size_t height, double value) {
  return GrayImage(width, height, Eigen::VectorXd::Constant(static_cast<Eigen::Index>(width * height), value));
}

std::pair<std::size_t, std::size_t> BlockPartition::pixel_range(std::size_t i) const {
  const std::size_t first = i * block_length;
  const std::size_t last = std::min(first + block_length, pixel_count);
  return {first, last};
}

std::size_t BlockPartition::valid_length(std::size_t i) const {
  const auto [first, last] = pixel_range(i);
  return last - first;
}

BlockPartition partition(std::size_t pixel_count, std::size_t block_length) {
  if (block_length == 0 || block_length > pixel_count) {
    throw InvalidParameter("partition: block length must satisfy 1 <= q <= d (q=" + std::to_string(block_length) +
                           ", d=" + std::to_string(pixel_count) + ")");
  }
  BlockPartition p;
  p.pixel_count = pixel_count;
  p.block_length = block_length;
  p.block_count = (pixel_count + block_length - 1) / block_length;
  p.pad_length = p.block_count * block_length - pixel_count;
  return p;
}

BlockPartition partition(const GrayImage& image, std::size_t block_length) {
  return partition(image.size(), block_length);
}

namespace {

void check_matches(const GrayImage& image, const BlockPartition& part) {
  if (image.size() != part.pixel_count) {
    throw InvalidInput("block partition covers " + std::to_string(part.pixel_count) + " pixels, image has " +
                       std::to_string(image.size()));
  }
}

}  // namespace

Eigen::MatrixXd extract_blocks(const GrayImage& image, const BlockPartition& part) {
  check_matches(image, part);
  const auto q = static_cast<Eigen::Index>(part.block_length);
  Eigen::MatrixXd blocks = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(part.block_count), q);
  const auto& px = image.pixels();
  for (std::size_t i = 0; i < part.block_count; ++i) {
    const auto [first, last] = part.pixel_range(i);
    const auto len = static_cast<Eigen::Index>(last - first);
    blocks.row(static_cast<Eigen::Index>(i)).head(len) = px.segment(static_cast<Eigen::Index>(first), len).transpose();
  }
  return blocks;
}

CenteredBlockSet center_blocks(const GrayImage& image, const BlockPartition& part) {
  CenteredBlockSet set;
  set.partition = part;
  set.blocks = extract_blocks(image, part);
  set.byte_grid = quantize_8bit(image).pixels() == image.pixels();
  set.means.resize(static_cast<Eigen::Index>(part.block_count));
  for (std::size_t i = 0; i < part.block_count; ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    const auto len = static_cast<Eigen::Index>(part.valid_length(i));
    auto valid = set.blocks.row(row).head(len);
    const double mu = valid.mean();
    valid.array() -= mu;
    set.means[row] = mu;
  }
  return set;
}

Eigen::VectorXd reassemble(const CenteredBlockSet& set) {
  const auto& part = set.partition;
  Eigen::VectorXd out(static_cast<Eigen::Index>(part.pixel_count));
  for (std::size_t i = 0; i < part.block_count; ++i) {
    const auto [first, last] = part.pixel_range(i);
    const auto len = static_cast<Eigen::Index>(last - first);
    const auto row = static_cast<Eigen::Index>(i);
    out.segment(static_cast<Eigen::Index>(first), len) =
        (set.blocks.row(row).head(len).array() + set.means[row]).transpose();
  }
  if (set.byte_grid) out = out.unaryExpr([](double v) { return std::round(v * 255.0) / 255.0; });
  return out;
}

double mse(const GrayImage& a, const GrayImage& b, MseScale scale) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw InvalidInput("mse: image dimensions differ");
  }
  const double factor = scale == MseScale::Byte255 ? 255.0 : 1.0;
  return ((a.pixels() - b.pixels()) * factor).squaredNorm() / static_cast<double>(a.size());
}

GrayImage quantize_8bit(const GrayImage& image) {
  Eigen::VectorXd px = image.pixels().unaryExpr([](double v) { return std::round(v * 255.0) / 255.0; });
  return GrayImage(image.width(), image.height(), std::move(px));
}

namespace {

// Reads the next whitespace-delimited header token, skipping '#' comments.
std::string next_token(std::istream& in) {
  std::string token;
  while (in) {
    const int c = in.peek();
    if (c == '#') {
      std::string ignored;
      std::getline(in, ignored);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
  }
  in >> token;
  return token;
}

}  // namespace

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());

  if (next_token(in) != "P5") throw IoError(path.string() + ": not a binary PGM (P5)");
  std::size_t width = 0, height = 0;
  int maxval = 0;
  try {
    width = std::stoul(next_token(in));
    height = std::stoul(next_token(in));
    maxval = std::stoi(next_token(in));
  } catch (const std::exception&) {
    throw IoError(path.string() + ": malformed PGM header");
  }
  if (maxval <= 0 || maxval > 255) throw IoError(path.string() + ": only 8-bit PGM is supported");
  in.get();  // single whitespace after maxval

  std::vector<unsigned char> raw(width * height);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size())) throw IoError(path.string() + ": truncated pixel data");

  Eigen::VectorXd px(static_cast<Eigen::Index>(raw.size()));
  for (std::size_t i = 0; i < raw.size(); ++i) {
    px[static_cast<Eigen::Index>(i)] = std::min(1.0, raw[i] / static_cast<double>(maxval));
  }
  return GrayImage(width, height, std::move(px));
}

void write_pgm(const GrayImage& image, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P5\n" << image.width() << ' ' << image.height() << "\n255\n";
  std::vector<unsigned char> raw(image.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    raw[i] = static_cast<unsigned char>(std::lround(image.pixels()[static_cast<Eigen::Index>(i)] * 255.0));
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace ssimm

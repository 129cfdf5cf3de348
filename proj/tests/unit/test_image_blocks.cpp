#include "ssimm/error.hpp"
#include "ssimm/image_blocks.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

using namespace ssimm;

namespace {

GrayImage random_image(std::size_t w, std::size_t h, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::VectorXd px(static_cast<Eigen::Index>(w * h));
  for (auto& v : px) v = u(rng);
  return GrayImage(w, h, px);
}

}  // namespace

TEST(GrayImage, RejectsOutOfRangeAndBadSizes) {
  EXPECT_THROW(GrayImage(2, 2, Eigen::VectorXd::Constant(4, 1.5)), InvalidInput);
  EXPECT_THROW(GrayImage(2, 2, Eigen::VectorXd::Constant(3, 0.5)), InvalidParameter);
  EXPECT_THROW(GrayImage(0, 2, Eigen::VectorXd()), InvalidParameter);
  Eigen::VectorXd nan = Eigen::VectorXd::Constant(4, 0.5);
  nan[2] = std::nan("");
  EXPECT_THROW(GrayImage(2, 2, nan), InvalidInput);
}

TEST(Partition, FullScale) {
  const auto p = partition(std::size_t{512 * 512}, 64);
  EXPECT_EQ(p.block_count, 4096u);
  EXPECT_EQ(p.pad_length, 0u);
}

TEST(Partition, SingleBlock) {
  const auto img = random_image(4, 3, 1);
  const auto p = partition(img, 12);
  EXPECT_EQ(p.block_count, 1u);
  const auto blocks = extract_blocks(img, p);
  EXPECT_EQ(blocks.row(0).transpose(), img.pixels());
}

TEST(Partition, PaddedFinalBlock) {
  Eigen::VectorXd px(10);
  for (int i = 0; i < 10; ++i) px[i] = (i + 1) / 10.0;
  const GrayImage img(5, 2, px);
  const auto p = partition(img, 4);
  EXPECT_EQ(p.block_count, 3u);
  EXPECT_EQ(p.pad_length, 2u);
  EXPECT_EQ(p.pixel_range(2), std::make_pair(std::size_t{8}, std::size_t{10}));
  const auto blocks = extract_blocks(img, p);
  EXPECT_DOUBLE_EQ(blocks(2, 0), px[8]);
  EXPECT_DOUBLE_EQ(blocks(2, 1), px[9]);
  EXPECT_EQ(blocks(2, 2), 0.0);
  EXPECT_EQ(blocks(2, 3), 0.0);
}

TEST(Partition, InvalidBlockLength) {
  EXPECT_THROW(partition(std::size_t{10}, 0), InvalidParameter);
  EXPECT_THROW(partition(std::size_t{10}, 11), InvalidParameter);
}

TEST(Partition, Deterministic) { EXPECT_EQ(partition(std::size_t{1000}, 64), partition(std::size_t{1000}, 64)); }

TEST(CenterBlocks, ConstantBlock) {
  const auto img = GrayImage::filled(2, 2, 0.3);
  const auto set = center_blocks(img, partition(img, 4));
  EXPECT_TRUE(set.blocks.isZero(0.0));
  EXPECT_DOUBLE_EQ(set.means[0], 0.3);
}

TEST(CenterBlocks, QuarterScaleRamp) {
  const GrayImage img(4, 1, Eigen::Vector4d(0.25, 0.5, 0.75, 1.0));
  const auto set = center_blocks(img, partition(img, 4));
  EXPECT_DOUBLE_EQ(set.means[0], 0.625);
  EXPECT_NEAR(set.blocks.row(0).sum(), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(set.blocks(0, 0), -0.375);
}

TEST(CenterBlocks, RandomBlocksAreZeroMeanAndPaddingIgnored) {
  const auto img = random_image(13, 7, 2);  // 91 pixels, q = 8 -> 5 pad
  const auto set = center_blocks(img, partition(img, 8));
  for (std::size_t i = 0; i < set.partition.block_count; ++i) {
    const auto len = static_cast<Eigen::Index>(set.partition.valid_length(i));
    EXPECT_LT(std::abs(set.blocks.row(static_cast<Eigen::Index>(i)).head(len).mean()), 1e-12);
  }
  const auto last = static_cast<Eigen::Index>(set.partition.block_count - 1);
  EXPECT_TRUE(set.blocks.row(last).tail(5).isZero(0.0));
  // The mean of the final block uses its 3 real pixels only.
  EXPECT_NEAR(set.means[last], img.pixels().tail(3).mean(), 1e-15);
}

TEST(CenterBlocks, ReassemblyReproducesByteImagesExactly) {
  // On the 8-bit grid (every image read from disk) the round trip is exact.
  for (unsigned seed = 0; seed < 20; ++seed) {
    const auto img = quantize_8bit(random_image(17, 9, seed));
    for (std::size_t q : {1, 4, 7, 16, 64, 153}) {
      const auto set = center_blocks(img, partition(img, q));
      EXPECT_EQ(reassemble(set), img.pixels()) << "seed " << seed << " q " << q;
    }
  }
}

TEST(CenterBlocks, ReassemblyOfArbitraryRealsIsWithinRounding) {
  const auto img = random_image(16, 16, 3);
  const auto set = center_blocks(img, partition(img, 16));
  EXPECT_LE((reassemble(set) - img.pixels()).cwiseAbs().maxCoeff(), 2.3e-16);
}

TEST(Mse, Examples) {
  const GrayImage a(2, 1, Eigen::Vector2d(0.0, 0.0));
  const GrayImage b(2, 1, Eigen::Vector2d(10.0 / 255.0, 20.0 / 255.0));
  EXPECT_NEAR(mse(a, b), 250.0, 1e-10);
  EXPECT_NEAR(mse(a, b, MseScale::Unit), 250.0 / (255.0 * 255.0), 1e-15);
  EXPECT_EQ(mse(a, a), 0.0);
  EXPECT_EQ(mse(a, b), mse(b, a));
  EXPECT_THROW(mse(a, GrayImage::filled(1, 2, 0.0)), InvalidInput);
}

TEST(Pgm, RoundTripAndComments) {
  const auto dir = std::filesystem::temp_directory_path() / "ssimm_pgm_test";
  std::filesystem::create_directories(dir);
  const auto img = quantize_8bit(random_image(5, 3, 4));
  write_pgm(img, dir / "a.pgm");
  EXPECT_EQ(read_pgm(dir / "a.pgm"), img);

  {
    std::ofstream out(dir / "b.pgm", std::ios::binary);
    out << "P5\n# a comment\n2 1\n# another\n255\n";
    out.put(static_cast<char>(0));
    out.put(static_cast<char>(255));
  }
  const auto b = read_pgm(dir / "b.pgm");
  EXPECT_EQ(b.width(), 2u);
  EXPECT_EQ(b.pixels()[1], 1.0);

  {
    std::ofstream out(dir / "c.pgm", std::ios::binary);
    out << "P2\n2 1\n255\n0 0\n";
  }
  EXPECT_THROW(read_pgm(dir / "c.pgm"), IoError);
  {
    std::ofstream out(dir / "d.pgm", std::ios::binary);
    out << "P5\n4 4\n255\n";
    out.put('x');
  }
  EXPECT_THROW(read_pgm(dir / "d.pgm"), IoError);
  EXPECT_THROW(read_pgm(dir / "missing.pgm"), IoError);
  std::filesystem::remove_all(dir);
}

#include "ssimm/distortion_lab.hpp"

#include "ssimm/error.hpp"

#include "json.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

namespace ssimm {

namespace {

constexpr std::array<std::string_view, kDistortionClassCount> kNames = {
    "original", "contrast_stretch", "gaussian_noise", "luminance_enhance", "gaussian_blur", "salt_pepper", "jpeg_like"};
constexpr std::array<char, kDistortionClassCount> kCodes = {'O', 'C', 'G', 'L', 'B', 'I', 'J'};

// Standard JPEG luminance quantization table (ITU T.81, Annex K.1).
constexpr std::array<double, 64> kLumaTable = {
    16, 11, 10, 16, 24,  40,  51,  61,  12, 12, 14, 19, 26,  58,  60,  55,  14, 13, 16, 24, 40,  57,
    69, 56, 14, 17, 22,  29,  51,  87,  80, 62, 18, 22, 37,  56,  68,  109, 103, 77, 24, 35, 55, 64,
    81, 104, 113, 92, 49, 64, 78, 87, 103, 121, 120, 101, 72, 92, 95, 98, 112, 100, 103, 99};

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

GrayImage map_pixels(const GrayImage& image, auto&& fn) {
  Eigen::VectorXd px = image.pixels().unaryExpr([&](double v) { return clamp01(fn(v)); });
  return GrayImage(image.width(), image.height(), std::move(px));
}

GrayImage add_gaussian_noise(const GrayImage& image, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd px = image.pixels();
  for (Eigen::Index i = 0; i < px.size(); ++i) px[i] = clamp01(px[i] + sigma * normal(rng));
  return GrayImage(image.width(), image.height(), std::move(px));
}

GrayImage salt_and_pepper(const GrayImage& image, double fraction, std::uint64_t seed) {
  const std::size_t d = image.size();
  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::bernoulli_distribution coin(0.5);
  std::vector<char> salt(d);
  for (auto& s : salt) s = coin(rng) ? 1 : 0;

  const double count = std::min(fraction, 1.0) * static_cast<double>(d);
  const auto full = static_cast<std::size_t>(std::floor(count));
  const double partial = count - static_cast<double>(full);

  Eigen::VectorXd px = image.pixels();
  for (std::size_t r = 0; r < full; ++r) {
    const auto i = static_cast<Eigen::Index>(order[r]);
    px[i] = salt[order[r]] ? 1.0 : 0.0;
  }
  if (full < d && partial > 0.0) {
    const auto i = static_cast<Eigen::Index>(order[full]);
    const double impulse = salt[order[full]] ? 1.0 : 0.0;
    px[i] += partial * (impulse - px[i]);
  }
  return GrayImage(image.width(), image.height(), std::move(px));
}

// Shift by s on the 8-bit grid: every pixel moves floor(255 s) levels, a
// seeded subset of pixels one level more, so that the mean shift is exactly s
// and the MSE after 8-bit rounding varies continuously with s.
GrayImage luminance_shift(const GrayImage& image, double s, std::uint64_t seed) {
  const std::size_t d = image.size();
  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const double levels = 255.0 * s;
  const double whole = std::floor(levels);
  const double extra = (levels - whole) * static_cast<double>(d);
  const auto full = static_cast<std::size_t>(std::floor(extra));
  const double partial = extra - static_cast<double>(full);

  Eigen::VectorXd px = image.pixels();
  for (std::size_t r = 0; r < d; ++r) {
    double shift = whole;
    if (r < full) {
      shift += 1.0;
    } else if (r == full) {
      shift += partial;
    }
    const auto i = static_cast<Eigen::Index>(order[r]);
    px[i] = clamp01(px[i] + shift / 255.0);
  }
  return GrayImage(image.width(), image.height(), std::move(px));
}

// Reflect an out-of-range index back into [0, n): -1 -> 1, n -> n - 2.
std::size_t reflect(long long i, long long n) {
  if (n == 1) return 0;
  const long long period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  if (i >= n) i = period - i;
  return static_cast<std::size_t>(i);
}

GrayImage gaussian_blur(const GrayImage& image, double sigma) {
  const auto radius = static_cast<long long>(std::ceil(3.0 * sigma));
  std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
  for (long long t = -radius; t <= radius; ++t) {
    taps[static_cast<std::size_t>(t + radius)] = std::exp(-static_cast<double>(t * t) / (2.0 * sigma * sigma));
  }
  const double total = std::accumulate(taps.begin(), taps.end(), 0.0);
  for (auto& t : taps) t /= total;

  const auto w = static_cast<long long>(image.width());
  const auto h = static_cast<long long>(image.height());
  const auto& src = image.pixels();
  Eigen::VectorXd tmp(src.size());
  for (long long y = 0; y < h; ++y) {
    for (long long x = 0; x < w; ++x) {
      double acc = 0.0;
      for (long long t = -radius; t <= radius; ++t) {
        acc += taps[static_cast<std::size_t>(t + radius)] * src[static_cast<Eigen::Index>(y * w + static_cast<long long>(reflect(x + t, w)))];
      }
      tmp[static_cast<Eigen::Index>(y * w + x)] = acc;
    }
  }
  Eigen::VectorXd out(src.size());
  for (long long y = 0; y < h; ++y) {
    for (long long x = 0; x < w; ++x) {
      double acc = 0.0;
      for (long long t = -radius; t <= radius; ++t) {
        acc += taps[static_cast<std::size_t>(t + radius)] * tmp[static_cast<Eigen::Index>(static_cast<long long>(reflect(y + t, h)) * w + x)];
      }
      out[static_cast<Eigen::Index>(y * w + x)] = clamp01(acc);
    }
  }
  return GrayImage(image.width(), image.height(), std::move(out));
}

// Orthonormal 8-point DCT-II basis: basis(u, x).
const Eigen::Matrix<double, 8, 8>& dct_basis() {
  static const Eigen::Matrix<double, 8, 8> basis = [] {
    Eigen::Matrix<double, 8, 8> b;
    for (int u = 0; u < 8; ++u) {
      const double alpha = u == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
      for (int x = 0; x < 8; ++x) b(u, x) = alpha * std::cos((2.0 * x + 1.0) * u * std::numbers::pi / 16.0);
    }
    return b;
  }();
  return basis;
}

GrayImage jpeg_like(const GrayImage& image, double scale) {
  const auto w = static_cast<long long>(image.width());
  const auto h = static_cast<long long>(image.height());
  const auto& src = image.pixels();
  const auto& C = dct_basis();
  Eigen::VectorXd out(src.size());

  for (long long by = 0; by < h; by += 8) {
    for (long long bx = 0; bx < w; bx += 8) {
      // Partial tiles are filled by edge replication and cropped afterwards.
      Eigen::Matrix<double, 8, 8> tile;
      for (int y = 0; y < 8; ++y) {
        for (int x = 0; x < 8; ++x) {
          const long long sy = std::min(by + y, h - 1);
          const long long sx = std::min(bx + x, w - 1);
          tile(y, x) = 255.0 * src[static_cast<Eigen::Index>(sy * w + sx)] - 128.0;
        }
      }
      Eigen::Matrix<double, 8, 8> coeff = C * tile * C.transpose();
      for (int u = 0; u < 8; ++u) {
        for (int v = 0; v < 8; ++v) {
          const double step = kLumaTable[static_cast<std::size_t>(u * 8 + v)] * scale;
          coeff(u, v) = std::round(coeff(u, v) / step) * step;
        }
      }
      const Eigen::Matrix<double, 8, 8> rec = C.transpose() * coeff * C;
      for (int y = 0; y < 8 && by + y < h; ++y) {
        for (int x = 0; x < 8 && bx + x < w; ++x) {
          out[static_cast<Eigen::Index>((by + y) * w + bx + x)] = clamp01((rec(y, x) + 128.0) / 255.0);
        }
      }
    }
  }
  return GrayImage(image.width(), image.height(), std::move(out));
}

}  // namespace

std::string_view to_string(DistortionKind kind) { return kNames.at(static_cast<std::size_t>(kind)); }

char short_code(DistortionKind kind) { return kCodes.at(static_cast<std::size_t>(kind)); }

DistortionKind distortion_from_label(int label) {
  if (label < 0 || label >= kDistortionClassCount) {
    throw InvalidParameter("distortion label " + std::to_string(label) + " outside 0..6");
  }
  return static_cast<DistortionKind>(label);
}

DistortionKind parse_distortion_kind(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (name == kNames[i] || (name.size() == 1 && name[0] == kCodes[i])) return static_cast<DistortionKind>(i);
  }
  throw InvalidParameter("unknown distortion '" + std::string(name) + "'");
}

std::vector<DistortionKind> all_distortions() {
  return {DistortionKind::ContrastStretch, DistortionKind::GaussianNoise, DistortionKind::LuminanceEnhance,
          DistortionKind::GaussianBlur,    DistortionKind::SaltPepper,    DistortionKind::JpegLike};
}

GrayImage apply(const GrayImage& image, const DistortionSpec& spec) {
  const double s = spec.strength;
  if (!std::isfinite(s) || s < 0.0) throw InvalidParameter("distortion strength must be finite and >= 0");
  if (s == 0.0 || spec.kind == DistortionKind::Original) return image;

  switch (spec.kind) {
    case DistortionKind::ContrastStretch:
      return map_pixels(image, [s](double v) { return (1.0 + s) * (v - 0.5) + 0.5; });
    case DistortionKind::GaussianNoise:
      return add_gaussian_noise(image, s, spec.seed);
    case DistortionKind::LuminanceEnhance:
      return luminance_shift(image, s, spec.seed);
    case DistortionKind::GaussianBlur:
      return gaussian_blur(image, s);
    case DistortionKind::SaltPepper:
      return salt_and_pepper(image, s, spec.seed);
    case DistortionKind::JpegLike:
      return jpeg_like(image, s);
    case DistortionKind::Original:
      break;
  }
  return image;
}

double max_strength(DistortionKind kind, const GrayImage& image) {
  switch (kind) {
    case DistortionKind::Original: return 0.0;
    case DistortionKind::ContrastStretch: return 20.0;
    case DistortionKind::GaussianNoise: return 1.0;
    case DistortionKind::LuminanceEnhance: return 1.0;
    case DistortionKind::GaussianBlur:
      return std::min(32.0, 0.5 * static_cast<double>(std::max(image.width(), image.height())));
    case DistortionKind::SaltPepper: return 1.0;
    case DistortionKind::JpegLike: return 50.0;
  }
  return 0.0;
}

DistortionSpec calibrate_to_mse(const GrayImage& image, DistortionKind kind, double target_mse, std::uint64_t seed,
                                const CalibrationOptions& options) {
  if (!(target_mse >= 0.0)) throw InvalidParameter("target MSE must be >= 0");
  DistortionSpec spec{kind, 0.0, seed};
  if (target_mse == 0.0) return spec;
  if (kind == DistortionKind::Original) throw InvalidParameter("cannot calibrate the identity distortion");

  const GrayImage reference = options.quantize_8bit ? quantize_8bit(image) : image;
  const auto measure = [&](double strength) {
    GrayImage out = apply(image, DistortionSpec{kind, strength, seed});
    if (options.quantize_8bit) out = quantize_8bit(out);
    return mse(reference, out, MseScale::Byte255);
  };
  const auto within = [&](double value) { return std::abs(value - target_mse) <= options.relative_tolerance * target_mse; };

  double lo = 0.0;
  double hi = max_strength(kind, image);
  const double top = measure(hi);
  if (within(top)) return DistortionSpec{kind, hi, seed};
  if (top < target_mse) {
    throw CalibrationFailure("cannot reach MSE " + std::to_string(target_mse) + " with " + std::string(to_string(kind)) +
                                 "; maximum achievable is " + std::to_string(top),
                             top);
  }

  double best_strength = hi;
  double best_error = std::abs(top - target_mse);
  for (int step = 0; step < options.max_steps; ++step) {
    const double mid = 0.5 * (lo + hi);
    const double value = measure(mid);
    if (within(value)) return DistortionSpec{kind, mid, seed};
    if (std::abs(value - target_mse) < best_error) {
      best_error = std::abs(value - target_mse);
      best_strength = mid;
    }
    (value < target_mse ? lo : hi) = mid;
  }
  throw CalibrationFailure("bisection did not reach MSE " + std::to_string(target_mse) + " for " +
                               std::string(to_string(kind)) + " (closest strength " + std::to_string(best_strength) +
                               ")",
                           top);
}

std::vector<LabeledImage> synth_dataset(const GrayImage& base, const std::vector<double>& levels,
                                        const std::vector<DistortionKind>& kinds, std::uint64_t seed,
                                        const CalibrationOptions& options) {
  std::vector<LabeledImage> out;
  const GrayImage original = options.quantize_8bit ? quantize_8bit(base) : base;
  out.push_back(LabeledImage{"000_original.pgm", original, DistortionSpec{}, 0.0, 0.0});
  if (levels.empty()) return out;

  std::size_t index = 1;
  for (const auto kind : kinds) {
    if (kind == DistortionKind::Original) continue;
    for (std::size_t li = 0; li < levels.size(); ++li) {
      const std::uint64_t cell_seed =
          splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(kind) * 1000003ULL + li));
      const DistortionSpec spec = calibrate_to_mse(original, kind, levels[li], cell_seed, options);
      GrayImage img = apply(original, spec);
      if (options.quantize_8bit) img = quantize_8bit(img);

      char name[64];
      std::snprintf(name, sizeof(name), "%03zu_%s_%04d.pgm", index++, std::string(to_string(kind)).c_str(),
                    static_cast<int>(std::lround(levels[li])));
      const double achieved = mse(original, img, MseScale::Byte255);
      out.push_back(LabeledImage{name, std::move(img), spec, levels[li], achieved});
    }
  }
  return out;
}

std::vector<double> parse_levels(std::string_view text) {
  const auto to_double = [](std::string_view s) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw InvalidParameter("bad MSE level '" + std::string(s) + "'");
    return v;
  };
  std::vector<double> levels;
  if (text.empty()) return levels;
  if (text.find(':') != std::string_view::npos) {
    const auto a = text.find(':');
    const auto b = text.find(':', a + 1);
    if (b == std::string_view::npos) throw InvalidParameter("levels range must be first:last:step");
    const double first = to_double(text.substr(0, a));
    const double last = to_double(text.substr(a + 1, b - a - 1));
    const double step = to_double(text.substr(b + 1));
    if (!(step > 0.0)) throw InvalidParameter("levels step must be positive");
    if (first > last) throw InvalidParameter("levels range is empty (first > last)");
    for (int i = 0;; ++i) {
      const double v = first + i * step;
      if (v > last + 1e-9 * step) break;
      levels.push_back(v);
    }
    return levels;
  }
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto piece = text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    levels.push_back(to_double(piece));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return levels;
}

void write_dataset(const std::vector<LabeledImage>& images, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::ordered_json manifest;
  manifest["format"] = "ssimm-dataset-1";
  nlohmann::ordered_json entries = nlohmann::ordered_json::object();
  for (const auto& img : images) {
    write_pgm(img.image, dir / img.name);
    entries[img.name] = {
        {"kind", img.label()},
        {"kind_name", std::string(to_string(img.spec.kind))},
        {"target_mse", img.target_mse},
        {"achieved_mse", img.achieved_mse},
        {"spec", {{"kind", img.label()}, {"strength", img.spec.strength}, {"seed", img.spec.seed}}},
    };
  }
  manifest["images"] = std::move(entries);
  std::ofstream out(dir / "manifest.json");
  if (!out) throw IoError("cannot write manifest in " + dir.string());
  out << manifest.dump(2) << '\n';
}

std::vector<LabeledImage> read_dataset(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw IoError("missing manifest.json in " + dir.string());
  nlohmann::ordered_json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed manifest: " + std::string(e.what()));
  }
  std::vector<LabeledImage> out;
  try {
    for (const auto& [name, entry] : manifest.at("images").items()) {
      LabeledImage img;
      img.name = name;
      img.image = read_pgm(dir / name);
      img.spec.kind = distortion_from_label(entry.at("kind").get<int>());
      if (entry.contains("spec")) {
        img.spec.strength = entry["spec"].value("strength", 0.0);
        img.spec.seed = entry["spec"].value("seed", std::uint64_t{0});
      }
      img.target_mse = entry.value("target_mse", 0.0);
      img.achieved_mse = entry.value("achieved_mse", 0.0);
      out.push_back(std::move(img));
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed manifest entry: " + std::string(e.what()));
  }
  return out;
}

GrayImage synthetic_texture(std::size_t width, std::size_t height, std::uint64_t seed) {
  if (width == 0 || height == 0) throw InvalidParameter("synthetic_texture: empty size");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  const double pi = std::numbers::pi;
  Eigen::VectorXd px(static_cast<Eigen::Index>(width * height));
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      const double u = static_cast<double>(x) / static_cast<double>(width);
      const double v = static_cast<double>(y) / static_cast<double>(height);
      double value = 0.45 + 0.12 * (u - 0.5) + 0.08 * std::sin(2.0 * pi * v);        // slow ramps
      value += 0.10 * std::sin(2.0 * pi * (static_cast<double>(x) / 5.0 + static_cast<double>(y) / 11.0));  // oblique grating
      value += 0.08 * std::cos(2.0 * pi * static_cast<double>(y) / 3.7);              // fine horizontal grating
      if ((x / 16 + y / 16) % 2 == 0) value += 0.08;                                  // checker edges
      if (std::hypot(u - 0.62, v - 0.38) < 0.18) value -= 0.12;                       // disc
      value += 0.05 * uniform(rng);                                                   // fine texture
      px[static_cast<Eigen::Index>(y * width + x)] = std::clamp(value, 0.06, 0.86);
    }
  }
  return quantize_8bit(GrayImage(width, height, std::move(px)));
}

}  // namespace ssimm

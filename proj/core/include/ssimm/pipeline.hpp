#pragma once

#include "ssimm/distortion_lab.hpp"
#include "ssimm/eval_harness.hpp"
#include "ssimm/image_blocks.hpp"
#include "ssimm/kernels.hpp"
#include "ssimm/llise_reconstruct.hpp"
#include "ssimm/neighbor_graph.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace ssimm {

enum class Method { Llise, Kllise, Lle, Klle };

std::string_view to_string(Method method);
/// Throws InvalidParameter for unknown names.
Method parse_method(std::string_view name);

/// Everything that determines a trained model. `threads` only changes speed.
struct ExperimentConfig {
  Method method = Method::Llise;
  KernelKind kernel = KernelKind::Rbf;
  std::size_t q = 64;
  Eigen::Index p = 4;
  Eigen::Index k = 10;
  AdmmConfig recon = AdmmConfig::reconstruction();
  AdmmConfig embed = AdmmConfig::embedding();
  std::uint64_t seed = 0;
  int threads = 0;

  /// Default step sizes for the method (kernel LLISE uses the kernel preset).
  static ExperimentConfig for_method(Method method);

  bool is_kernel() const noexcept { return method == Method::Kllise || method == Method::Klle; }
  /// LLE baselines treat each whole image as a single vector.
  bool uses_blocks() const noexcept { return method == Method::Llise || method == Method::Kllise; }

  /// Throws InvalidParameter on p > q, k >= n, p >= n or bad solver settings.
  void validate(std::size_t pixel_count, Eigen::Index image_count) const;
};

/// Deterministic 64-bit stream derived from a seed and a stream index.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Trained state of one block index.
struct BlockModel {
  /// n x q training rows: zero-mean blocks for LLISE, raw blocks for kernel
  /// LLISE, whole raw images for the LLE baselines.
  Eigen::MatrixXd train;
  Eigen::MatrixXd Y;  // n x p embedding
  /// Normalized, centered gram (kernel LLISE only). Rebuilt from `train` on load.
  KernelGram gram;

  // Solver diagnostics, kept in memory only.
  int unconverged_weights = 0;
  bool embedding_converged = true;
  int embedding_iterations = 0;
};

struct Model {
  ExperimentConfig config;
  std::size_t width = 0;
  std::size_t height = 0;
  BlockPartition partition;  // b = 1, q = d for the LLE baselines
  double c = 0.0;            // SSIM stabilizer (q - 1) c2
  std::vector<int> labels;
  std::vector<std::string> names;
  std::vector<BlockModel> blocks;

  Eigen::Index image_count() const noexcept { return static_cast<Eigen::Index>(labels.size()); }
  KernelSpec kernel_spec() const;
};

using LogFn = std::function<void(const std::string&)>;

/// Trains one embedding per block index. Images must share one size.
/// Throws InvalidInput on mixed sizes, InvalidParameter on config violations.
Model train(const std::vector<LabeledImage>& data, const ExperimentConfig& config, const LogFn& log = {});

/// Rows the model compares against for one image: one row per block.
Eigen::MatrixXd model_rows(const Model& model, const GrayImage& image);

/// Out-of-sample embedding of one image, b x p.
struct ImageEmbedding {
  std::string name;
  int truth = -1;
  Eigen::MatrixXd rows;
};

ImageEmbedding embed_image(const Model& model, const GrayImage& image, int threads = 1);
std::vector<ImageEmbedding> embed_dataset(const Model& model, const std::vector<LabeledImage>& data, int threads = 1,
                                          const LogFn& log = {});

/// nearest[i][j]: training image whose block-i embedding is closest to that of
/// image j, excluding j itself.
std::vector<std::vector<Eigen::Index>> training_nearest(const Model& model, int threads = 1);

/// Leave-one-out 1NN on the training embedding with per-image majority vote.
RecognitionReport evaluate_training(const Model& model, int threads = 1);

/// 1NN of out-of-sample embeddings against every training block embedding.
RecognitionReport evaluate_oos(const Model& model, const std::vector<ImageEmbedding>& embeddings);

// Persistence: a single JSON document with base64 little-endian float64 matrices.
std::string serialize_model(const Model& model);
Model deserialize_model(const std::string& text);
void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

std::string serialize_embeddings(const std::vector<ImageEmbedding>& embeddings);
std::vector<ImageEmbedding> deserialize_embeddings(const std::string& text);
void save_embeddings(const std::vector<ImageEmbedding>& embeddings, const std::filesystem::path& path);
std::vector<ImageEmbedding> load_embeddings(const std::filesystem::path& path);

/// Base64 of the little-endian float64 payload, row-major.
std::string encode_matrix(const Eigen::MatrixXd& m);
/// Throws IoError on malformed input or a size mismatch.
Eigen::MatrixXd decode_matrix(std::string_view base64, Eigen::Index rows, Eigen::Index cols);

}  // namespace ssimm

#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ssimm {

inline constexpr int kLabelCount = 7;

/// Label of the nearest reference row (Euclidean). `exclude` removes one
/// reference (leave-one-out). Ties go to the smaller index.
/// Throws InvalidInput when no reference remains or sizes disagree.
int classify_block_1nn(const Eigen::Ref<const Eigen::VectorXd>& query, const Eigen::Ref<const Eigen::MatrixXd>& references,
                       const std::vector<int>& labels, std::optional<Eigen::Index> exclude = std::nullopt);

/// Index of the nearest reference row under the same rules.
Eigen::Index nearest_reference(const Eigen::Ref<const Eigen::VectorXd>& query,
                               const Eigen::Ref<const Eigen::MatrixXd>& references,
                               std::optional<Eigen::Index> exclude = std::nullopt);

struct Vote {
  int label = 0;
  double fraction = 0.0;

  friend bool operator==(const Vote&, const Vote&) = default;
};

/// Labels ranked by vote fraction, descending; ties by label id.
/// Throws InvalidInput on an empty list.
std::vector<Vote> vote_image(const std::vector<int>& block_labels);

/// 7 x 7 counts, row = true label, column = predicted.
struct ConfusionMatrix {
  Eigen::Matrix<long long, kLabelCount, kLabelCount> counts = Eigen::Matrix<long long, kLabelCount, kLabelCount>::Zero();

  /// Each row divided by its sum; empty rows stay zero.
  Eigen::Matrix<double, kLabelCount, kLabelCount> rates() const;
  long long total() const { return counts.sum(); }
  long long correct() const { return counts.trace(); }
  double accuracy() const;
};

/// Throws InvalidInput on length mismatch or a label outside 0..6.
ConfusionMatrix confusion(const std::vector<int>& truth, const std::vector<int>& predicted);

/// One image's recognition result.
struct ImageRecognition {
  std::string name;
  int truth = -1;  // -1 when unknown
  std::vector<int> block_labels;
  std::vector<Vote> votes;

  int predicted() const { return votes.empty() ? -1 : votes.front().label; }
};

struct RecognitionReport {
  std::vector<ImageRecognition> images;
  ConfusionMatrix block_level;
  ConfusionMatrix image_level;
};

/// Builds the report from per-image block labels; confusions only count
/// images with a known truth label.
RecognitionReport make_report(std::vector<ImageRecognition> images);

void write_confusion_csv(const ConfusionMatrix& m, const std::filesystem::path& path);
void write_votes_csv(const RecognitionReport& report, const std::filesystem::path& path);
/// Writes block/image confusion CSVs, a vote table and report.json into `dir`.
void write_report(const RecognitionReport& report, const std::filesystem::path& dir);

/// Label-permutation test of image-level leave-one-out 1NN accuracy.
/// `nearest[i][j]` is the training image whose block i is nearest to block i
/// of image j. Returns (observed accuracy, p-value) with
/// p = (1 + #{permuted accuracy >= observed}) / (draws + 1).
struct PermutationResult {
  double observed_accuracy = 0.0;
  double p_value = 1.0;
  int draws = 0;
};
PermutationResult permutation_test(const std::vector<std::vector<Eigen::Index>>& nearest, const std::vector<int>& labels,
                                   int draws, std::uint64_t seed);

}  // namespace ssimm

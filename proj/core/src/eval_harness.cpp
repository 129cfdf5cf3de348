#include "ssimm/eval_harness.hpp"

#include "ssimm/error.hpp"

#include "json.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

namespace ssimm {

Eigen::Index nearest_reference(const Eigen::Ref<const Eigen::VectorXd>& query,
                               const Eigen::Ref<const Eigen::MatrixXd>& references,
                               std::optional<Eigen::Index> exclude) {
  if (references.cols() != query.size()) throw InvalidInput("1NN: query and reference dimensions differ");
  Eigen::Index best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (Eigen::Index r = 0; r < references.rows(); ++r) {
    if (exclude && *exclude == r) continue;
    const double d = (references.row(r).transpose() - query).squaredNorm();
    if (d < best_d || best < 0) {
      best = r;
      best_d = d;
    }
  }
  if (best < 0) throw InvalidInput("1NN: no reference left after exclusion");
  return best;
}

int classify_block_1nn(const Eigen::Ref<const Eigen::VectorXd>& query, const Eigen::Ref<const Eigen::MatrixXd>& references,
                       const std::vector<int>& labels, std::optional<Eigen::Index> exclude) {
  if (static_cast<Eigen::Index>(labels.size()) != references.rows()) {
    throw InvalidInput("1NN: one label per reference row required");
  }
  return labels[static_cast<std::size_t>(nearest_reference(query, references, exclude))];
}

std::vector<Vote> vote_image(const std::vector<int>& block_labels) {
  if (block_labels.empty()) throw InvalidInput("vote_image: no blocks");
  std::vector<std::pair<int, std::size_t>> tally;
  for (const int label : block_labels) {
    auto it = std::find_if(tally.begin(), tally.end(), [&](const auto& t) { return t.first == label; });
    if (it == tally.end()) {
      tally.emplace_back(label, 1);
    } else {
      ++it->second;
    }
  }
  std::sort(tally.begin(), tally.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  std::vector<Vote> votes;
  votes.reserve(tally.size());
  const auto total = static_cast<double>(block_labels.size());
  for (const auto& [label, count] : tally) votes.push_back({label, static_cast<double>(count) / total});
  return votes;
}

Eigen::Matrix<double, kLabelCount, kLabelCount> ConfusionMatrix::rates() const {
  Eigen::Matrix<double, kLabelCount, kLabelCount> r = counts.cast<double>();
  for (int i = 0; i < kLabelCount; ++i) {
    const double s = r.row(i).sum();
    if (s > 0) r.row(i) /= s;
  }
  return r;
}

double ConfusionMatrix::accuracy() const {
  const long long n = total();
  return n == 0 ? 0.0 : static_cast<double>(correct()) / static_cast<double>(n);
}

ConfusionMatrix confusion(const std::vector<int>& truth, const std::vector<int>& predicted) {
  if (truth.size() != predicted.size()) throw InvalidInput("confusion: label lists differ in length");
  ConfusionMatrix m;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int t = truth[i];
    const int p = predicted[i];
    if (t < 0 || t >= kLabelCount || p < 0 || p >= kLabelCount) {
      throw InvalidInput("confusion: label outside 0..6 at position " + std::to_string(i));
    }
    ++m.counts(t, p);
  }
  return m;
}

RecognitionReport make_report(std::vector<ImageRecognition> images) {
  RecognitionReport report;
  std::vector<int> block_truth, block_pred, image_truth, image_pred;
  for (auto& img : images) {
    img.votes = vote_image(img.block_labels);
    if (img.truth < 0) continue;
    for (const int l : img.block_labels) {
      block_truth.push_back(img.truth);
      block_pred.push_back(l);
    }
    image_truth.push_back(img.truth);
    image_pred.push_back(img.predicted());
  }
  report.block_level = confusion(block_truth, block_pred);
  report.image_level = confusion(image_truth, image_pred);
  report.images = std::move(images);
  return report;
}

namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

nlohmann::ordered_json confusion_json(const ConfusionMatrix& m) {
  nlohmann::ordered_json counts = nlohmann::ordered_json::array();
  nlohmann::ordered_json rates = nlohmann::ordered_json::array();
  const auto r = m.rates();
  for (int i = 0; i < kLabelCount; ++i) {
    std::vector<long long> crow(kLabelCount);
    std::vector<double> rrow(kLabelCount);
    for (int j = 0; j < kLabelCount; ++j) {
      crow[static_cast<std::size_t>(j)] = m.counts(i, j);
      rrow[static_cast<std::size_t>(j)] = r(i, j);
    }
    counts.push_back(crow);
    rates.push_back(rrow);
  }
  return {{"counts", counts}, {"rates", rates}, {"accuracy", m.accuracy()}, {"total", m.total()}};
}

}  // namespace

void write_confusion_csv(const ConfusionMatrix& m, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  out << "true\\predicted";
  for (int j = 0; j < kLabelCount; ++j) out << ',' << j;
  out << '\n';
  for (int i = 0; i < kLabelCount; ++i) {
    out << i;
    for (int j = 0; j < kLabelCount; ++j) out << ',' << m.counts(i, j);
    out << '\n';
  }
}

void write_votes_csv(const RecognitionReport& report, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  out << "image,truth,first_label,first_fraction,second_label,second_fraction\n";
  for (const auto& img : report.images) {
    out << img.name << ',' << img.truth;
    for (std::size_t v = 0; v < 2; ++v) {
      if (v < img.votes.size()) {
        out << ',' << img.votes[v].label << ',' << img.votes[v].fraction;
      } else {
        out << ",,";
      }
    }
    out << '\n';
  }
}

void write_report(const RecognitionReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_confusion_csv(report.block_level, dir / "confusion_blocks.csv");
  write_confusion_csv(report.image_level, dir / "confusion_images.csv");
  write_votes_csv(report, dir / "votes.csv");

  nlohmann::ordered_json j;
  j["block_level"] = confusion_json(report.block_level);
  j["image_level"] = confusion_json(report.image_level);
  nlohmann::ordered_json imgs = nlohmann::ordered_json::array();
  for (const auto& img : report.images) {
    nlohmann::ordered_json votes = nlohmann::ordered_json::array();
    for (const auto& v : img.votes) votes.push_back({{"label", v.label}, {"fraction", v.fraction}});
    imgs.push_back({{"name", img.name}, {"truth", img.truth}, {"predicted", img.predicted()}, {"votes", votes}});
  }
  j["images"] = std::move(imgs);
  auto out = open_for_write(dir / "report.json");
  out << j.dump(2) << '\n';
}

PermutationResult permutation_test(const std::vector<std::vector<Eigen::Index>>& nearest, const std::vector<int>& labels,
                                   int draws, std::uint64_t seed) {
  if (draws < 1) throw InvalidParameter("permutation_test: draws must be positive");
  const std::size_t n = labels.size();
  for (const auto& per_block : nearest) {
    if (per_block.size() != n) throw InvalidInput("permutation_test: nearest-index table has wrong width");
  }

  const auto accuracy = [&](const std::vector<int>& lab) {
    std::size_t correct = 0;
    std::array<std::size_t, kLabelCount> tally{};
    for (std::size_t j = 0; j < n; ++j) {
      tally.fill(0);
      for (const auto& per_block : nearest) ++tally[static_cast<std::size_t>(lab[static_cast<std::size_t>(per_block[j])])];
      // Majority vote, ties to the smaller label.
      const auto winner = static_cast<int>(std::max_element(tally.begin(), tally.end()) - tally.begin());
      if (winner == lab[j]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(n);
  };

  for (const int l : labels) {
    if (l < 0 || l >= kLabelCount) throw InvalidInput("permutation_test: label outside 0..6");
  }
  PermutationResult result;
  result.draws = draws;
  result.observed_accuracy = accuracy(labels);
  std::mt19937_64 rng(seed);
  std::vector<int> permuted = labels;
  int at_least = 0;
  for (int d = 0; d < draws; ++d) {
    std::shuffle(permuted.begin(), permuted.end(), rng);
    if (accuracy(permuted) >= result.observed_accuracy) ++at_least;
  }
  result.p_value = (1.0 + at_least) / (draws + 1.0);
  return result;
}

}  // namespace ssimm

// Acceptance checks: one PASS/FAIL line per criterion.
//
//   ssimm_acceptance [--workdir DIR] [--data DIR] [--only 1,2,...] [--expect-fail 4,5]
//
// Exit status is nonzero when a criterion fails that is not listed in
// --expect-fail. Criterion N draws its random instances from seed 1000 + N.

#include "ssimm/diagnostics.hpp"
#include "ssimm/distortion_lab.hpp"
#include "ssimm/error.hpp"
#include "ssimm/eval_harness.hpp"
#include "ssimm/image_blocks.hpp"
#include "ssimm/kernels.hpp"
#include "ssimm/lle_baseline.hpp"
#include "ssimm/llise_embed.hpp"
#include "ssimm/llise_reconstruct.hpp"
#include "ssimm/neighbor_graph.hpp"
#include "ssimm/pipeline.hpp"
#include "ssimm/ssim.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#ifndef SSIMM_DATA_DIR
#define SSIMM_DATA_DIR "data"
#endif

using namespace ssimm;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::uint64_t seed_for(int criterion) { return 1000u + static_cast<std::uint64_t>(criterion); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

Eigen::MatrixXd gaussian(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = nd(rng);
  return m;
}

// Block-like reconstruction instance: zero-mean columns at image intensity scale.
struct ReconInstance {
  Eigen::VectorXd x;
  Eigen::MatrixXd X;
  double c;
};

ReconInstance recon_instance(std::mt19937_64& rng, Eigen::Index q, Eigen::Index k) {
  ReconInstance in;
  in.x = gaussian(rng, q, 1, 0.1).col(0);
  in.x.array() -= in.x.mean();
  in.X = gaussian(rng, q, k, 0.1);
  in.X.rowwise() -= in.X.colwise().mean();
  in.c = SsimConstants::for_block(static_cast<std::size_t>(q)).c;
  return in;
}

// SSIM distance written with scalar loops: |a - b|^2 / (|a|^2 + |b|^2 + c).
double distance_loop(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double c) {
  double diff = 0, na = 0, nb = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return diff / (na + nb + c);
}

// ---------------------------------------------------------------------------

Outcome criterion1() {
  const auto t0 = Clock::now();
  const auto results = check_gradients(seed_for(1), 50, 1e-6, 1e-5);
  const double secs = seconds_since(t0);
  bool ok = secs < 10.0;
  std::ostringstream d;
  for (const auto& r : results) {
    ok = ok && r.passed && r.cases == 50;
    d << r.name << " worst=" << fmt("%.2e", r.worst) << " ";
  }
  d << fmt("(%.2fs, limit 10s)", secs);
  return {ok, d.str()};
}

Outcome criterion2() {
  std::mt19937_64 rng(seed_for(2));
  double worst_recon = 0, worst_theta = 0, worst_kernel = 0;
  for (int t = 0; t < 100; ++t) {
    const auto in = recon_instance(rng, 16, 5);
    const Eigen::VectorXd w = gaussian(rng, 5, 1).col(0);
    const double f = recon_objective(w, in.x, in.X, in.c);
    const Eigen::VectorXd xw = in.X * w;
    worst_recon = std::max({worst_recon, std::abs(f - ssim_distance(in.x, xw, SsimConstants::for_block(16))),
                            std::abs(f - distance_loop(in.x, xw, in.c))});

    NeighborhoodKernel nk;
    const KernelSpec linear{KernelKind::Linear, 1.0};
    nk.self = kernel_eval(linear, in.x, in.x);
    nk.cross.resize(5);
    nk.among.resize(5, 5);
    for (Eigen::Index r = 0; r < 5; ++r) {
      nk.cross[r] = kernel_eval(linear, in.X.col(r), in.x);
      for (Eigen::Index s = 0; s < 5; ++s) nk.among(r, s) = kernel_eval(linear, in.X.col(r), in.X.col(s));
    }
    worst_kernel = std::max(worst_kernel, std::abs(kernel_recon_objective(w, nk, in.c) - f));
  }
  for (int t = 0; t < 100; ++t) {
    const Eigen::Index n = 12, p = 3, k = 4;
    const Eigen::MatrixXd Y = gaussian(rng, n, p);
    SparseWeightRow row;
    row.owner = t % n;
    std::vector<Eigen::Index> pool;
    for (Eigen::Index a = 0; a < n; ++a) {
      if (a != row.owner) pool.push_back(a);
    }
    std::shuffle(pool.begin(), pool.end(), rng);
    row.indices.assign(pool.begin(), pool.begin() + k);
    row.weights = gaussian(rng, k, 1).col(0).normalized();
    const double c = SsimConstants::for_block(static_cast<std::size_t>(p)).c;
    // Y'1_j is the owner's row; Y'w is the weighted sum of neighbor rows.
    Eigen::VectorXd a = Y.row(row.owner).transpose();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
    for (Eigen::Index r = 0; r < k; ++r) b += row.weights[r] * Y.row(row.indices[static_cast<std::size_t>(r)]).transpose();
    worst_theta = std::max(worst_theta, std::abs(theta(Y, row, c) - distance_loop(a, b, c)));
  }
  const bool ok = worst_recon < 1e-10 && worst_theta < 1e-10 && worst_kernel < 1e-10;
  return {ok, fmt("max |diff|: reconstruction %.1e, embedding %.1e, linear-kernel %.1e (limit 1e-10, 100 instances each)",
                  worst_recon, worst_theta, worst_kernel)};
}

Outcome criterion3() {
  std::mt19937_64 rng(seed_for(3));
  std::uniform_int_distribution<Eigen::Index> pick_n(5, 50);
  double worst_mean = 0, worst_orth = 0, worst_idem = 0;
  for (int t = 0; t < 100; ++t) {
    const Eigen::Index n = pick_n(rng);
    // p is capped at n - 1: a centered n x p matrix has rank at most n - 1.
    std::uniform_int_distribution<Eigen::Index> pick_p(1, std::min<Eigen::Index>(5, n - 1));
    const Eigen::Index p = pick_p(rng);
    const Eigen::MatrixXd V = project_constraints(gaussian(rng, n, p), seed_for(3));
    worst_mean = std::max(worst_mean, V.colwise().sum().cwiseAbs().maxCoeff());
    worst_orth = std::max(
        worst_orth,
        (V.transpose() * V / static_cast<double>(n) - Eigen::MatrixXd::Identity(p, p)).cwiseAbs().maxCoeff());
    worst_idem = std::max(worst_idem, (project_constraints(V, seed_for(3)) - V).norm());
  }
  const bool ok = worst_mean < 1e-9 && worst_orth < 1e-9 && worst_idem < 1e-10;
  return {ok, fmt("|V'1|max %.1e, |V'V/n - I|max %.1e (limit 1e-9), re-projection change %.1e (limit 1e-10)",
                  worst_mean, worst_orth, worst_idem)};
}

Outcome criterion4() {
  std::mt19937_64 rng(seed_for(4));
  int unit = 0, converged = 0;
  double worst_norm = 0;
  for (int t = 0; t < 100; ++t) {
    const auto in = recon_instance(rng, 16, 5);
    const auto s = solve_weights(in.x, in.X, in.c, AdmmConfig::reconstruction());
    const double dev = std::abs(s.weights().norm() - 1.0);
    worst_norm = std::max(worst_norm, dev);
    unit += dev < 1e-6;
    converged += s.converged && s.final_residual <= 1e-6 && s.iterations_run <= 2000;
  }
  return {unit == 100 && converged == 100,
          fmt("unit norm %d/100 (worst %.1e); residual <= 1e-6 within 2000 iterations %d/100", unit, worst_norm,
              converged)};
}

Outcome criterion5() {
  std::mt19937_64 rng(seed_for(5));
  int ok = 0;
  double worst_gap = -1e300;
  for (int t = 0; t < 20; ++t) {
    const auto in = recon_instance(rng, 16, 2);
    const auto s = solve_weights(in.x, in.X, in.c, AdmmConfig::reconstruction());
    double best = 1e300;
    for (int g = 0; g < 3600; ++g) {
      const double a = 2 * std::numbers::pi * g / 3600;
      best = std::min(best, distance_loop(in.x, in.X * Eigen::Vector2d(std::cos(a), std::sin(a)), in.c));
    }
    const double gap = recon_objective(s.weights(), in.x, in.X, in.c) - best;
    worst_gap = std::max(worst_gap, gap);
    ok += gap <= 1e-3;
  }
  return {ok == 20, fmt("%d/20 instances within grid minimum + 1e-3 (worst excess %.3g)", ok, worst_gap)};
}

Outcome criterion6() {
  std::mt19937_64 rng(seed_for(6));
  double worst_iter = 0;
  std::size_t worst_len_mismatch = 0;
  const KernelSpec linear{KernelKind::Linear, 1.0};
  for (int t = 0; t < 20; ++t) {
    const auto in = recon_instance(rng, 16, 5);
    std::vector<Eigen::VectorXd> a, b;
    const auto record = [](std::vector<Eigen::VectorXd>& out) {
      return [&out](int, const Eigen::VectorXd& w, const Eigen::VectorXd& xi, const Eigen::VectorXd& j) {
        Eigen::VectorXd s(w.size() * 3);
        s << w, xi, j;
        out.push_back(s);
      };
    };
    solve_weights(in.x, in.X, in.c, AdmmConfig::reconstruction(), record(a));
    // Linear-kernel pieces evaluated pair by pair on copies of the columns.
    NeighborhoodKernel nk;
    const Eigen::VectorXd x = in.x;
    nk.self = kernel_eval(linear, x, x);
    nk.cross.resize(5);
    nk.among.resize(5, 5);
    for (Eigen::Index r = 0; r < 5; ++r) {
      const Eigen::VectorXd xr = in.X.col(r);
      nk.cross[r] = kernel_eval(linear, xr, x);
      for (Eigen::Index s = 0; s < 5; ++s) {
        const Eigen::VectorXd xs = in.X.col(s);
        nk.among(r, s) = kernel_eval(linear, xr, xs);
      }
    }
    solve_weights_kernel(nk, in.c, AdmmConfig::reconstruction(), record(b));
    if (a.size() != b.size()) ++worst_len_mismatch;
    for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
      worst_iter = std::max(worst_iter, (a[i] - b[i]).cwiseAbs().maxCoeff());
    }
  }
  double worst_lle = 0;
  for (int t = 0; t < 20; ++t) {
    const Eigen::MatrixXd X = gaussian(rng, 16, 5, 0.1);
    const Eigen::VectorXd x = gaussian(rng, 16, 1, 0.1).col(0);
    Eigen::VectorXd cross(5);
    Eigen::MatrixXd among(5, 5);
    for (Eigen::Index r = 0; r < 5; ++r) {
      cross[r] = kernel_eval(linear, x, X.col(r));
      for (Eigen::Index s = 0; s < 5; ++s) among(r, s) = kernel_eval(linear, X.col(r), X.col(s));
    }
    const auto w_lle = lle_weights(x, X).w;
    const auto w_klle = klle_weights(kernel_eval(linear, x, x), cross, among).w;
    worst_lle = std::max(worst_lle, (w_lle - w_klle).cwiseAbs().maxCoeff());
  }
  const bool ok = worst_iter <= 1e-10 && worst_len_mismatch == 0 && worst_lle <= 1e-10;
  return {ok, fmt("LLISE iterate max diff %.1e over 20 runs (%zu length mismatches); KLLE vs LLE weights %.1e (limit 1e-10)",
                  worst_iter, worst_len_mismatch, worst_lle)};
}

Outcome criterion7() {
  std::mt19937_64 rng(seed_for(7));
  const Eigen::Index n = 60, q = 8, k = 6, p = 3;
  const Eigen::MatrixXd pts = gaussian(rng, n, q);
  const auto graph = knn_euclidean(pts, k);
  std::vector<SparseWeightRow> rows;
  double worst_sum = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    Eigen::MatrixXd X(q, k);
    for (Eigen::Index r = 0; r < k; ++r) X.col(r) = pts.row(graph.neighbors[j][static_cast<std::size_t>(r)]).transpose();
    const auto w = lle_weights(pts.row(j).transpose(), X).w;
    worst_sum = std::max(worst_sum, std::abs(w.sum() - 1.0));
    rows.push_back(SparseWeightRow{j, graph.neighbors[j], w});
  }
  const auto e = lle_embed(rows, n, p);
  // Rebuild M = (I - W)'(I - W) independently from the rows.
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(n, n);
  for (const auto& r : rows) {
    for (std::size_t t = 0; t < r.indices.size(); ++t) W(r.owner, r.indices[t]) = r.weights[static_cast<Eigen::Index>(t)];
  }
  const Eigen::MatrixXd IW = Eigen::MatrixXd::Identity(n, n) - W;
  const Eigen::MatrixXd M = IW.transpose() * IW;
  double worst_eig = 0;
  for (Eigen::Index c = 0; c < p; ++c) {
    const Eigen::VectorXd y = e.Y.col(c).normalized();
    const double lambda = y.dot(M * y);
    worst_eig = std::max(worst_eig, (M * y - lambda * y).norm());
  }
  Eigen::MatrixXd two(2, 2);
  two << 0, 2, 0, 2;
  const auto mid = lle_weights(Eigen::Vector2d(1, 1), two).w;
  const double mid_err = std::max(std::abs(mid[0] - 0.5), std::abs(mid[1] - 0.5));
  const bool ok = worst_sum < 1e-10 && worst_eig < 1e-8 && mid_err < 1e-6;
  return {ok, fmt("|sum w - 1| %.1e (limit 1e-10), eigen-residual %.1e (limit 1e-8), midpoint error %.1e (limit 1e-6)",
                  worst_sum, worst_eig, mid_err)};
}

// Shared state for criteria 8-10.
struct Protocol {
  std::vector<LabeledImage> data;
  std::optional<Model> model;
  ExperimentConfig config;
  double synth_seconds = 0, train_seconds = 0;
};

Outcome criterion8(Protocol& st, const fs::path& data_dir, const fs::path& work) {
  const auto t0 = Clock::now();
  const GrayImage base = read_pgm(data_dir / "texture64.pgm");
  if (base.width() != 64 || base.height() != 64) return {false, "bundled base image is not 64x64"};
  const auto levels = parse_levels("45:900:45");
  auto synth = synth_dataset(base, levels, all_distortions(), seed_for(8));
  write_dataset(synth, work / "dataset");
  st.data = read_dataset(work / "dataset");  // train from the files on disk
  st.synth_seconds = seconds_since(t0);

  // Recompute every MSE from the files with an independent loop.
  int within = 0;
  double worst_rel = 0;
  for (std::size_t i = 1; i < st.data.size(); ++i) {
    const auto& a = st.data[0].image.pixels();
    const auto& b = st.data[i].image.pixels();
    double s = 0;
    for (Eigen::Index t = 0; t < a.size(); ++t) {
      const double d = 255.0 * (a[t] - b[t]);
      s += d * d;
    }
    const double m = s / static_cast<double>(a.size());
    const double rel = std::abs(m - st.data[i].target_mse) / st.data[i].target_mse;
    worst_rel = std::max(worst_rel, rel);
    within += rel <= 0.01;
  }

  st.config = ExperimentConfig::for_method(Method::Llise);
  st.config.q = 16;
  st.config.p = 4;
  st.config.k = 10;
  st.config.seed = seed_for(8);
  st.config.threads = 1;
  const auto t1 = Clock::now();
  st.model = train(st.data, st.config, [](const std::string& line) { std::cerr << "  " << line << "\n"; });
  st.train_seconds = seconds_since(t1);

  const auto t2 = Clock::now();
  const auto report = evaluate_training(*st.model, 1);
  const auto nearest = training_nearest(*st.model, 1);
  std::vector<int> labels = st.model->labels;
  const auto perm = permutation_test(nearest, labels, 1000, seed_for(8));
  const double eval_seconds = seconds_since(t2);
  const double total = st.synth_seconds + st.train_seconds + eval_seconds;

  const double acc = report.image_level.accuracy();
  const bool ok = st.data.size() == 121 && within == 120 && acc > 1.0 / 7.0 && perm.p_value < 0.01 && total < 900.0;
  return {ok, fmt("%zu images, MSE within 1%% %d/120 (worst %.2f%%); leave-one-out accuracy %lld/%lld = %.3f "
                  "(chance 0.143), permutation p = %.4f (1000 draws); %.0fs total (train %.0fs, limit 900s)",
                  st.data.size(), within, 100 * worst_rel, report.image_level.correct(), report.image_level.total(),
                  acc, perm.p_value, total, st.train_seconds)};
}

struct OosCounts {
  long long strict = 0;
  long long duplicate_aware = 0;
  long long total = 0;
};

OosCounts oos_counts(const Model& model, const std::vector<LabeledImage>& queries) {
  OosCounts c;
  const auto b = model.partition.block_count;
  for (std::size_t j = 0; j < queries.size(); ++j) {
    const auto e = embed_image(model, queries[j].image, 1);
    for (std::size_t i = 0; i < b; ++i) {
      const auto& bm = model.blocks[i];
      const auto row = static_cast<Eigen::Index>(i);
      const auto jj = static_cast<Eigen::Index>(j);
      const Eigen::RowVectorXd got = e.rows.row(row);
      ++c.total;
      if ((got - bm.Y.row(jj)).norm() <= 1e-2) {
        ++c.strict;
        ++c.duplicate_aware;
        continue;
      }
      // Any training image whose block i has the same content is an equally
      // valid target: the query cannot tell which of them it duplicates.
      for (Eigen::Index a = 0; a < bm.train.rows(); ++a) {
        if (a != jj && bm.train.row(a) == bm.train.row(jj) && (got - bm.Y.row(a)).norm() <= 1e-2) {
          ++c.duplicate_aware;
          break;
        }
      }
    }
  }
  return c;
}

Outcome criterion9(Protocol& st, const fs::path& work) {
  if (!st.model) return {false, "needs the model from criterion 8"};
  const Model& model = *st.model;
  // Duplicates: the training images re-read from their files.
  const auto queries = read_dataset(work / "dataset");

  // Upper bound for any map that sees only block content: identical blocks
  // from different images get the same embedding, which can be close to only
  // those stored rows that are close to each other.
  long long reachable = 0, total = 0;
  for (const auto& bm : model.blocks) {
    std::vector<bool> counted(static_cast<std::size_t>(bm.train.rows()), false);
    for (Eigen::Index j = 0; j < bm.train.rows(); ++j) {
      ++total;
      if (counted[static_cast<std::size_t>(j)]) continue;
      std::vector<Eigen::Index> group{j};
      for (Eigen::Index a = j + 1; a < bm.train.rows(); ++a) {
        if (bm.train.row(a) == bm.train.row(j)) group.push_back(a);
      }
      // One query point z hits member h only if |Y_h - z| <= 1e-2, so every
      // member it hits lies within 2e-2 of any other member it hits.
      long long best = 0;
      for (const auto g : group) {
        long long near = 0;
        for (const auto h : group) near += (bm.Y.row(g) - bm.Y.row(h)).norm() <= 2e-2;
        best = std::max(best, near);
      }
      reachable += best;
      for (const auto g : group) counted[static_cast<std::size_t>(g)] = true;
    }
  }

  const auto t0 = Clock::now();
  const auto with_rule = oos_counts(model, queries);
  Model no_rule = model;
  no_rule.config.recon.exact_copy_rule = false;
  const auto without_rule = oos_counts(no_rule, queries);
  const double secs = seconds_since(t0);

  const auto frac = [](long long a, long long b) { return static_cast<double>(a) / static_cast<double>(b); };
  const double aware = frac(with_rule.duplicate_aware, with_rule.total);
  return {aware >= 0.95,
          fmt("blocks within 1e-2: %.1f%% counting identical-content training blocks as the same duplicate "
              "(limit 95%%); %.1f%% of the image's own rows (content-only bound %.1f%%); without the exact-copy "
              "rule %.1f%% / %.1f%%; %.0fs",
              100 * aware, 100 * frac(with_rule.strict, with_rule.total), 100 * frac(reachable, total),
              100 * frac(without_rule.duplicate_aware, without_rule.total),
              100 * frac(without_rule.strict, without_rule.total), secs)};
}

Outcome criterion10(Protocol& st, const fs::path& work) {
  if (!st.model) return {false, "needs the model from criterion 8"};
  save_model(*st.model, work / "model_run1.json");
  const Model again = train(st.data, st.config);
  save_model(again, work / "model_run2.json");
  const auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  const std::string a = slurp(work / "model_run1.json");
  const std::string b = slurp(work / "model_run2.json");
  return {!a.empty() && a == b, fmt("archives of %zu and %zu bytes, %s", a.size(), b.size(),
                                    a == b ? "byte-identical" : "different")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ssimm acceptance checks"};
  std::string workdir = (fs::temp_directory_path() / "ssimm_acceptance").string();
  std::string data_dir = SSIMM_DATA_DIR;
  std::vector<int> only, expect_fail;
  app.add_option("--workdir", workdir, "Scratch directory");
  app.add_option("--data", data_dir, "Directory holding texture64.pgm");
  app.add_option("--only", only, "Run only these criteria")->delimiter(',');
  app.add_option("--expect-fail", expect_fail, "Criteria allowed to fail (known limitations)")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  const fs::path work(workdir);
  fs::remove_all(work);
  fs::create_directories(work);
  const std::set<int> selected(only.begin(), only.end());
  const std::set<int> allowed(expect_fail.begin(), expect_fail.end());
  const auto wanted = [&](int n) { return selected.empty() || selected.count(n) > 0; };

  Protocol st;
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria = {
      {1, criterion1},
      {2, criterion2},
      {3, criterion3},
      {4, criterion4},
      {5, criterion5},
      {6, criterion6},
      {7, criterion7},
      {8, [&] { return criterion8(st, data_dir, work); }},
      {9, [&] { return criterion9(st, work); }},
      {10, [&] { return criterion10(st, work); }},
  };

  int unexpected = 0;
  for (const auto& [n, run] : criteria) {
    if (!wanted(n)) continue;
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const bool known = allowed.count(n) > 0;
    if (!o.pass && !known) ++unexpected;
    std::cout << "CRITERION " << n << ": " << (o.pass ? "PASS" : "FAIL") << (!o.pass && known ? " (known)" : "")
              << " - " << o.detail << std::endl;
  }
  return unexpected == 0 ? 0 : 1;
}

#include "ssimm/pipeline.hpp"

#include "ssimm/error.hpp"
#include "ssimm/lle_baseline.hpp"
#include "ssimm/llise_embed.hpp"
#include "ssimm/parallel.hpp"
#include "ssimm/ssim.hpp"

#include <array>
#include <chrono>
#include <sstream>

namespace ssimm {

namespace {

constexpr std::array<std::string_view, 4> kMethodNames = {"llise", "kllise", "lle", "klle"};

void log_line(const LogFn& log, const std::string& line) {
  if (log) log(line);
}


// Neighbor rows gathered as columns, q x k.
Eigen::MatrixXd gather_columns(const Eigen::MatrixXd& rows, const std::vector<Eigen::Index>& idx) {
  Eigen::MatrixXd X(rows.cols(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t r = 0; r < idx.size(); ++r) X.col(static_cast<Eigen::Index>(r)) = rows.row(idx[r]).transpose();
  return X;
}

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& rows, const std::vector<Eigen::Index>& idx) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), rows.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = rows.row(idx[r]);
  return out;
}

Eigen::MatrixXd gather_square(const Eigen::MatrixXd& K, const std::vector<Eigen::Index>& idx) {
  const auto k = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd out(k, k);
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = 0; b < k; ++b) out(a, b) = K(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]);
  }
  return out;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Training rows of image `image` for every block index (b x q).
Eigen::MatrixXd image_rows(const ExperimentConfig& cfg, const BlockPartition& part, const GrayImage& image) {
  if (!cfg.uses_blocks()) return image.pixels().transpose();
  if (cfg.method == Method::Llise) return center_blocks(image, part).blocks;
  return extract_blocks(image, part);
}

void train_block(const Model& model, BlockModel& bm, std::size_t block_index) {
  const auto& cfg = model.config;
  const Eigen::Index n = bm.train.rows();
  const auto k = cfg.k;
  std::vector<SparseWeightRow> rows(static_cast<std::size_t>(n));

  NeighborGraph graph;
  if (cfg.method == Method::Llise || cfg.method == Method::Lle) {
    graph = knn_euclidean(bm.train, k);
  } else {
    const auto spec = model.kernel_spec();
    if (cfg.method == Method::Kllise) {
      bm.gram = normalize_center(gram_matrix(spec, bm.train));
    } else {
      bm.gram = KernelGram{};
      bm.gram.K = gram_matrix(spec, bm.train);
    }
    graph = knn_kernel(bm.gram.K, k);
  }

  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& nb = graph.neighbors[static_cast<std::size_t>(j)];
    auto& row = rows[static_cast<std::size_t>(j)];
    row.owner = j;
    row.indices = nb;
    switch (cfg.method) {
      case Method::Llise: {
        const auto r = solve_weights(bm.train.row(j).transpose(), gather_columns(bm.train, nb), model.c, cfg.recon);
        if (!r.converged) ++bm.unconverged_weights;
        row.weights = r.weights();
        break;
      }
      case Method::Kllise: {
        const auto r = solve_weights_kernel(extract_neighborhood(bm.gram, j, nb), model.c, cfg.recon);
        if (!r.converged) ++bm.unconverged_weights;
        row.weights = r.weights();
        break;
      }
      case Method::Lle:
        row.weights = lle_weights(bm.train.row(j).transpose(), gather_columns(bm.train, nb)).w;
        break;
      case Method::Klle: {
        Eigen::VectorXd cross(k);
        for (Eigen::Index r = 0; r < k; ++r) cross[r] = bm.gram.K(nb[static_cast<std::size_t>(r)], j);
        row.weights = klle_weights(bm.gram.K(j, j), cross, gather_square(bm.gram.K, nb)).w;
        break;
      }
    }
  }

  if (cfg.uses_blocks()) {
    AdmmConfig ecfg = cfg.embed;
    ecfg.seed = derive_seed(cfg.seed, block_index);
    auto e = solve_embedding(rows, n, cfg.p, model.c, ecfg);
    bm.embedding_converged = e.converged;
    bm.embedding_iterations = e.iterations_run;
    bm.Y = std::move(e.V);
  } else {
    bm.Y = lle_embed(rows, n, cfg.p).Y;
  }
}

}  // namespace

std::string_view to_string(Method method) { return kMethodNames.at(static_cast<std::size_t>(method)); }

Method parse_method(std::string_view name) {
  for (std::size_t i = 0; i < kMethodNames.size(); ++i) {
    if (name == kMethodNames[i]) return static_cast<Method>(i);
  }
  throw InvalidParameter("unknown method '" + std::string(name) + "' (expected llise, kllise, lle or klle)");
}

ExperimentConfig ExperimentConfig::for_method(Method method) {
  ExperimentConfig cfg;
  cfg.method = method;
  if (method == Method::Kllise) cfg.recon = AdmmConfig::kernel_reconstruction();
  return cfg;
}

void ExperimentConfig::validate(std::size_t pixel_count, Eigen::Index image_count) const {
  recon.validate();
  embed.validate();
  if (uses_blocks()) {
    if (q < 2 || q > pixel_count) throw InvalidParameter("q must satisfy 2 <= q <= pixel count");
    if (p > static_cast<Eigen::Index>(q)) throw InvalidParameter("p must not exceed q");
  }
  if (p < 1) throw InvalidParameter("p must be at least 1");
  if (k < 1 || k >= image_count) {
    throw InvalidParameter("k must satisfy 1 <= k < n (k=" + std::to_string(k) + ", n=" + std::to_string(image_count) + ")");
  }
  if (p >= image_count) throw InvalidParameter("p must be smaller than the number of images");
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t x = seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1));
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

KernelSpec Model::kernel_spec() const { return KernelSpec::with_default_gamma(config.kernel, partition.block_length); }

Model train(const std::vector<LabeledImage>& data, const ExperimentConfig& config, const LogFn& log) {
  if (data.empty()) throw InvalidInput("train: empty dataset");
  const auto n = static_cast<Eigen::Index>(data.size());
  const std::size_t width = data.front().image.width();
  const std::size_t height = data.front().image.height();
  for (const auto& d : data) {
    if (d.image.width() != width || d.image.height() != height) {
      throw InvalidInput("train: image '" + d.name + "' has a different size");
    }
  }
  config.validate(width * height, n);

  Model model;
  model.config = config;
  model.config.threads = 0;
  model.width = width;
  model.height = height;
  const std::size_t q = config.uses_blocks() ? config.q : width * height;
  model.partition = partition(width * height, q);
  model.c = config.uses_blocks() ? SsimConstants::for_block(q).c : 0.0;
  for (const auto& d : data) {
    model.labels.push_back(d.label());
    model.names.push_back(d.name);
  }

  const auto b = model.partition.block_count;
  model.blocks.resize(b);
  for (auto& bm : model.blocks) bm.train.resize(n, static_cast<Eigen::Index>(q));
  for (Eigen::Index j = 0; j < n; ++j) {
    const Eigen::MatrixXd rows = image_rows(config, model.partition, data[static_cast<std::size_t>(j)].image);
    for (std::size_t i = 0; i < b; ++i) model.blocks[i].train.row(j) = rows.row(static_cast<Eigen::Index>(i));
  }

  const int threads = resolve_threads(config.threads);
  const auto t0 = std::chrono::steady_clock::now();
  parallel_for(b, threads, [&](std::size_t i) { train_block(model, model.blocks[i], i); });

  int unconverged = 0, emb_unconverged = 0;
  for (const auto& bm : model.blocks) {
    unconverged += bm.unconverged_weights;
    emb_unconverged += bm.embedding_converged ? 0 : 1;
  }
  std::ostringstream msg;
  msg << "train: " << to_string(config.method) << " n=" << n << " blocks=" << b << " q=" << q << " p=" << config.p
      << " k=" << config.k << " threads=" << threads << " unconverged_weights=" << unconverged
      << " unconverged_embeddings=" << emb_unconverged << " time=" << seconds_since(t0) << "s";
  log_line(log, msg.str());
  return model;
}

Eigen::MatrixXd model_rows(const Model& model, const GrayImage& image) {
  if (image.width() != model.width || image.height() != model.height) {
    throw InvalidInput("image size " + std::to_string(image.width()) + "x" + std::to_string(image.height()) +
                       " does not match the model");
  }
  return image_rows(model.config, model.partition, image);
}

ImageEmbedding embed_image(const Model& model, const GrayImage& image, int threads) {
  const auto& cfg = model.config;
  const Eigen::MatrixXd rows = model_rows(model, image);
  const auto b = model.partition.block_count;
  const Eigen::Index k = cfg.k;
  ImageEmbedding out;
  out.rows.resize(static_cast<Eigen::Index>(b), cfg.p);

  parallel_for(b, threads, [&](std::size_t i) {
    const auto& bm = model.blocks[i];
    const Eigen::VectorXd z = rows.row(static_cast<Eigen::Index>(i)).transpose();
    std::vector<Eigen::Index> nb;
    Eigen::VectorXd w;
    switch (cfg.method) {
      case Method::Llise: {
        const Eigen::VectorXd sq = (bm.train.rowwise() - z.transpose()).rowwise().squaredNorm();
        nb = k_smallest(sq, k);
        w = solve_weights_oos(z, gather_columns(bm.train, nb), model.c, cfg.recon).weights();
        break;
      }
      case Method::Kllise: {
        const auto krow = cross_kernel_oos(model.kernel_spec(), z, bm.train, bm.gram);
        nb = k_smallest(oos_feature_sq_distances(bm.gram, krow), k);
        w = solve_weights_kernel_oos(extract_oos_neighborhood(bm.gram, krow, nb), model.c, cfg.recon).weights();
        break;
      }
      case Method::Lle: {
        const Eigen::VectorXd sq = (bm.train.rowwise() - z.transpose()).rowwise().squaredNorm();
        nb = k_smallest(sq, k);
        w = lle_weights(z, gather_columns(bm.train, nb)).w;
        break;
      }
      case Method::Klle: {
        const auto spec = model.kernel_spec();
        const double self = kernel_eval(spec, z, z);
        const Eigen::VectorXd cross = cross_gram(spec, z.transpose(), bm.train).row(0).transpose();
        const Eigen::VectorXd sq =
            (Eigen::VectorXd::Constant(cross.size(), self) - 2.0 * cross + bm.gram.K.diagonal()).cwiseMax(0.0);
        nb = k_smallest(sq, k);
        Eigen::VectorXd local(k);
        for (Eigen::Index r = 0; r < k; ++r) local[r] = cross[nb[static_cast<std::size_t>(r)]];
        w = klle_weights(self, local, gather_square(bm.gram.K, nb)).w;
        break;
      }
    }
    out.rows.row(static_cast<Eigen::Index>(i)) = embed_oos(w, gather_rows(bm.Y, nb)).transpose();
  });
  return out;
}

std::vector<ImageEmbedding> embed_dataset(const Model& model, const std::vector<LabeledImage>& data, int threads,
                                          const LogFn& log) {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<ImageEmbedding> out;
  out.reserve(data.size());
  for (const auto& d : data) {
    auto e = embed_image(model, d.image, threads);
    e.name = d.name;
    e.truth = d.label();
    out.push_back(std::move(e));
  }
  std::ostringstream msg;
  msg << "embed: images=" << data.size() << " blocks=" << model.partition.block_count << " time=" << seconds_since(t0)
      << "s";
  log_line(log, msg.str());
  return out;
}

std::vector<std::vector<Eigen::Index>> training_nearest(const Model& model, int threads) {
  const auto n = model.image_count();
  std::vector<std::vector<Eigen::Index>> nearest(model.blocks.size(), std::vector<Eigen::Index>(static_cast<std::size_t>(n)));
  parallel_for(model.blocks.size(), threads, [&](std::size_t i) {
    const auto& Y = model.blocks[i].Y;
    for (Eigen::Index j = 0; j < n; ++j) nearest[i][static_cast<std::size_t>(j)] = nearest_reference(Y.row(j).transpose(), Y, j);
  });
  return nearest;
}

RecognitionReport evaluate_training(const Model& model, int threads) {
  const auto nearest = training_nearest(model, threads);
  std::vector<ImageRecognition> images(model.labels.size());
  for (std::size_t j = 0; j < images.size(); ++j) {
    images[j].name = model.names[j];
    images[j].truth = model.labels[j];
    for (const auto& per_block : nearest) {
      images[j].block_labels.push_back(model.labels[static_cast<std::size_t>(per_block[j])]);
    }
  }
  return make_report(std::move(images));
}

RecognitionReport evaluate_oos(const Model& model, const std::vector<ImageEmbedding>& embeddings) {
  std::vector<ImageRecognition> images;
  for (const auto& e : embeddings) {
    if (e.rows.rows() != static_cast<Eigen::Index>(model.blocks.size()) || e.rows.cols() != model.config.p) {
      throw InvalidInput("embedding '" + e.name + "' does not match the model shape");
    }
    ImageRecognition img;
    img.name = e.name;
    img.truth = e.truth;
    for (std::size_t i = 0; i < model.blocks.size(); ++i) {
      img.block_labels.push_back(
          classify_block_1nn(e.rows.row(static_cast<Eigen::Index>(i)).transpose(), model.blocks[i].Y, model.labels));
    }
    images.push_back(std::move(img));
  }
  return make_report(std::move(images));
}

}  // namespace ssimm

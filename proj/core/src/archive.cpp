#include "ssimm/error.hpp"
#include "ssimm/pipeline.hpp"
#include "ssimm/ssim.hpp"

#include "json.hpp"

#include <absl/strings/escaping.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace ssimm {

namespace {

using Json = nlohmann::ordered_json;
constexpr std::string_view kModelFormat = "ssimm-model-1";
constexpr std::string_view kEmbeddingFormat = "ssimm-embeddings-1";

std::uint64_t to_little_endian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    v = __builtin_bswap64(v);
  }
  return v;
}

Json matrix_json(const Eigen::MatrixXd& m) {
  return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", encode_matrix(m)}};
}

Eigen::MatrixXd matrix_from_json(const Json& j) {
  return decode_matrix(j.at("data").get<std::string>(), j.at("rows").get<Eigen::Index>(), j.at("cols").get<Eigen::Index>());
}

// Scalars that must survive exactly are stored as 1x1 matrices.
Json exact_scalar(double v) { return matrix_json(Eigen::MatrixXd::Constant(1, 1, v)); }
double exact_scalar_from_json(const Json& j) { return matrix_from_json(j)(0, 0); }

Json admm_json(const AdmmConfig& a) {
  return Json{{"rho", exact_scalar(a.rho)}, {"eta", exact_scalar(a.eta)}, {"max_iter", a.max_iter},
              {"tol", exact_scalar(a.tol)}, {"seed", a.seed}};
}

AdmmConfig admm_from_json(const Json& j) {
  AdmmConfig a;
  a.rho = exact_scalar_from_json(j.at("rho"));
  a.eta = exact_scalar_from_json(j.at("eta"));
  a.max_iter = j.at("max_iter").get<int>();
  a.tol = exact_scalar_from_json(j.at("tol"));
  a.seed = j.at("seed").get<std::uint64_t>();
  return a;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

Json parse(const std::string& text, std::string_view expected_format) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed JSON: " + std::string(e.what()));
  }
  if (!j.is_object() || j.value("format", std::string()) != expected_format) {
    throw IoError("expected a document of format " + std::string(expected_format));
  }
  return j;
}

}  // namespace

std::string encode_matrix(const Eigen::MatrixXd& m) {
  std::string bytes(static_cast<std::size_t>(m.size()) * 8, '\0');
  std::size_t pos = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const std::uint64_t bits = to_little_endian(std::bit_cast<std::uint64_t>(m(r, c)));
      std::memcpy(bytes.data() + pos, &bits, 8);
      pos += 8;
    }
  }
  return absl::Base64Escape(bytes);
}

Eigen::MatrixXd decode_matrix(std::string_view base64, Eigen::Index rows, Eigen::Index cols) {
  if (rows < 0 || cols < 0) throw IoError("negative matrix dimensions");
  std::string bytes;
  if (!absl::Base64Unescape(absl::string_view(base64.data(), base64.size()), &bytes)) throw IoError("invalid base64 matrix payload");
  if (bytes.size() != static_cast<std::size_t>(rows * cols) * 8) {
    throw IoError("matrix payload has " + std::to_string(bytes.size()) + " bytes, expected " +
                  std::to_string(rows * cols * 8));
  }
  Eigen::MatrixXd m(rows, cols);
  std::size_t pos = 0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      std::uint64_t bits = 0;
      std::memcpy(&bits, bytes.data() + pos, 8);
      m(r, c) = std::bit_cast<double>(to_little_endian(bits));
      pos += 8;
    }
  }
  return m;
}

std::string serialize_model(const Model& model) {
  const auto& cfg = model.config;
  Json j;
  j["format"] = kModelFormat;
  j["config"] = Json{{"method", std::string(to_string(cfg.method))},
                     {"kernel", std::string(to_string(cfg.kernel))},
                     {"q", cfg.q},
                     {"p", cfg.p},
                     {"k", cfg.k},
                     {"seed", cfg.seed},
                     {"recon", admm_json(cfg.recon)},
                     {"embed", admm_json(cfg.embed)}};
  j["width"] = model.width;
  j["height"] = model.height;
  j["block_length"] = model.partition.block_length;
  j["block_count"] = model.partition.block_count;
  j["c"] = exact_scalar(model.c);
  j["labels"] = model.labels;
  j["names"] = model.names;
  Json blocks = Json::array();
  for (const auto& bm : model.blocks) {
    Json b{{"train", matrix_json(bm.train)}, {"Y", matrix_json(bm.Y)}};
    if (cfg.method == Method::Kllise) {
      b["kernel_stats"] = Json{{"raw_diagonal", matrix_json(bm.gram.raw_diagonal)},
                               {"column_means", matrix_json(bm.gram.column_means)},
                               {"grand_mean", exact_scalar(bm.gram.grand_mean)}};
    }
    blocks.push_back(std::move(b));
  }
  j["blocks"] = std::move(blocks);
  return j.dump(1) + "\n";
}

Model deserialize_model(const std::string& text) {
  const Json j = parse(text, kModelFormat);
  Model model;
  try {
    const auto& c = j.at("config");
    auto& cfg = model.config;
    cfg.method = parse_method(c.at("method").get<std::string>());
    cfg.kernel = parse_kernel_kind(c.at("kernel").get<std::string>());
    cfg.q = c.at("q").get<std::size_t>();
    cfg.p = c.at("p").get<Eigen::Index>();
    cfg.k = c.at("k").get<Eigen::Index>();
    cfg.seed = c.at("seed").get<std::uint64_t>();
    cfg.recon = admm_from_json(c.at("recon"));
    cfg.embed = admm_from_json(c.at("embed"));
    cfg.threads = 0;

    model.width = j.at("width").get<std::size_t>();
    model.height = j.at("height").get<std::size_t>();
    model.partition = partition(model.width * model.height, j.at("block_length").get<std::size_t>());
    if (model.partition.block_count != j.at("block_count").get<std::size_t>()) throw IoError("block count mismatch");
    model.c = exact_scalar_from_json(j.at("c"));
    model.labels = j.at("labels").get<std::vector<int>>();
    model.names = j.at("names").get<std::vector<std::string>>();
    if (model.names.size() != model.labels.size()) throw IoError("names and labels differ in length");
    cfg.validate(model.width * model.height, model.image_count());

    const auto& blocks = j.at("blocks");
    if (blocks.size() != model.partition.block_count) throw IoError("wrong number of block models");
    const auto n = model.image_count();
    for (const auto& b : blocks) {
      BlockModel bm;
      bm.train = matrix_from_json(b.at("train"));
      bm.Y = matrix_from_json(b.at("Y"));
      if (bm.train.rows() != n || bm.train.cols() != static_cast<Eigen::Index>(model.partition.block_length) ||
          bm.Y.rows() != n || bm.Y.cols() != cfg.p) {
        throw IoError("block model dimensions inconsistent with the config");
      }
      if (cfg.method == Method::Kllise) {
        bm.gram = normalize_center(gram_matrix(model.kernel_spec(), bm.train));
        const auto& ks = b.at("kernel_stats");
        // The rebuild is deterministic; the stored statistics document the centering.
        bm.gram.raw_diagonal = matrix_from_json(ks.at("raw_diagonal"));
        bm.gram.column_means = matrix_from_json(ks.at("column_means"));
        bm.gram.grand_mean = exact_scalar_from_json(ks.at("grand_mean"));
      } else if (cfg.method == Method::Klle) {
        bm.gram.K = gram_matrix(model.kernel_spec(), bm.train);
      }
      model.blocks.push_back(std::move(bm));
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed model archive: " + std::string(e.what()));
  } catch (const InvalidParameter& e) {
    throw IoError("model archive has an invalid config: " + std::string(e.what()));
  }
  return model;
}

void save_model(const Model& model, const std::filesystem::path& path) { write_file(path, serialize_model(model)); }

Model load_model(const std::filesystem::path& path) { return deserialize_model(read_file(path)); }

std::string serialize_embeddings(const std::vector<ImageEmbedding>& embeddings) {
  Json j;
  j["format"] = kEmbeddingFormat;
  Json items = Json::array();
  for (const auto& e : embeddings) items.push_back(Json{{"name", e.name}, {"truth", e.truth}, {"rows", matrix_json(e.rows)}});
  j["images"] = std::move(items);
  return j.dump(1) + "\n";
}

std::vector<ImageEmbedding> deserialize_embeddings(const std::string& text) {
  const Json j = parse(text, kEmbeddingFormat);
  std::vector<ImageEmbedding> out;
  try {
    for (const auto& item : j.at("images")) {
      ImageEmbedding e;
      e.name = item.at("name").get<std::string>();
      e.truth = item.at("truth").get<int>();
      e.rows = matrix_from_json(item.at("rows"));
      out.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed embeddings file: " + std::string(e.what()));
  }
  return out;
}

void save_embeddings(const std::vector<ImageEmbedding>& embeddings, const std::filesystem::path& path) {
  write_file(path, serialize_embeddings(embeddings));
}

std::vector<ImageEmbedding> load_embeddings(const std::filesystem::path& path) {
  return deserialize_embeddings(read_file(path));
}

}  // namespace ssimm

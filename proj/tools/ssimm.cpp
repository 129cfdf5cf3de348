// ssimm command-line front end: synth, train, embed, eval, verify.

#include "ssimm/diagnostics.hpp"
#include "ssimm/distortion_lab.hpp"
#include "ssimm/error.hpp"
#include "ssimm/parallel.hpp"
#include "ssimm/pipeline.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <iostream>

namespace {

void log_stderr(const std::string& line) { std::cerr << line << '\n'; }

struct SynthArgs {
  std::string image;
  std::string out;
  std::string levels = "45:900:45";
  std::uint64_t seed = 0;
  std::size_t texture_size = 64;
};

struct TrainArgs {
  std::string data;
  std::string out = "model.json";
  std::string method = "llise";
  std::string kernel = "rbf";
  std::size_t q = 64;
  long p = 4;
  long k = 10;
  double recon_rho = 0, recon_eta = 0, embed_rho = 0, embed_eta = 0;
  int recon_max_iter = 0, embed_max_iter = 0;
  double recon_tol = 0, embed_tol = 0;
  std::uint64_t seed = 0;
};

struct EmbedArgs {
  std::string model;
  std::string images;
  std::string out = "emb.json";
};

struct EvalArgs {
  std::string model;
  std::string oos;
  std::string out = "report";
};

int cmd_synth(const SynthArgs& a) {
  using namespace ssimm;
  const GrayImage base = a.image.empty() ? synthetic_texture(a.texture_size, a.texture_size) : read_pgm(a.image);
  const auto data = synth_dataset(base, parse_levels(a.levels), all_distortions(), a.seed);
  write_dataset(data, a.out);
  double worst = 0.0;
  for (const auto& d : data) {
    if (d.target_mse > 0) worst = std::max(worst, std::abs(d.achieved_mse - d.target_mse) / d.target_mse);
  }
  std::cerr << "synth: images=" << data.size() << " size=" << base.width() << "x" << base.height()
            << " worst_relative_mse_error=" << worst << " out=" << a.out << '\n';
  return 0;
}

int cmd_train(const TrainArgs& a, int threads) {
  using namespace ssimm;
  auto cfg = ExperimentConfig::for_method(parse_method(a.method));
  cfg.kernel = parse_kernel_kind(a.kernel);
  cfg.q = a.q;
  cfg.p = a.p;
  cfg.k = a.k;
  cfg.seed = a.seed;
  cfg.threads = threads;
  if (a.recon_rho > 0) cfg.recon.rho = a.recon_rho;
  if (a.recon_eta > 0) cfg.recon.eta = a.recon_eta;
  if (a.recon_tol > 0) cfg.recon.tol = a.recon_tol;
  if (a.recon_max_iter > 0) cfg.recon.max_iter = a.recon_max_iter;
  if (a.embed_rho > 0) cfg.embed.rho = a.embed_rho;
  if (a.embed_eta > 0) cfg.embed.eta = a.embed_eta;
  if (a.embed_tol > 0) cfg.embed.tol = a.embed_tol;
  if (a.embed_max_iter > 0) cfg.embed.max_iter = a.embed_max_iter;

  const auto data = read_dataset(a.data);
  const Model model = train(data, cfg, log_stderr);
  save_model(model, a.out);
  std::cerr << "train: wrote " << a.out << '\n';
  return 0;
}

int cmd_embed(const EmbedArgs& a, int threads) {
  using namespace ssimm;
  const Model model = load_model(a.model);
  const auto data = read_dataset(a.images);
  save_embeddings(embed_dataset(model, data, threads, log_stderr), a.out);
  std::cerr << "embed: wrote " << a.out << '\n';
  return 0;
}

void print_summary(const char* what, const ssimm::RecognitionReport& r) {
  std::cout << what << ": image accuracy " << r.image_level.accuracy() << " (" << r.image_level.correct() << "/"
            << r.image_level.total() << "), block accuracy " << r.block_level.accuracy() << '\n';
}

int cmd_eval(const EvalArgs& a, int threads) {
  using namespace ssimm;
  const Model model = load_model(a.model);
  const std::filesystem::path out = a.out;
  const auto train_report = evaluate_training(model, threads);
  write_report(train_report, out / "training");
  print_summary("training (leave-one-out)", train_report);
  if (!a.oos.empty()) {
    const auto oos_report = evaluate_oos(model, load_embeddings(a.oos));
    write_report(oos_report, out / "oos");
    print_summary("out-of-sample", oos_report);
  }
  return 0;
}

int cmd_verify(std::uint64_t seed) {
  bool ok = true;
  for (const auto& r : ssimm::run_verification(seed)) {
    std::printf("%-32s %s  cases=%d worst=%.3e tol=%.1e\n", r.name.c_str(), r.passed ? "ok  " : "FAIL", r.cases, r.worst,
                r.tolerance);
    ok = ok && r.passed;
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SSIM-based locally linear image structural embedding"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Worker threads (default: $SSIMM_THREADS or all cores)");

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate a distorted dataset at fixed MSE levels");
  s->add_option("--image", synth.image, "Base 8-bit PGM (default: built-in synthetic texture)");
  s->add_option("--out", synth.out, "Output directory")->required();
  s->add_option("--levels", synth.levels, "MSE levels, first:last:step or a comma list");
  s->add_option("--seed", synth.seed, "Seed for stochastic distortions");
  s->add_option("--texture-size", synth.texture_size, "Side of the built-in texture");

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Learn per-block embeddings from a dataset");
  t->add_option("--data", tr.data, "Dataset directory (with manifest.json)")->required();
  t->add_option("--method", tr.method, "llise, kllise, lle or klle");
  t->add_option("--kernel", tr.kernel, "linear, polynomial, rbf or sigmoid");
  t->add_option("--q", tr.q, "Block length in pixels");
  t->add_option("--p", tr.p, "Embedding dimension");
  t->add_option("--k", tr.k, "Neighbors per block");
  t->add_option("--seed", tr.seed, "Seed for embedding initialization");
  t->add_option("--out", tr.out, "Model archive path");
  t->add_option("--recon-rho", tr.recon_rho);
  t->add_option("--recon-eta", tr.recon_eta);
  t->add_option("--recon-tol", tr.recon_tol);
  t->add_option("--recon-max-iter", tr.recon_max_iter);
  t->add_option("--embed-rho", tr.embed_rho);
  t->add_option("--embed-eta", tr.embed_eta);
  t->add_option("--embed-tol", tr.embed_tol);
  t->add_option("--embed-max-iter", tr.embed_max_iter);

  EmbedArgs em;
  auto* e = app.add_subcommand("embed", "Embed new images with a trained model");
  e->add_option("--model", em.model, "Model archive")->required();
  e->add_option("--images", em.images, "Dataset directory")->required();
  e->add_option("--out", em.out, "Embeddings output path");

  EvalArgs ev;
  auto* v = app.add_subcommand("eval", "1NN distortion recognition and confusion matrices");
  v->add_option("--model", ev.model, "Model archive")->required();
  v->add_option("--oos", ev.oos, "Out-of-sample embeddings from `embed`");
  v->add_option("--out", ev.out, "Report directory");

  std::uint64_t verify_seed = 1;
  auto* vf = app.add_subcommand("verify", "Gradient and projection self-checks");
  vf->add_option("--seed", verify_seed);

  CLI11_PARSE(app, argc, argv);
  const int workers = ssimm::resolve_threads(threads);

  try {
    if (*s) return cmd_synth(synth);
    if (*t) return cmd_train(tr, workers);
    if (*e) return cmd_embed(em, workers);
    if (*v) return cmd_eval(ev, workers);
    if (*vf) return cmd_verify(verify_seed);
  } catch (const ssimm::CalibrationFailure& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 3;
  } catch (const ssimm::Error& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 2;
  }
  return 1;
}

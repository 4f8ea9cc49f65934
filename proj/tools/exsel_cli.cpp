// Command-line front end: cross-validated experiments, synthetic benchmark
// generation and the annotation service.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include "CLI11.hpp"
#include "exsel/corpus_io.hpp"
#include "exsel/experiment.hpp"
#include "exsel/session.hpp"
#include "httplib.h"

namespace {

struct ModelOptions {
  std::string thesaurus;
  std::string seeds;
  std::string corpus;
  double lambda = 0.5;
  std::size_t k = 1;
  std::size_t batch = 1;
  double alpha = 1.0;
  bool argmax_only = true;
  bool extend_frames = false;
};

void add_model_options(CLI::App* cmd, ModelOptions& o) {
  cmd->add_option("--thesaurus", o.thesaurus, "Thesaurus JSONL")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seeds", o.seeds, "Seed example database JSONL")->required()->check(CLI::ExistingFile);
  cmd->add_option("--corpus", o.corpus, "Corpus JSONL")->required()->check(CLI::ExistingFile);
  cmd->add_option("--lambda", o.lambda, "Certainty mix between top score and margin")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--k", o.k, "Candidate senses averaged in the training utility")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--batch", o.batch, "Samples labeled per iteration")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  auto* alpha = cmd->add_option("--alpha", o.alpha, "Case weight exponent (power mode)")
                    ->check(CLI::NonNegativeNumber);
  auto* argmax = cmd->add_flag("--ccd-argmax-only", "Weight only the most discriminative case (default)");
  argmax->excludes(alpha);
  alpha->excludes(argmax);
  cmd->add_flag("--extend-frames", o.extend_frames, "Let commits add unsubcategorized cases to a frame");
  cmd->callback([&o, alpha] {
    if (alpha->count() > 0) o.argmax_only = false;
  });
}

exsel::SamplerParams sampler_params(const ModelOptions& o) {
  exsel::SamplerParams p;
  p.lambda = o.lambda;
  p.k = o.k;
  p.batch_size = o.batch;
  p.ccd.argmax_only = o.argmax_only;
  p.ccd.alpha = o.alpha;
  return p;
}

struct Inputs {
  exsel::Database seeds;
  std::vector<exsel::SentenceExample> corpus;
};

Inputs load_inputs(const ModelOptions& o) {
  auto thesaurus = std::make_shared<const exsel::Thesaurus>(exsel::Thesaurus::load_file(o.thesaurus));
  auto policy = o.extend_frames ? exsel::FramePolicy::Extend : exsel::FramePolicy::Reject;
  auto seeds = exsel::Database::load_file(o.seeds, thesaurus, policy);
  auto parsed = exsel::load_corpus(o.corpus, &seeds);
  for (const auto& w : parsed.warnings) std::cerr << "warning: " << w << '\n';
  return {std::move(seeds), std::move(parsed.examples)};
}

int run_command(const ModelOptions& o, const std::vector<std::string>& strategies, double penalty,
                std::size_t folds, std::uint64_t seed, std::size_t stride, unsigned threads,
                const std::string& out_dir) {
  exsel::ExperimentConfig config;
  config.sampler = sampler_params(o);
  config.penalty = penalty;
  config.folds = folds;
  config.rng_seed = seed;
  config.eval_stride = stride;
  config.threads = threads;
  if (!strategies.empty()) {
    config.strategies.clear();
    for (const auto& name : strategies) config.strategies.push_back(*exsel::parse_strategy(name));
  }
  auto inputs = load_inputs(o);
  auto report = exsel::run_experiment(inputs.seeds, inputs.corpus, config);

  std::filesystem::create_directories(out_dir);
  std::ofstream csv(std::filesystem::path(out_dir) / "report.csv");
  report.write_csv(csv);
  std::ofstream summary(std::filesystem::path(out_dir) / "summary.json");
  report.write_summary(summary);
  if (!csv || !summary) throw exsel::Error("cannot write reports to '" + out_dir + "'");

  for (auto s : config.strategies)
    std::cout << exsel::to_string(s) << ": final precision " << report.mean_final_precision(s)
              << ", precision area " << report.mean_precision_area(s) << ", pm area " << report.mean_pm_area(s)
              << '\n';
  std::cout << "lower bound: " << report.lower_bound.pooled << '\n';
  return 0;
}

int serve_command(const ModelOptions& o, const std::string& session_path, const std::string& host, int port) {
  auto inputs = load_inputs(o);
  std::unique_ptr<exsel::AnnotationSession> session;
  if (std::filesystem::exists(session_path)) {
    session = exsel::AnnotationSession::resume(session_path, inputs.seeds.thesaurus_ptr(), std::move(inputs.corpus),
                                               sampler_params(o));
    std::cerr << "resumed session from " << session_path << '\n';
  } else {
    session = std::make_unique<exsel::AnnotationSession>(std::move(inputs.seeds), std::move(inputs.corpus),
                                                         sampler_params(o), session_path);
  }
  httplib::Server server;
  exsel::mount_session(server, *session);
  std::cerr << "listening on " << host << ':' << port << '\n';
  if (!server.listen(host, port)) throw exsel::Error("cannot listen on " + host + ":" + std::to_string(port));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Example sampling for verb sense disambiguation"};
  app.require_subcommand(1);

  ModelOptions run_opts;
  std::vector<std::string> strategies;
  double penalty = 1.0;
  std::size_t folds = 6, stride = 1;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::string out_dir = "out";
  auto* run = app.add_subcommand("run", "Cross-validated sampling experiment");
  add_model_options(run, run_opts);
  run->add_option("--strategy", strategies, "random or utility (repeatable; default both)")
      ->check(CLI::IsMember({"random", "utility"}));
  run->add_option("--p", penalty, "Penalty for a wrong answer in the performance measure")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  run->add_option("--folds", folds, "Cross-validation folds")->capture_default_str()->check(CLI::Range(2, 1000));
  run->add_option("--rng-seed", seed, "Seed for fold assignment and random sampling")->capture_default_str();
  run->add_option("--stride", stride, "Evaluate every n-th iteration")->capture_default_str()->check(
      CLI::PositiveNumber);
  run->add_option("--threads", threads, "Worker threads (0: all cores)")->capture_default_str();
  run->add_option("--out", out_dir, "Output directory for report.csv and summary.json")->capture_default_str();

  std::string spec_path, gen_out;
  auto* gen = app.add_subcommand("gen", "Generate a synthetic benchmark");
  gen->add_option("--spec", spec_path, "Generator spec JSON")->required()->check(CLI::ExistingFile);
  gen->add_option("--out-dir", gen_out, "Output directory")->required();

  ModelOptions serve_opts;
  std::string session_path = "session.json", host = "127.0.0.1";
  int port = 8080;
  auto* serve = app.add_subcommand("serve", "Annotation HTTP service");
  add_model_options(serve, serve_opts);
  serve->add_option("--session", session_path, "Session file (resumed when present)")->capture_default_str();
  serve->add_option("--host", host, "Bind address")->capture_default_str();
  serve->add_option("--port", port, "Port")->capture_default_str()->check(CLI::Range(1, 65535));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return run_command(run_opts, strategies, penalty, folds, seed, stride, threads, out_dir);
    if (*gen) {
      auto bench = exsel::generate_synthetic(exsel::SyntheticSpec::load_file(spec_path));
      bench.write(gen_out);
      std::cout << "wrote " << bench.corpus.size() << " sentences, " << bench.seeds.sense_count() << " senses to "
                << gen_out << '\n';
      return 0;
    }
    if (*serve) return serve_command(serve_opts, session_path, host, port);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

#include "exsel/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <iomanip>
#include <map>
#include <mutex>
#include <numeric>
#include <ostream>
#include <random>
#include <thread>

#include "json.hpp"

namespace exsel {

using nlohmann::json;

std::string_view to_string(Strategy s) noexcept {
  return s == Strategy::Random ? "random" : "utility";
}

std::optional<Strategy> parse_strategy(std::string_view name) noexcept {
  if (name == "random") return Strategy::Random;
  if (name == "utility") return Strategy::Utility;
  return std::nullopt;
}

void ExperimentConfig::validate() const {
  if (sampler.lambda < 0.0 || sampler.lambda > 1.0) throw Error("lambda must lie in [0, 1]");
  if (sampler.k == 0) throw Error("k must be at least 1");
  if (sampler.batch_size == 0) throw Error("batch size must be at least 1");
  if (!sampler.ccd.argmax_only && sampler.ccd.alpha < 0.0) throw Error("alpha must be non-negative");
  if (penalty < 0.0) throw Error("penalty p must be non-negative");
  if (folds < 2) throw Error("cross validation needs at least 2 folds");
  if (strategies.empty()) throw Error("no sampling strategy selected");
  if (eval_stride == 0) throw Error("evaluation stride must be at least 1");
}

namespace {

double trapezoid(const FoldCurve& c, double CurvePoint::*y) {
  if (c.points.empty()) return 0.0;
  if (c.points.size() == 1 || c.training_size == 0) return c.points.front().*y;
  const double n = static_cast<double>(c.training_size);
  double area = 0.0;
  for (std::size_t i = 1; i < c.points.size(); ++i) {
    const auto& a = c.points[i - 1];
    const auto& b = c.points[i];
    area += (static_cast<double>(b.labeled) - static_cast<double>(a.labeled)) / n * (a.*y + b.*y) / 2.0;
  }
  return area;
}

struct Snapshot {
  std::size_t iteration;
  std::size_t labeled;
  std::vector<Outcome> outcomes;
};

struct Job {
  std::size_t fold;
  std::size_t verb;
  std::size_t strategy;  // position in config.strategies
};

std::vector<Outcome> outcomes_of(const ScoreCache& cache, const VerbEntry& verb) {
  std::vector<Outcome> out;
  out.reserve(cache.size());
  for (std::size_t i = 0; i < cache.size(); ++i) {
    const auto& row = cache.row(i);
    const auto& predicted = verb.senses[row.best_sense()].sense;
    out.push_back({predicted == *cache.example(i).gold, row.certainty});
  }
  return out;
}

std::vector<Snapshot> run_job(const Database& seeds, std::span<const SentenceExample> corpus,
                              std::span<const std::size_t> fold_of, const std::string& verb, const Job& job,
                              const ExperimentConfig& config) {
  std::vector<SentenceExample> training, test;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (corpus[i].verb != verb) continue;
    (fold_of[i] == job.fold ? test : training).push_back(corpus[i]);
  }

  Sampler sampler(seeds.restricted_to(verb), std::move(training), config.sampler);
  auto handle = sampler.watch(std::move(test));
  const auto& entry = *sampler.database().find_verb(verb);

  std::vector<Snapshot> trace;
  auto record = [&](std::size_t iteration) {
    trace.push_back({iteration, sampler.labeled_size(), outcomes_of(sampler.watched(handle), entry)});
  };

  const auto strategy = config.strategies[job.strategy];
  std::vector<std::size_t> order;
  if (strategy == Strategy::Random) {
    order = sampler.pool();
    std::seed_seq seq{static_cast<std::uint32_t>(config.rng_seed), static_cast<std::uint32_t>(config.rng_seed >> 32),
                      static_cast<std::uint32_t>(job.fold), static_cast<std::uint32_t>(job.verb), 0x52414e44u};
    std::mt19937_64 rng(seq);
    std::shuffle(order.begin(), order.end(), rng);
  }

  record(0);
  std::size_t iteration = 0;
  std::size_t next = 0;
  const auto batch_size = config.sampler.batch_size;
  while (sampler.pool_size() > 0) {
    std::vector<std::size_t> batch;
    if (strategy == Strategy::Utility) {
      batch = sampler.select_samples();
    } else {
      for (; next < order.size() && batch.size() < batch_size; ++next) batch.push_back(order[next]);
    }
    std::vector<std::pair<std::size_t, std::string>> labels;
    for (auto x : batch) labels.emplace_back(x, *sampler.example(x).gold);
    sampler.label_batch(labels);
    ++iteration;
    if (iteration % config.eval_stride == 0 || sampler.pool_size() == 0) record(iteration);
  }
  return trace;
}

CurvePoint pooled_point(std::size_t t, std::span<const std::vector<Snapshot>* const> traces,
                        const ExperimentConfig& config) {
  CurvePoint pt;
  pt.iteration = t;
  for (const auto* trace : traces) {
    const Snapshot* at = &trace->front();
    for (const auto& snap : *trace) {
      if (snap.iteration > t) break;
      at = &snap;
    }
    pt.labeled += at->labeled;
    pt.outcomes.insert(pt.outcomes.end(), at->outcomes.begin(), at->outcomes.end());
  }
  pt.precision = precision(pt.outcomes);
  pt.pm = performance_measure(pt.outcomes, config.penalty);
  pt.sweep = applicability_precision_curve(pt.outcomes, config.thresholds);
  return pt;
}

}  // namespace

double FoldCurve::precision_area() const { return trapezoid(*this, &CurvePoint::precision); }
double FoldCurve::pm_area() const { return trapezoid(*this, &CurvePoint::pm); }

const FoldCurve& ExperimentReport::curve(Strategy s, std::size_t fold) const {
  for (const auto& c : curves)
    if (c.strategy == s && c.fold == fold) return c;
  throw Error("no curve for strategy '" + std::string(to_string(s)) + "' on fold " + std::to_string(fold));
}

double ExperimentReport::mean_precision_area(Strategy s) const {
  double total = 0.0;
  for (std::size_t f = 0; f < config.folds; ++f) total += curve(s, f).precision_area();
  return total / static_cast<double>(config.folds);
}

double ExperimentReport::mean_pm_area(Strategy s) const {
  double total = 0.0;
  for (std::size_t f = 0; f < config.folds; ++f) total += curve(s, f).pm_area();
  return total / static_cast<double>(config.folds);
}

double ExperimentReport::mean_final_precision(Strategy s) const {
  double total = 0.0;
  for (std::size_t f = 0; f < config.folds; ++f) total += curve(s, f).final_point().precision;
  return total / static_cast<double>(config.folds);
}

void ExperimentReport::write_csv(std::ostream& out) const {
  out << "strategy,fold,iteration,labeled,precision,pm\n";
  auto old = out.precision(10);
  for (const auto& c : curves)
    for (const auto& p : c.points)
      out << to_string(c.strategy) << ',' << c.fold << ',' << p.iteration << ',' << p.labeled << ','
          << p.precision << ',' << p.pm << '\n';
  out.precision(old);
}

void ExperimentReport::write_summary(std::ostream& out) const {
  json j;
  j["parameters"] = {
      {"lambda", config.sampler.lambda},
      {"k", config.sampler.k},
      {"batch", config.sampler.batch_size},
      {"ccd", config.sampler.ccd.argmax_only ? json("argmax-only") : json(config.sampler.ccd.alpha)},
      {"p", config.penalty},
      {"folds", config.folds},
      {"rng_seed", config.rng_seed},
      {"eval_stride", config.eval_stride},
  };
  auto& strategies = j["strategies"] = json::object();
  for (auto s : config.strategies) {
    json st;
    st["mean_final_precision"] = mean_final_precision(s);
    st["mean_precision_area"] = mean_precision_area(s);
    st["mean_pm_area"] = mean_pm_area(s);
    auto& folds = st["folds"] = json::array();
    for (std::size_t f = 0; f < config.folds; ++f) {
      const auto& c = curve(s, f);
      json sweep = json::array();
      for (const auto& a : c.final_point().sweep)
        sweep.push_back({{"threshold", a.threshold},
                         {"applicability", a.applicability},
                         {"precision", a.precision ? json(*a.precision) : json(nullptr)}});
      folds.push_back({{"fold", f},
                       {"training", c.training_size},
                       {"test", c.test_size},
                       {"final_precision", c.final_point().precision},
                       {"final_pm", c.final_point().pm},
                       {"precision_area", c.precision_area()},
                       {"pm_area", c.pm_area()},
                       {"final_applicability", sweep}});
    }
    strategies[std::string(to_string(s))] = st;
  }
  j["lower_bound"] = {{"pooled", lower_bound.pooled}, {"per_verb", lower_bound.per_verb}};
  j["fold_of"] = fold_of;
  out << j.dump(2) << '\n';
}

std::vector<std::size_t> assign_folds(std::span<const SentenceExample> corpus, std::size_t folds,
                                      std::uint64_t rng_seed) {
  if (folds == 0) throw Error("fold count must be positive");
  std::map<std::string, std::vector<std::size_t>> by_verb;
  for (std::size_t i = 0; i < corpus.size(); ++i) by_verb[corpus[i].verb].push_back(i);

  std::seed_seq seq{static_cast<std::uint32_t>(rng_seed), static_cast<std::uint32_t>(rng_seed >> 32), 0x464f4c44u};
  std::mt19937_64 rng(seq);
  std::vector<std::size_t> fold_of(corpus.size());
  std::size_t deal = 0;
  for (auto& [verb, members] : by_verb) {
    std::shuffle(members.begin(), members.end(), rng);
    for (auto i : members) fold_of[i] = deal++ % folds;
  }
  return fold_of;
}

ExperimentReport run_experiment(const Database& seeds, std::span<const SentenceExample> corpus,
                                const ExperimentConfig& config) {
  config.validate();
  if (corpus.size() < config.folds)
    throw Error("corpus has " + std::to_string(corpus.size()) + " sentences, fewer than " +
                std::to_string(config.folds) + " folds");
  std::vector<std::string> verbs;
  for (const auto& x : corpus) {
    seeds.validate(x);
    if (!x.gold) throw Error("sentence '" + x.id + "' has no gold sense; experiments need labeled corpora");
    if (std::find(verbs.begin(), verbs.end(), x.verb) == verbs.end()) verbs.push_back(x.verb);
  }

  ExperimentReport report;
  report.config = config;
  report.fold_of = assign_folds(corpus, config.folds, config.rng_seed);

  std::vector<Job> jobs;
  for (std::size_t f = 0; f < config.folds; ++f)
    for (std::size_t v = 0; v < verbs.size(); ++v)
      for (std::size_t s = 0; s < config.strategies.size(); ++s) jobs.push_back({f, v, s});

  std::vector<std::vector<Snapshot>> traces(jobs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      auto j = next.fetch_add(1);
      if (j >= jobs.size()) return;
      try {
        traces[j] = run_job(seeds, corpus, report.fold_of, verbs[jobs[j].verb], jobs[j], config);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = jobs.size();
      }
    }
  };
  unsigned threads = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, jobs.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  for (std::size_t f = 0; f < config.folds; ++f) {
    std::vector<SentenceExample> training, test;
    for (std::size_t i = 0; i < corpus.size(); ++i) (report.fold_of[i] == f ? test : training).push_back(corpus[i]);
    if (test.empty()) throw Error("fold " + std::to_string(f) + " has no test sentences");
    report.fold_lower_bounds.push_back(exsel::lower_bound(seeds, training, test));

    for (std::size_t s = 0; s < config.strategies.size(); ++s) {
      std::vector<const std::vector<Snapshot>*> fold_traces;
      for (std::size_t j = 0; j < jobs.size(); ++j)
        if (jobs[j].fold == f && jobs[j].strategy == s) fold_traces.push_back(&traces[j]);

      std::size_t last = 0;
      for (const auto* t : fold_traces) last = std::max(last, t->back().iteration);
      std::vector<std::size_t> times;
      for (std::size_t t = 0; t < last; t += config.eval_stride) times.push_back(t);
      times.push_back(last);

      FoldCurve curve;
      curve.strategy = config.strategies[s];
      curve.fold = f;
      curve.training_size = training.size();
      curve.test_size = test.size();
      for (auto t : times) curve.points.push_back(pooled_point(t, fold_traces, config));
      report.curves.push_back(std::move(curve));
    }
  }
  report.lower_bound = pool_lower_bounds(report.fold_lower_bounds);
  return report;
}

}  // namespace exsel

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "exsel/metrics.hpp"
#include "exsel/sampler.hpp"

namespace exsel {

enum class Strategy { Random, Utility };

std::string_view to_string(Strategy s) noexcept;
std::optional<Strategy> parse_strategy(std::string_view name) noexcept;

struct ExperimentConfig {
  SamplerParams sampler;
  double penalty = 1.0;                     // p
  std::size_t folds = 6;
  std::vector<Strategy> strategies{Strategy::Random, Strategy::Utility};
  std::uint64_t rng_seed = 0;
  std::size_t eval_stride = 1;              // evaluate every n-th batch (and always the last)
  std::vector<double> thresholds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
  unsigned threads = 0;                     // 0: hardware concurrency

  /// Throws Error describing the first invalid setting.
  void validate() const;
};

struct CurvePoint {
  std::size_t iteration = 0;
  std::size_t labeled = 0;
  double precision = 0.0;
  double pm = 0.0;
  std::vector<ApplicabilityPoint> sweep;
  std::vector<Outcome> outcomes;            // pooled test outcomes at this point
};

/// Pooled learning curve of one strategy on one fold.
struct FoldCurve {
  Strategy strategy = Strategy::Random;
  std::size_t fold = 0;
  std::size_t training_size = 0;
  std::size_t test_size = 0;
  std::vector<CurvePoint> points;

  /// Trapezoidal area under precision (or PM) against labeled / training_size.
  double precision_area() const;
  double pm_area() const;
  const CurvePoint& final_point() const { return points.back(); }
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<std::size_t> fold_of;         // per corpus sentence
  std::vector<FoldCurve> curves;            // fold-major, strategies in config order
  std::vector<LowerBound> fold_lower_bounds;
  LowerBound lower_bound;

  const FoldCurve& curve(Strategy s, std::size_t fold) const;
  double mean_precision_area(Strategy s) const;
  double mean_pm_area(Strategy s) const;
  double mean_final_precision(Strategy s) const;

  /// `strategy,fold,iteration,labeled,precision,pm`
  void write_csv(std::ostream& out) const;
  /// Final precisions, curve areas, lower bounds and run parameters.
  void write_summary(std::ostream& out) const;
};

/// Balanced fold assignment: each verb's sentences are shuffled and dealt
/// round-robin, continuing the deal across verbs so fold sizes differ by at
/// most one.
std::vector<std::size_t> assign_folds(std::span<const SentenceExample> corpus, std::size_t folds,
                                      std::uint64_t rng_seed);

/// Cross-validated comparison of sampling strategies. Each verb is sampled
/// independently from the seed database; curves pool verbs by sentence
/// count, holding a verb at its final state once its training fold is used up.
ExperimentReport run_experiment(const Database& seeds, std::span<const SentenceExample> corpus,
                                const ExperimentConfig& config);

}  // namespace exsel

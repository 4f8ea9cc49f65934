#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "exsel/example_db.hpp"

namespace exsel {

inline constexpr double kMaxCertainty = 11.0;

/// Result of disambiguating one test sentence.
struct Outcome {
  bool correct = false;
  double certainty = 0.0;
};

/// Fraction of correct outputs. Throws Error on an empty set.
double precision(std::span<const Outcome> outcomes);
double precision(std::span<const std::string> outputs, std::span<const std::string> golds);

struct ApplicabilityPoint {
  double threshold = 0.0;
  double applicability = 0.0;
  std::optional<double> precision;  // nullopt when no output reaches the threshold
};

/// For each threshold: the share of outputs with certainty >= threshold, and
/// the precision over that share.
std::vector<ApplicabilityPoint> applicability_precision_curve(std::span<const Outcome> outcomes,
                                                              std::span<const double> thresholds);

/// Certainty-weighted score: mean of delta * C(x) / c_max, where delta is 1
/// for a correct output and -penalty otherwise. Throws Error on an empty set.
double performance_measure(std::span<const Outcome> outcomes, double penalty, double c_max = kMaxCertainty);

/// Majority-sense baseline.
struct LowerBound {
  std::map<std::string, double> per_verb;
  std::map<std::string, std::size_t> per_verb_tested;
  std::map<std::string, std::size_t> per_verb_correct;
  double pooled = 0.0;
  std::size_t tested = 0;
  std::size_t correct = 0;
};

/// Picks, per verb, the most frequent gold sense in `training` and scores it
/// on `test`. Ties go to the earlier sense; a verb absent from `training`
/// gets its first sense in `db`.
LowerBound lower_bound(const Database& db, std::span<const SentenceExample> training,
                       std::span<const SentenceExample> test);

/// Sentence-weighted merge of several folds' lower bounds.
LowerBound pool_lower_bounds(std::span<const LowerBound> folds);

}  // namespace exsel

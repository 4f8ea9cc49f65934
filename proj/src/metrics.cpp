#include "exsel/metrics.hpp"

#include <algorithm>

namespace exsel {

double precision(std::span<const Outcome> outcomes) {
  if (outcomes.empty()) throw Error("precision of an empty output set");
  auto correct = std::count_if(outcomes.begin(), outcomes.end(), [](const Outcome& o) { return o.correct; });
  return static_cast<double>(correct) / static_cast<double>(outcomes.size());
}

double precision(std::span<const std::string> outputs, std::span<const std::string> golds) {
  if (outputs.size() != golds.size()) throw Error("outputs and golds differ in length");
  if (outputs.empty()) throw Error("precision of an empty output set");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < outputs.size(); ++i) correct += outputs[i] == golds[i];
  return static_cast<double>(correct) / static_cast<double>(outputs.size());
}

std::vector<ApplicabilityPoint> applicability_precision_curve(std::span<const Outcome> outcomes,
                                                              std::span<const double> thresholds) {
  std::vector<ApplicabilityPoint> curve;
  curve.reserve(thresholds.size());
  for (double theta : thresholds) {
    std::size_t applied = 0, correct = 0;
    for (const auto& o : outcomes) {
      if (o.certainty < theta) continue;
      ++applied;
      correct += o.correct;
    }
    ApplicabilityPoint pt{theta, 0.0, std::nullopt};
    if (!outcomes.empty()) pt.applicability = static_cast<double>(applied) / static_cast<double>(outcomes.size());
    if (applied) pt.precision = static_cast<double>(correct) / static_cast<double>(applied);
    curve.push_back(pt);
  }
  return curve;
}

double performance_measure(std::span<const Outcome> outcomes, double penalty, double c_max) {
  if (outcomes.empty()) throw Error("performance measure of an empty output set");
  if (penalty < 0.0) throw Error("penalty must be non-negative");
  double total = 0.0;
  for (const auto& o : outcomes) total += (o.correct ? 1.0 : -penalty) * o.certainty / c_max;
  return total / static_cast<double>(outcomes.size());
}

namespace {

void finish(LowerBound& lb) {
  lb.per_verb.clear();
  for (const auto& [verb, n] : lb.per_verb_tested)
    lb.per_verb[verb] = static_cast<double>(lb.per_verb_correct[verb]) / static_cast<double>(n);
  lb.pooled = lb.tested ? static_cast<double>(lb.correct) / static_cast<double>(lb.tested) : 0.0;
}

}  // namespace

LowerBound lower_bound(const Database& db, std::span<const SentenceExample> training,
                       std::span<const SentenceExample> test) {
  std::map<std::string, std::map<std::string, std::size_t>> counts;
  for (const auto& x : training)
    if (x.gold) ++counts[x.verb][*x.gold];

  auto majority = [&](const std::string& verb) -> std::string {
    const auto* ve = db.find_verb(verb);
    if (!ve || ve->senses.empty()) return {};
    auto it = counts.find(verb);
    std::string best = ve->senses.front().sense;
    if (it == counts.end()) return best;
    std::size_t best_count = 0;
    for (const auto& s : ve->senses) {
      auto c = it->second.find(s.sense);
      std::size_t n = c == it->second.end() ? 0 : c->second;
      if (n > best_count) {
        best = s.sense;
        best_count = n;
      }
    }
    return best;
  };

  LowerBound out;
  std::map<std::string, std::string> chosen;
  for (const auto& x : test) {
    if (!x.gold) throw Error("test sentence '" + x.id + "' has no gold sense");
    auto [it, inserted] = chosen.try_emplace(x.verb);
    if (inserted) it->second = majority(x.verb);
    bool ok = it->second == *x.gold;
    ++out.per_verb_tested[x.verb];
    out.per_verb_correct[x.verb] += ok;
    out.correct += ok;
  }
  out.tested = test.size();
  finish(out);
  return out;
}

LowerBound pool_lower_bounds(std::span<const LowerBound> folds) {
  LowerBound out;
  for (const auto& f : folds) {
    for (const auto& [verb, n] : f.per_verb_tested) out.per_verb_tested[verb] += n;
    for (const auto& [verb, n] : f.per_verb_correct) out.per_verb_correct[verb] += n;
    out.tested += f.tested;
    out.correct += f.correct;
  }
  finish(out);
  return out;
}

}  // namespace exsel

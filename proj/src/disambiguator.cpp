#include "exsel/disambiguator.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace exsel {

std::size_t shared_count(const FillerSet& a, const FillerSet& b, const Thesaurus& thesaurus) {
  struct Pair {
    int sim;
    std::uint32_t i, j;
  };
  std::vector<Pair> pairs;
  auto ia = a.items();
  auto ib = b.items();
  for (std::uint32_t i = 0; i < ia.size(); ++i)
    for (std::uint32_t j = 0; j < ib.size(); ++j) {
      int s = thesaurus.sim(ia[i], ib[j]);
      if (s >= kShareThreshold) pairs.push_back({s, i, j});
    }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& l, const Pair& r) {
    return std::tie(r.sim, l.i, l.j) < std::tie(l.sim, r.i, r.j);
  });

  std::vector<bool> used_a(ia.size()), used_b(ib.size());
  std::size_t matched = 0;
  for (const auto& p : pairs) {
    if (used_a[p.i] || used_b[p.j]) continue;
    used_a[p.i] = used_b[p.j] = true;
    ++matched;
  }
  return matched;
}

double ccd_base(const VerbEntry& verb, std::string_view marker, const Thesaurus& thesaurus) {
  std::vector<const FillerSet*> sets;
  for (const auto& s : verb.senses)
    if (const auto* f = s.fillers(marker)) sets.push_back(f);
  if (sets.size() < 2) return 1.0;

  double total = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i + 1 < sets.size(); ++i) {
    for (std::size_t j = i + 1; j < sets.size(); ++j) {
      auto sizes = static_cast<double>(sets[i]->size() + sets[j]->size());
      ++pairs;
      if (sizes == 0.0) {
        total += 1.0;
        continue;
      }
      auto shared = static_cast<double>(shared_count(*sets[i], *sets[j], thesaurus));
      total += (sizes - 2.0 * shared) / sizes;
    }
  }
  return total / static_cast<double>(pairs);
}

double ccd(const VerbEntry& verb, std::string_view marker, double alpha, const Thesaurus& thesaurus) {
  return std::pow(ccd_base(verb, marker, thesaurus), alpha);
}

CaseContribution CaseContribution::compute(const VerbEntry& verb, const Thesaurus& thesaurus) {
  CaseContribution out;
  for (const auto& s : verb.senses)
    for (const auto& [marker, set] : s.frame)
      if (!out.bases_.count(marker)) out.bases_.emplace(marker, ccd_base(verb, marker, thesaurus));
  return out;
}

double CaseContribution::base(std::string_view marker) const {
  auto it = bases_.find(marker);
  return it == bases_.end() ? 1.0 : it->second;
}

int max_sim(const Term& noun, const FillerSet& examples, const Thesaurus& thesaurus) {
  if (examples.empty()) throw Error("SIM over an empty filler set");
  int best = 0;
  for (const auto& e : examples.items()) {
    best = std::max(best, thesaurus.sim(noun, e));
    if (best == kMaxSim) break;
  }
  return best;
}

CaseLayout layout_for(const VerbEntry& verb, const SentenceExample& x) {
  CaseLayout layout;
  for (std::size_t s = 0; s < verb.senses.size(); ++s) {
    const auto& sense = verb.senses[s];
    bool fits = std::all_of(x.complements.begin(), x.complements.end(),
                            [&](const Complement& c) { return sense.has_case(c.marker); });
    if (fits) layout.candidates.push_back(s);
  }
  if (!layout.candidates.empty()) {
    for (std::size_t c = 0; c < x.complements.size(); ++c) layout.complements.push_back(c);
    return layout;
  }

  layout.frame_mismatch = true;
  for (std::size_t s = 0; s < verb.senses.size(); ++s) layout.candidates.push_back(s);
  for (std::size_t c = 0; c < x.complements.size(); ++c) {
    const auto& marker = x.complements[c].marker;
    bool any = std::any_of(verb.senses.begin(), verb.senses.end(),
                           [&](const SenseEntry& s) { return s.has_case(marker); });
    if (any) layout.complements.push_back(c);
  }
  return layout;
}

std::vector<double> case_weights(const CaseContribution& contribution,
                                 std::span<const std::string_view> markers, const CcdSetting& setting) {
  std::vector<double> weights(markers.size());
  if (setting.argmax_only) {
    double top = -1.0;
    for (auto m : markers) top = std::max(top, contribution.base(m));
    for (std::size_t i = 0; i < markers.size(); ++i)
      weights[i] = contribution.base(markers[i]) == top ? 1.0 : 0.0;
  } else {
    for (std::size_t i = 0; i < markers.size(); ++i)
      weights[i] = std::pow(contribution.base(markers[i]), setting.alpha);
  }
  return weights;
}

double weighted_score(std::span<const int> sims, std::span<const double> weights) {
  if (sims.empty()) return 0.0;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < sims.size(); ++i) {
    num += weights[i] * sims[i];
    den += weights[i];
  }
  if (den > 0.0) return num / den;
  double sum = 0.0;
  for (int s : sims) sum += s;
  return sum / static_cast<double>(sims.size());
}

Ranking score_senses(const SentenceExample& x, const Database& db, const CcdSetting& setting) {
  const auto* ve = db.find_verb(x.verb);
  if (!ve) throw Error("cannot score '" + x.id + "': verb '" + x.verb + "' has no database entry");
  return score_senses(x, db, setting, CaseContribution::compute(*ve, db.thesaurus()));
}

Ranking score_senses(const SentenceExample& x, const Database& db, const CcdSetting& setting,
                     const CaseContribution& contribution) {
  const auto* ve = db.find_verb(x.verb);
  if (!ve) throw Error("cannot score '" + x.id + "': verb '" + x.verb + "' has no database entry");
  const auto& thesaurus = db.thesaurus();

  auto layout = layout_for(*ve, x);
  std::vector<std::string_view> markers;
  std::vector<Term> nouns;
  for (auto c : layout.complements) {
    markers.push_back(x.complements[c].marker);
    nouns.push_back(thesaurus.resolve(x.complements[c].noun));
  }
  auto weights = case_weights(contribution, markers, setting);

  Ranking out;
  out.frame_mismatch = layout.frame_mismatch;
  std::vector<int> sims(markers.size());
  for (auto s : layout.candidates) {
    const auto& sense = ve->senses[s];
    Interpretation interp;
    interp.sense = sense.sense;
    for (std::size_t i = 0; i < markers.size(); ++i) {
      const auto* set = sense.fillers(markers[i]);
      sims[i] = set ? max_sim(nouns[i], *set, thesaurus) : 0;
      interp.per_case_sim.emplace(std::string(markers[i]), sims[i]);
    }
    interp.score = weighted_score(sims, weights);
    out.ranked.push_back(std::move(interp));
  }
  std::stable_sort(out.ranked.begin(), out.ranked.end(),
                   [](const Interpretation& a, const Interpretation& b) { return a.score > b.score; });
  return out;
}

}  // namespace exsel

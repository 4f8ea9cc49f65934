#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "exsel/example_db.hpp"

namespace exsel {

/// How case contributions weight the per-case similarities.
///
/// `argmax_only` is the large-exponent limit: every case whose base equals
/// the largest base among the scored cases gets weight 1, the rest 0.
/// Otherwise each case is weighted by base^alpha.
struct CcdSetting {
  bool argmax_only = true;
  double alpha = 1.0;
};

/// Similarity threshold at which two fillers count as shared between senses.
inline constexpr int kShareThreshold = 9;

/// Size of a greedy one-to-one matching between the two multisets, taking
/// cross pairs with sim >= kShareThreshold in descending sim order (ties by
/// position). Symmetric and bounded by min(|a|, |b|).
std::size_t shared_count(const FillerSet& a, const FillerSet& b, const Thesaurus& thesaurus);

/// Pre-exponent CCD of `marker`: mean over sense pairs of
/// (|Ei|+|Ej|-2|Ei^Ej|)/(|Ei|+|Ej|), restricted to senses that subcategorize
/// the case. 1 when fewer than two senses do.
double ccd_base(const VerbEntry& verb, std::string_view marker, const Thesaurus& thesaurus);
double ccd(const VerbEntry& verb, std::string_view marker, double alpha, const Thesaurus& thesaurus);

/// CCD bases for every case of one verb, computed together so they can be
/// held fixed while the database changes.
class CaseContribution {
public:
  CaseContribution() = default;
  static CaseContribution compute(const VerbEntry& verb, const Thesaurus& thesaurus);

  /// 1 for a marker no two senses share.
  double base(std::string_view marker) const;
  const std::map<std::string, double, std::less<>>& bases() const noexcept { return bases_; }

private:
  std::map<std::string, double, std::less<>> bases_;
};

/// Max similarity between `noun` and any filler of `examples`. Throws Error
/// on an empty set.
int max_sim(const Term& noun, const FillerSet& examples, const Thesaurus& thesaurus);

/// Which senses compete for a sentence and over which cases they are scored.
struct CaseLayout {
  std::vector<std::size_t> candidates;    // sense indices, in database order
  std::vector<std::size_t> complements;   // indices into the sentence's complements
  bool frame_mismatch = false;
};

/// Senses whose frame lacks an input case are dropped. When that drops
/// every sense, all senses stay as candidates, the layout is flagged, and only
/// input cases subcategorized by some sense are scored (a sense lacking one
/// of those scores 0 there).
CaseLayout layout_for(const VerbEntry& verb, const SentenceExample& x);

std::vector<double> case_weights(const CaseContribution& contribution,
                                 std::span<const std::string_view> markers, const CcdSetting& setting);

/// Weighted mean of `sims`; a plain mean when the weights sum to zero.
double weighted_score(std::span<const int> sims, std::span<const double> weights);

struct Interpretation {
  std::string sense;
  double score = 0.0;
  std::map<std::string, int> per_case_sim;
};

struct Ranking {
  std::vector<Interpretation> ranked;  // descending score, ties in sense order
  bool frame_mismatch = false;

  const Interpretation& best() const { return ranked.front(); }
};

/// Ranks the senses of `x.verb` with CCD recomputed from `db`.
Ranking score_senses(const SentenceExample& x, const Database& db, const CcdSetting& setting);

/// Same, with case contributions supplied by the caller.
Ranking score_senses(const SentenceExample& x, const Database& db, const CcdSetting& setting,
                     const CaseContribution& contribution);

}  // namespace exsel

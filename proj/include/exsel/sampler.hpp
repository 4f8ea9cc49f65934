#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "exsel/disambiguator.hpp"
#include "exsel/example_db.hpp"

namespace exsel {

/// C(x) = lambda * S1 + (1 - lambda) * (S1 - S2).
constexpr double certainty(double s1, double s2, double lambda) noexcept {
  return lambda * s1 + (1.0 - lambda) * (s1 - s2);
}

struct SamplerParams {
  double lambda = 0.5;
  std::size_t k = 1;
  std::size_t batch_size = 1;
  CcdSetting ccd;
};

/// Cached per-sense scores of a fixed sentence set against a database.
///
/// Every row keeps the integer SIM of each (candidate sense, scored case)
/// cell. A commit to sense s only raises the cells of s by max, so the cache
/// is updated in one pass over the rows of the committed verb. Scores are
/// always recomputed from the cells with `weighted_score`, which makes them
/// bit-identical to a from-scratch evaluation under the same case weights.
class ScoreCache {
public:
  struct Row {
    std::size_t verb = 0;                 // index into Database::verbs()
    CaseLayout layout;
    std::vector<std::string> markers;     // scored cases, input order
    std::vector<Term> nouns;              // filler per scored case
    std::vector<int> cells;               // candidates x markers, row-major
    std::vector<double> weights;          // per scored case
    std::vector<double> scores;           // per candidate
    std::vector<int> position;            // sense index -> candidate slot, -1 if filtered
    std::size_t top = 0;                  // candidate slot of the best sense
    double s1 = 0.0, s2 = 0.0, certainty = 0.0;

    std::size_t case_count() const noexcept { return markers.size(); }
    int cell(std::size_t slot, std::size_t c) const { return cells[slot * markers.size() + c]; }
    std::size_t best_sense() const { return layout.candidates[top]; }
  };

  ScoreCache(const Database& db, std::vector<SentenceExample> examples,
             std::span<const CaseContribution> contributions, const CcdSetting& ccd, double lambda);

  /// Builds one row from scratch; shared by the cache and by hypothetical
  /// evaluations against a modified verb entry.
  static Row make_row(const VerbEntry& verb, std::size_t verb_index, const SentenceExample& x,
                      const Thesaurus& thesaurus, const CaseContribution& contribution,
                      const CcdSetting& ccd, double lambda);

  std::size_t size() const noexcept { return rows_.size(); }
  const SentenceExample& example(std::size_t i) const { return examples_[i]; }
  std::span<const SentenceExample> examples() const noexcept { return examples_; }
  const Row& row(std::size_t i) const { return rows_[i]; }

  /// Candidate sense indices of row i, best first (ties in sense order).
  std::vector<std::size_t> ranking(std::size_t i) const;

  /// Folds a committed sentence into every row of its verb. `x_nouns` are
  /// the resolved fillers of `x` in complement order.
  void apply_commit(const Database& db, const SentenceExample& x, std::span<const Term> x_nouns,
                    const CommitResult& commit, std::span<const CaseContribution> contributions);

  /// Recomputes weights and scores of every row of `verb` from its cells.
  void rescore_verb(std::size_t verb, const CaseContribution& contribution);

private:
  static void rescore_row(Row& row, const CaseContribution& contribution, const CcdSetting& ccd,
                          double lambda);
  static void refresh_top(Row& row, double lambda);

  std::vector<SentenceExample> examples_;
  std::vector<Row> rows_;
  std::vector<std::vector<std::size_t>> rows_by_verb_;
  CcdSetting ccd_;
  double lambda_;
};

/// Pool-based selective sampler over a training corpus S = X u T.
///
/// Holds the database, the pool X of unlabeled sentences, and score caches
/// for the pool and for any watched evaluation sets. Case contributions are
/// frozen between `refresh_ccd` calls, which is what keeps each commit an
/// O(N) cache update.
class Sampler {
public:
  Sampler(Database db, std::vector<SentenceExample> training, SamplerParams params);

  const Database& database() const noexcept { return db_; }
  const SamplerParams& params() const noexcept { return params_; }
  const ScoreCache& cache() const noexcept { return pool_cache_; }
  std::span<const CaseContribution> contributions() const noexcept { return contributions_; }

  std::size_t size() const noexcept { return pool_cache_.size(); }
  const SentenceExample& example(std::size_t i) const { return pool_cache_.example(i); }
  bool in_pool(std::size_t i) const { return in_pool_.at(i); }
  std::size_t pool_size() const noexcept { return pool_count_; }
  std::size_t labeled_size() const noexcept { return size() - pool_count_; }
  std::vector<std::size_t> pool() const;
  std::span<const std::pair<std::size_t, std::string>> labeled() const noexcept { return labeled_; }

  double certainty(std::size_t i) const { return pool_cache_.row(i).certainty; }

  /// The k best candidate senses of pool example x under the current scores.
  std::vector<std::size_t> k_best(std::size_t x) const;

  /// Certainty change of y if x were committed with `sense` (a sense index
  /// of x's verb), case contributions held fixed. Zero when y belongs to a
  /// different verb or the commit would be rejected by the frame policy.
  double delta_certainty(std::size_t x, std::size_t sense, std::size_t y) const;

  /// Sum over the pool of delta_certainty for one hypothetical label.
  double tuf_for_sense(std::size_t x, std::size_t sense) const;

  /// Mean of tuf_for_sense over the k best senses of x.
  double tuf(std::size_t x) const;

  /// Up to batch_size pool indices of maximal TUF, ties by lower certainty
  /// then corpus order. Empty once the pool is exhausted.
  std::vector<std::size_t> select_samples() const;

  /// Moves x from X to T, stores its fillers under `sense`, and updates
  /// cached scores of that sense only. Contributions stay frozen.
  void commit_and_update(std::size_t x, std::string_view sense);

  /// Recomputes case contributions of verbs committed to since the last
  /// refresh and rescores every cache from its cells.
  void refresh_ccd();

  /// commit_and_update for each pair, then refresh_ccd once.
  void label_batch(std::span<const std::pair<std::size_t, std::string>> labels);

  /// Marks x as labeled without touching the database. Used when resuming
  /// from a database that already holds x's fillers.
  void restore_labeled(std::size_t x, std::string sense);

  /// Keeps an extra sentence set scored against the evolving database.
  std::size_t watch(std::vector<SentenceExample> examples);
  const ScoreCache& watched(std::size_t handle) const { return watchers_.at(handle); }

private:
  double delta_fast(std::size_t x, std::size_t sense, std::size_t y) const;
  double delta_extended(const VerbEntry& hypothetical, std::size_t y) const;
  VerbEntry hypothetical_entry(std::size_t x, std::size_t sense) const;
  // nullopt when the frame policy would reject the commit; otherwise whether it extends the frame.
  std::optional<bool> commit_shape(std::size_t x, std::size_t sense) const;

  Database db_;
  SamplerParams params_;
  std::vector<CaseContribution> contributions_;
  ScoreCache pool_cache_;
  std::vector<ScoreCache> watchers_;
  std::vector<std::vector<Term>> nouns_;    // resolved complements per training sentence
  std::vector<bool> in_pool_;
  std::vector<std::vector<std::size_t>> pool_by_verb_;
  std::size_t pool_count_ = 0;
  std::vector<std::pair<std::size_t, std::string>> labeled_;
  std::vector<bool> dirty_verbs_;
};

}  // namespace exsel

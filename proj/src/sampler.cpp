#include "exsel/sampler.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <tuple>

namespace exsel {

namespace {

std::vector<CaseContribution> compute_contributions(const Database& db) {
  std::vector<CaseContribution> out;
  out.reserve(db.verbs().size());
  for (const auto& ve : db.verbs()) out.push_back(CaseContribution::compute(ve, db.thesaurus()));
  return out;
}

std::vector<SentenceExample> validated(const Database& db, const SamplerParams& params,
                                       std::vector<SentenceExample> training) {
  if (params.lambda < 0.0 || params.lambda > 1.0) throw Error("lambda must lie in [0, 1]");
  if (params.k == 0) throw Error("k must be at least 1");
  if (params.batch_size == 0) throw Error("batch size must be at least 1");
  if (!params.ccd.argmax_only && params.ccd.alpha < 0.0) throw Error("alpha must be non-negative");
  for (const auto& x : training) db.validate(x);
  return training;
}

std::vector<std::string_view> views(const std::vector<std::string>& markers) {
  return {markers.begin(), markers.end()};
}

}  // namespace

// ---------------------------------------------------------------------------
// ScoreCache

ScoreCache::ScoreCache(const Database& db, std::vector<SentenceExample> examples,
                       std::span<const CaseContribution> contributions, const CcdSetting& ccd, double lambda)
    : examples_(std::move(examples)), rows_by_verb_(db.verbs().size()), ccd_(ccd), lambda_(lambda) {
  rows_.reserve(examples_.size());
  for (std::size_t i = 0; i < examples_.size(); ++i) {
    const auto& x = examples_[i];
    auto vi = db.verb_index(x.verb);
    if (!vi) throw Error("sentence '" + x.id + "': verb '" + x.verb + "' has no database entry");
    rows_.push_back(make_row(db.verb(*vi), *vi, x, db.thesaurus(), contributions[*vi], ccd_, lambda_));
    rows_by_verb_[*vi].push_back(i);
  }
}

ScoreCache::Row ScoreCache::make_row(const VerbEntry& verb, std::size_t verb_index, const SentenceExample& x,
                                     const Thesaurus& thesaurus, const CaseContribution& contribution,
                                     const CcdSetting& ccd, double lambda) {
  Row row;
  row.verb = verb_index;
  row.layout = layout_for(verb, x);
  for (auto c : row.layout.complements) {
    row.markers.push_back(x.complements[c].marker);
    row.nouns.push_back(thesaurus.resolve(x.complements[c].noun));
  }
  const auto m = row.markers.size();
  row.cells.assign(row.layout.candidates.size() * m, 0);
  row.position.assign(verb.senses.size(), -1);
  for (std::size_t slot = 0; slot < row.layout.candidates.size(); ++slot) {
    const auto& sense = verb.senses[row.layout.candidates[slot]];
    row.position[row.layout.candidates[slot]] = static_cast<int>(slot);
    for (std::size_t c = 0; c < m; ++c) {
      const auto* set = sense.fillers(row.markers[c]);
      row.cells[slot * m + c] = set ? max_sim(row.nouns[c], *set, thesaurus) : 0;
    }
  }
  row.scores.assign(row.layout.candidates.size(), 0.0);
  rescore_row(row, contribution, ccd, lambda);
  return row;
}

void ScoreCache::rescore_row(Row& row, const CaseContribution& contribution, const CcdSetting& ccd,
                             double lambda) {
  auto markers = views(row.markers);
  row.weights = case_weights(contribution, markers, ccd);
  const auto m = row.markers.size();
  for (std::size_t slot = 0; slot < row.scores.size(); ++slot)
    row.scores[slot] = weighted_score(std::span<const int>(row.cells).subspan(slot * m, m), row.weights);
  refresh_top(row, lambda);
}

void ScoreCache::refresh_top(Row& row, double lambda) {
  row.top = 0;
  for (std::size_t slot = 1; slot < row.scores.size(); ++slot)
    if (row.scores[slot] > row.scores[row.top]) row.top = slot;
  row.s1 = row.scores.empty() ? 0.0 : row.scores[row.top];
  row.s2 = 0.0;
  bool have_second = false;
  for (std::size_t slot = 0; slot < row.scores.size(); ++slot) {
    if (slot == row.top) continue;
    if (!have_second || row.scores[slot] > row.s2) row.s2 = row.scores[slot];
    have_second = true;
  }
  row.certainty = certainty(row.s1, row.s2, lambda);
}

std::vector<std::size_t> ScoreCache::ranking(std::size_t i) const {
  const auto& row = rows_[i];
  std::vector<std::size_t> slots(row.scores.size());
  std::iota(slots.begin(), slots.end(), 0);
  std::stable_sort(slots.begin(), slots.end(),
                   [&](std::size_t a, std::size_t b) { return row.scores[a] > row.scores[b]; });
  for (auto& s : slots) s = row.layout.candidates[s];
  return slots;
}

void ScoreCache::apply_commit(const Database& db, const SentenceExample& x, std::span<const Term> x_nouns,
                              const CommitResult& commit, std::span<const CaseContribution> contributions) {
  if (commit.verb_index >= rows_by_verb_.size()) return;
  const auto& thesaurus = db.thesaurus();
  for (auto i : rows_by_verb_[commit.verb_index]) {
    auto& row = rows_[i];
    if (commit.frame_extended) {
      // The candidate set itself may change; rebuild under the frozen weights.
      row = make_row(db.verb(commit.verb_index), commit.verb_index, examples_[i], thesaurus,
                     contributions[commit.verb_index], ccd_, lambda_);
      continue;
    }
    int slot = row.position[commit.sense_index];
    if (slot < 0) continue;
    const auto m = row.markers.size();
    bool changed = false;
    for (std::size_t c = 0; c < m; ++c) {
      for (std::size_t j = 0; j < x.complements.size(); ++j) {
        if (x.complements[j].marker != row.markers[c]) continue;
        int s = thesaurus.sim(row.nouns[c], x_nouns[j]);
        int& cell = row.cells[static_cast<std::size_t>(slot) * m + c];
        if (s > cell) {
          cell = s;
          changed = true;
        }
        break;
      }
    }
    if (!changed) continue;
    row.scores[slot] =
        weighted_score(std::span<const int>(row.cells).subspan(static_cast<std::size_t>(slot) * m, m), row.weights);
    refresh_top(row, lambda_);
  }
}

void ScoreCache::rescore_verb(std::size_t verb, const CaseContribution& contribution) {
  for (auto i : rows_by_verb_.at(verb)) rescore_row(rows_[i], contribution, ccd_, lambda_);
}

// ---------------------------------------------------------------------------
// Sampler

Sampler::Sampler(Database db, std::vector<SentenceExample> training, SamplerParams params)
    : db_(std::move(db)),
      params_(params),
      contributions_(compute_contributions(db_)),
      pool_cache_(db_, validated(db_, params, std::move(training)), contributions_, params.ccd, params.lambda),
      in_pool_(pool_cache_.size(), true),
      pool_by_verb_(db_.verbs().size()),
      pool_count_(pool_cache_.size()),
      dirty_verbs_(db_.verbs().size(), false) {
  nouns_.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) {
    const auto& x = example(i);
    auto& nouns = nouns_.emplace_back();
    for (const auto& c : x.complements) nouns.push_back(db_.thesaurus().resolve(c.noun));
    pool_by_verb_[pool_cache_.row(i).verb].push_back(i);
  }
}

std::vector<std::size_t> Sampler::pool() const {
  std::vector<std::size_t> out;
  out.reserve(pool_count_);
  for (std::size_t i = 0; i < size(); ++i)
    if (in_pool_[i]) out.push_back(i);
  return out;
}

std::vector<std::size_t> Sampler::k_best(std::size_t x) const {
  auto ranked = pool_cache_.ranking(x);
  if (ranked.size() > params_.k) ranked.resize(params_.k);
  return ranked;
}

std::optional<bool> Sampler::commit_shape(std::size_t x, std::size_t sense) const {
  const auto& ve = db_.verb(pool_cache_.row(x).verb);
  const auto& entry = ve.senses.at(sense);
  bool extends = false;
  for (const auto& c : example(x).complements)
    if (!entry.has_case(c.marker)) extends = true;
  if (extends && db_.policy() == FramePolicy::Reject) return std::nullopt;
  return extends;
}

double Sampler::delta_fast(std::size_t x, std::size_t sense, std::size_t y) const {
  const auto& row = pool_cache_.row(y);
  int slot = row.position[sense];
  if (slot < 0) return 0.0;

  const auto& xs = example(x);
  const auto& x_nouns = nouns_[x];
  const auto& thesaurus = db_.thesaurus();
  const auto m = row.markers.size();

  std::array<int, 16> small{};
  std::vector<int> large;
  std::span<int> cells;
  if (m <= small.size()) {
    cells = std::span<int>(small.data(), m);
  } else {
    large.resize(m);
    cells = large;
  }
  bool changed = false;
  for (std::size_t c = 0; c < m; ++c) {
    int cell = row.cell(static_cast<std::size_t>(slot), c);
    for (std::size_t j = 0; j < xs.complements.size(); ++j) {
      if (xs.complements[j].marker != row.markers[c]) continue;
      int s = thesaurus.sim(row.nouns[c], x_nouns[j]);
      if (s > cell) {
        cell = s;
        changed = true;
      }
      break;
    }
    cells[c] = cell;
  }
  if (!changed) return 0.0;

  // Cells only grow, so the new score is >= the cached one and the top two
  // follow without rescanning the other senses.
  double score = weighted_score(cells, row.weights);
  double s1, s2;
  if (static_cast<std::size_t>(slot) == row.top) {
    s1 = score;
    s2 = row.s2;
  } else if (score > row.s1) {
    s1 = score;
    s2 = row.s1;
  } else {
    s1 = row.s1;
    s2 = std::max(row.s2, score);
  }
  return exsel::certainty(s1, s2, params_.lambda) - row.certainty;
}

VerbEntry Sampler::hypothetical_entry(std::size_t x, std::size_t sense) const {
  VerbEntry entry = db_.verb(pool_cache_.row(x).verb);
  auto& target = entry.senses.at(sense);
  const auto& xs = example(x);
  for (std::size_t j = 0; j < xs.complements.size(); ++j) target.frame[xs.complements[j].marker].add(nouns_[x][j]);
  return entry;
}

double Sampler::delta_extended(const VerbEntry& hypothetical, std::size_t y) const {
  const auto& row = pool_cache_.row(y);
  auto after = ScoreCache::make_row(hypothetical, row.verb, example(y), db_.thesaurus(), contributions_[row.verb],
                                    params_.ccd, params_.lambda);
  return after.certainty - row.certainty;
}

double Sampler::delta_certainty(std::size_t x, std::size_t sense, std::size_t y) const {
  if (pool_cache_.row(x).verb != pool_cache_.row(y).verb) return 0.0;
  auto shape = commit_shape(x, sense);
  if (!shape) return 0.0;
  if (*shape) return delta_extended(hypothetical_entry(x, sense), y);
  return delta_fast(x, sense, y);
}

double Sampler::tuf_for_sense(std::size_t x, std::size_t sense) const {
  auto shape = commit_shape(x, sense);
  if (!shape) return 0.0;
  const auto& group = pool_by_verb_[pool_cache_.row(x).verb];
  double total = 0.0;
  if (*shape) {
    auto entry = hypothetical_entry(x, sense);
    for (auto y : group) total += delta_extended(entry, y);
  } else {
    for (auto y : group) total += delta_fast(x, sense, y);
  }
  return total;
}

double Sampler::tuf(std::size_t x) const {
  auto senses = k_best(x);
  if (senses.empty()) return 0.0;
  double total = 0.0;
  for (auto s : senses) total += tuf_for_sense(x, s);
  return total / static_cast<double>(senses.size());
}

std::vector<std::size_t> Sampler::select_samples() const {
  struct Candidate {
    double utility;
    double certainty;
    std::size_t index;
  };
  std::vector<Candidate> candidates;
  candidates.reserve(pool_count_);
  for (std::size_t i = 0; i < size(); ++i)
    if (in_pool_[i]) candidates.push_back({tuf(i), certainty(i), i});

  auto batch = std::min(params_.batch_size, candidates.size());
  auto better = [](const Candidate& a, const Candidate& b) {
    if (a.utility != b.utility) return a.utility > b.utility;
    if (a.certainty != b.certainty) return a.certainty < b.certainty;
    return a.index < b.index;
  };
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(batch), candidates.end(),
                    better);
  std::vector<std::size_t> out;
  out.reserve(batch);
  for (std::size_t i = 0; i < batch; ++i) out.push_back(candidates[i].index);
  return out;
}

void Sampler::commit_and_update(std::size_t x, std::string_view sense) {
  if (x >= size() || !in_pool_[x]) throw Error("example " + std::to_string(x) + " is not in the pool");
  const auto& xs = example(x);
  auto result = db_.commit(xs, sense);

  pool_cache_.apply_commit(db_, xs, nouns_[x], result, contributions_);
  for (auto& w : watchers_) w.apply_commit(db_, xs, nouns_[x], result, contributions_);
  dirty_verbs_[result.verb_index] = true;

  in_pool_[x] = false;
  --pool_count_;
  auto& group = pool_by_verb_[result.verb_index];
  group.erase(std::find(group.begin(), group.end(), x));
  labeled_.emplace_back(x, std::string(sense));
}

void Sampler::refresh_ccd() {
  for (std::size_t v = 0; v < dirty_verbs_.size(); ++v) {
    if (!dirty_verbs_[v]) continue;
    dirty_verbs_[v] = false;
    contributions_[v] = CaseContribution::compute(db_.verb(v), db_.thesaurus());
    pool_cache_.rescore_verb(v, contributions_[v]);
    for (auto& w : watchers_) w.rescore_verb(v, contributions_[v]);
  }
}

void Sampler::label_batch(std::span<const std::pair<std::size_t, std::string>> labels) {
  for (const auto& [x, sense] : labels) commit_and_update(x, sense);
  refresh_ccd();
}

void Sampler::restore_labeled(std::size_t x, std::string sense) {
  if (x >= size() || !in_pool_[x]) throw Error("example " + std::to_string(x) + " is not in the pool");
  in_pool_[x] = false;
  --pool_count_;
  auto& group = pool_by_verb_[pool_cache_.row(x).verb];
  group.erase(std::find(group.begin(), group.end(), x));
  labeled_.emplace_back(x, std::move(sense));
}

std::size_t Sampler::watch(std::vector<SentenceExample> examples) {
  for (const auto& x : examples) db_.validate(x);
  watchers_.emplace_back(db_, std::move(examples), contributions_, params_.ccd, params_.lambda);
  return watchers_.size() - 1;
}

}  // namespace exsel

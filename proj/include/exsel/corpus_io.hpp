#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "exsel/example_db.hpp"

namespace exsel {

struct CorpusParseResult {
  std::vector<SentenceExample> examples;
  std::vector<std::size_t> lines;          // source line of each example
  std::size_t skipped_unknown_verb = 0;
  std::vector<std::string> warnings;
};

/// Reads corpus JSONL: `{"id":..,"verb":..,"complements":[["ga","noun"],..],"gold":..}`.
/// Schema violations throw ParseError with the line number. With a database,
/// sentences of unknown verbs are skipped with a warning and every other
/// sentence is validated against it.
CorpusParseResult parse_corpus(std::istream& in, const Database* db = nullptr);
CorpusParseResult load_corpus(const std::string& path, const Database* db = nullptr);
void write_corpus(std::ostream& out, std::span<const SentenceExample> corpus);

/// Shape of one generated verb.
struct VerbShape {
  std::string name;
  std::size_t senses = 2;
  std::size_t sentences = 100;
};

/// Parameters of the synthetic benchmark generator.
///
/// The thesaurus is a complete `branching`-ary tree of uniform `depth`. Each
/// sense draws its fillers, per case, from `modes_per_sense` subtrees of
/// height `cluster_spread`. Case i shares a mode with an earlier sense with
/// probability overlap * overlap_decay^i, so the first case (nominative-like)
/// overlaps most and later cases separate senses better.
struct SyntheticSpec {
  std::vector<VerbShape> verbs;
  std::vector<std::string> cases{"ga", "o", "ni"};
  int depth = 6;
  int branching = 4;
  int cluster_spread = 2;
  std::size_t modes_per_sense = 3;
  double overlap = 0.8;
  double overlap_decay = 0.25;
  double seed_fillers_mean = 3.7;
  double case_presence = 0.8;   // chance a sentence fills each case of its frame
  double frame_drop = 0.15;     // chance a sense lacks a non-first case
  double sense_skew = 1.0;      // Zipf exponent of the gold sense distribution
  std::uint64_t rng_seed = 1;

  /// Ten verbs sized like the evaluation corpus: 1111 sentences, 2 to 29 senses.
  static SyntheticSpec standard(std::uint64_t rng_seed);

  /// Accepts {"verbs": N | [{"name","senses","sentences"}..], "senses_per_verb",
  /// "sentences", "cases", "cluster_spread", "overlap", "rng_seed", ...} or
  /// {"preset": "standard", "rng_seed": ..}. Unknown keys are an error.
  static SyntheticSpec from_json_text(const std::string& text);
  static SyntheticSpec load_file(const std::string& path);
  std::string to_json_text() const;

  double case_overlap(std::size_t case_index) const;
  void validate() const;
};

/// Ground truth of one generated sense: per case, the mode subtrees its
/// fillers come from (indices of depth-(depth - cluster_spread) nodes).
struct SenseClusters {
  std::string verb;
  std::string sense;
  std::map<std::string, std::vector<std::size_t>> modes;
};

struct SyntheticBenchmark {
  SyntheticSpec spec;
  std::shared_ptr<const Thesaurus> thesaurus;
  Database seeds;
  std::vector<SentenceExample> corpus;
  std::vector<SenseClusters> clusters;

  /// Mode subtree containing a generated word.
  std::size_t mode_of(const std::string& word) const;
  const SenseClusters& clusters_of(const std::string& verb, const std::string& sense) const;

  /// Writes thesaurus.jsonl, seeds.jsonl, corpus.jsonl and spec.json.
  void write(const std::string& out_dir) const;
};

/// Throws Error for an ill-formed or infeasible spec (more distinct modes
/// per case than the tree offers).
SyntheticBenchmark generate_synthetic(const SyntheticSpec& spec);

}  // namespace exsel

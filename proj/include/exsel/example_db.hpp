#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "exsel/thesaurus.hpp"

namespace exsel {

/// Multiset of example case fillers, kept sorted by word so every derived
/// quantity is independent of insertion order.
class FillerSet {
public:
  FillerSet() = default;

  void add(Term t);
  std::span<const Term> items() const noexcept { return items_; }
  std::size_t size() const noexcept { return items_.size(); }
  bool empty() const noexcept { return items_.empty(); }

  friend bool operator==(const FillerSet&, const FillerSet&) = default;

private:
  std::vector<Term> items_;
};

/// One verb sense and its case frame. A marker absent from `frame` is not
/// subcategorized by the sense.
struct SenseEntry {
  std::string verb;
  std::string sense;
  std::string gloss;
  std::map<std::string, FillerSet> frame;

  bool has_case(std::string_view marker) const { return frame.find(std::string(marker)) != frame.end(); }
  const FillerSet* fillers(std::string_view marker) const {
    auto it = frame.find(std::string(marker));
    return it == frame.end() ? nullptr : &it->second;
  }
};

struct VerbEntry {
  std::string verb;
  std::vector<SenseEntry> senses;  // load order; also the stable tie-break order

  std::optional<std::size_t> sense_index(std::string_view sense) const;
};

struct Complement {
  std::string marker;
  std::string noun;
  friend bool operator==(const Complement&, const Complement&) = default;
};

/// One corpus sentence, pre-segmented into complements.
struct SentenceExample {
  std::string id;
  std::string verb;
  std::vector<Complement> complements;
  std::optional<std::string> gold;

  const Complement* complement(std::string_view marker) const {
    for (const auto& c : complements)
      if (c.marker == marker) return &c;
    return nullptr;
  }
  friend bool operator==(const SentenceExample&, const SentenceExample&) = default;
};

/// What to do when a committed sentence carries a case its sense does not
/// subcategorize.
enum class FramePolicy { Reject, Extend };

struct CommitResult {
  std::size_t verb_index = 0;
  std::size_t sense_index = 0;
  bool frame_extended = false;
};

/// Per-verb sense entries with their example filler multisets.
///
/// Single writer. Readers that need a stable view across several calls hold
/// a copy or observe `version()`.
class Database {
public:
  explicit Database(std::shared_ptr<const Thesaurus> thesaurus,
                    FramePolicy policy = FramePolicy::Reject);

  /// Seed/database JSONL: `{"verb":..,"sense":..,"gloss":..,"frame":{"ga":[..]}}`.
  static Database load_jsonl(std::istream& in, std::shared_ptr<const Thesaurus> thesaurus,
                             FramePolicy policy = FramePolicy::Reject);
  static Database load_file(const std::string& path, std::shared_ptr<const Thesaurus> thesaurus,
                            FramePolicy policy = FramePolicy::Reject);
  void save_jsonl(std::ostream& out) const;

  /// Adds a sense in raw form; words are resolved against the thesaurus.
  void add_sense(std::string_view verb, std::string_view sense, std::string_view gloss,
                 const std::map<std::string, std::vector<std::string>>& frame);

  /// Stores the complements of `x` under `sense`. Throws Error for an unknown
  /// verb or sense, and for an unsubcategorized case under FramePolicy::Reject.
  CommitResult commit(const SentenceExample& x, std::string_view sense);

  /// Throws Error when `x` is not a valid input for this database (unknown
  /// verb, no complements, duplicate markers, or a gold label naming no sense).
  void validate(const SentenceExample& x) const;

  const VerbEntry* find_verb(std::string_view verb) const;
  std::optional<std::size_t> verb_index(std::string_view verb) const;
  const VerbEntry& verb(std::size_t i) const { return verbs_[i]; }
  std::span<const VerbEntry> verbs() const noexcept { return verbs_; }

  const Thesaurus& thesaurus() const noexcept { return *thesaurus_; }
  const std::shared_ptr<const Thesaurus>& thesaurus_ptr() const noexcept { return thesaurus_; }
  FramePolicy policy() const noexcept { return policy_; }
  void set_policy(FramePolicy p) noexcept { policy_ = p; }

  /// Bumped by every mutation.
  std::uint64_t version() const noexcept { return version_; }

  std::size_t sense_count() const;
  std::size_t filler_count() const;
  std::size_t case_count() const;
  double mean_fillers_per_case() const;

  /// Extracts the entries of a single verb into a new database. Throws Error
  /// for an unknown verb.
  Database restricted_to(std::string_view verb) const;

  friend bool operator==(const Database& a, const Database& b);

private:
  std::shared_ptr<const Thesaurus> thesaurus_;
  FramePolicy policy_;
  std::vector<VerbEntry> verbs_;
  std::unordered_map<std::string, std::size_t> verb_lookup_;
  std::uint64_t version_ = 0;
};

}  // namespace exsel

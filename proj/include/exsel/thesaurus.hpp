#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace exsel {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file. Carries the 1-based line number when known.
class ParseError : public Error {
public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// Similarity degree for a leaf-to-leaf path length, following the step
/// table 0->11, 2->10, 4->9, 6->8, 8->7, 10->5, >=12->0. Odd lengths cannot
/// occur in a uniform-depth tree; they round down to the next even entry.
constexpr int sim_from_length(int len) noexcept {
  constexpr int table[] = {11, 10, 9, 8, 7, 5};
  if (len < 0) return 0;
  if (len >= 12) return 0;
  return table[len / 2];
}

inline constexpr int kMaxSim = 11;

/// A word together with its leaf in the thesaurus (-1 when unknown).
/// Resolving once keeps the inner similarity loops free of hashing.
struct Term {
  std::string word;
  std::int32_t leaf = -1;

  bool known() const noexcept { return leaf >= 0; }
  friend bool operator==(const Term& a, const Term& b) { return a.word == b.word; }
  friend auto operator<=>(const Term& a, const Term& b) { return a.word <=> b.word; }
};

/// Uniform-depth rooted tree whose leaves are words.
///
/// Built through `Builder` or `load_jsonl`; immutable afterwards, so a single
/// instance may be shared by any number of reader threads.
class Thesaurus {
public:
  struct NodeRecord {
    std::string id;
    std::vector<std::string> children;
    std::optional<std::string> word;
  };

  /// Validates and links a set of node records. Throws ParseError when the
  /// records do not form a single connected, acyclic, uniform-depth tree
  /// with one leaf per word.
  static Thesaurus from_records(std::vector<NodeRecord> records);

  /// JSONL adjacency: `{"id":..,"children":[..]}` per internal node and
  /// `{"id":..,"word":..}` per leaf.
  static Thesaurus load_jsonl(std::istream& in);
  static Thesaurus load_file(const std::string& path);
  void save_jsonl(std::ostream& out) const;

  int depth() const noexcept { return depth_; }
  std::size_t leaf_count() const noexcept { return leaves_.size(); }
  std::size_t node_count() const noexcept { return nodes_.size(); }
  const std::string& leaf_word(std::int32_t leaf) const { return nodes_[leaves_[leaf]].word; }
  bool contains(std::string_view word) const { return find_leaf(word) >= 0; }

  std::int32_t find_leaf(std::string_view word) const;
  Term resolve(std::string_view word) const { return Term{std::string(word), find_leaf(word)}; }

  /// Edge count between two leaves; nullopt when either word is unknown.
  std::optional<int> path_length(std::string_view a, std::string_view b) const;
  int path_length(std::int32_t leaf_a, std::int32_t leaf_b) const noexcept;

  /// Total similarity. Identical strings score 11 even when unknown; an
  /// unknown word scores 0 against any different word.
  int sim(std::string_view a, std::string_view b) const;
  int sim(const Term& a, const Term& b) const noexcept {
    if (a.known() && b.known()) return sim_from_length(path_length(a.leaf, b.leaf));
    return a.word == b.word ? kMaxSim : 0;
  }

private:
  struct Node {
    std::string id;
    std::string word;
    std::int32_t parent = -1;
    int depth = 0;
    std::vector<std::int32_t> children;
  };

  std::vector<Node> nodes_;
  std::vector<std::int32_t> leaves_;         // leaf index -> node index
  std::vector<std::int32_t> ancestors_;      // leaf-major, (depth_+1) entries each, root first
  std::unordered_map<std::string, std::int32_t> leaf_index_;
  std::int32_t root_ = -1;
  int depth_ = 0;
};

}  // namespace exsel

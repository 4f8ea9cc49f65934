#pragma once

// Random and hand-built instances shared by the unit and acceptance tests.

#include <algorithm>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "exsel/example_db.hpp"
#include "exsel/thesaurus.hpp"

namespace fixtures {

using Rng = std::mt19937_64;

inline std::size_t pick(Rng& rng, std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }
inline bool chance(Rng& rng, double p) { return std::uniform_real_distribution<double>(0, 1)(rng) < p; }

struct World {
  std::shared_ptr<const exsel::Thesaurus> thesaurus;
  std::vector<std::string> words;
};

/// Uniform-depth tree with `leaves` leaves: start from one root-to-leaf
/// chain, then repeatedly hang a new chain under a random internal node.
inline World random_tree(Rng& rng, std::size_t leaves, int depth) {
  struct N {
    int depth;
    std::vector<std::string> children;
    std::string word;
  };
  std::vector<std::string> ids{"r"};
  std::map<std::string, N> nodes{{"r", {0, {}, {}}}};
  std::vector<std::string> internal{"r"};
  std::vector<std::string> words;
  auto chain = [&](std::string parent) {
    for (int d = nodes[parent].depth + 1; d <= depth; ++d) {
      std::string id = "n" + std::to_string(ids.size());
      ids.push_back(id);
      nodes[parent].children.push_back(id);
      nodes[id] = {d, {}, {}};
      if (d == depth) {
        nodes[id].word = "w" + std::to_string(words.size());
        words.push_back(nodes[id].word);
      } else {
        internal.push_back(id);
      }
      parent = id;
    }
  };
  chain("r");
  while (words.size() < leaves) chain(internal[pick(rng, internal.size())]);

  std::vector<exsel::Thesaurus::NodeRecord> records;
  for (const auto& id : ids) {
    exsel::Thesaurus::NodeRecord r;
    r.id = id;
    r.children = nodes[id].children;
    if (!nodes[id].word.empty()) r.word = nodes[id].word;
    records.push_back(std::move(r));
  }
  std::shuffle(records.begin(), records.end(), rng);
  return {std::make_shared<const exsel::Thesaurus>(exsel::Thesaurus::from_records(std::move(records))), words};
}

inline const std::vector<std::string>& markers() {
  static const std::vector<std::string> m{"ga", "o", "ni", "de"};
  return m;
}

/// Word drawn from the tree, or (rarely) an out-of-vocabulary token.
inline std::string random_word(Rng& rng, const World& w, double unknown = 0.03) {
  if (chance(rng, unknown)) return "oov" + std::to_string(pick(rng, 5));
  return w.words[pick(rng, w.words.size())];
}

inline exsel::Database random_db(Rng& rng, const World& w, std::size_t verbs, std::size_t max_senses,
                                 exsel::FramePolicy policy = exsel::FramePolicy::Reject) {
  exsel::Database db(w.thesaurus, policy);
  for (std::size_t v = 0; v < verbs; ++v) {
    auto senses = 1 + pick(rng, max_senses);
    for (std::size_t s = 0; s < senses; ++s) {
      std::map<std::string, std::vector<std::string>> frame;
      for (const auto& m : markers())
        if (m == "ga" ? chance(rng, 0.9) : chance(rng, 0.5)) {
          auto n = 1 + pick(rng, 4);
          for (std::size_t i = 0; i < n; ++i) frame[m].push_back(random_word(rng, w));
        }
      if (frame.empty()) frame["o"].push_back(random_word(rng, w));
      db.add_sense("v" + std::to_string(v), "v" + std::to_string(v) + "." + std::to_string(s), "", frame);
    }
  }
  return db;
}

/// Sentences whose cases mostly come from their gold sense's frame; with
/// probability `stray` a case no sense of the gold sense has is added.
inline std::vector<exsel::SentenceExample> random_corpus(Rng& rng, const World& w, const exsel::Database& db,
                                                         std::size_t n, double stray = 0.1) {
  std::vector<exsel::SentenceExample> out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& verb = db.verb(pick(rng, db.verbs().size()));
    const auto& sense = verb.senses[pick(rng, verb.senses.size())];
    exsel::SentenceExample x;
    x.id = "s" + std::to_string(i);
    x.verb = verb.verb;
    x.gold = sense.sense;
    for (const auto& [m, _] : sense.frame)
      if (chance(rng, 0.7)) x.complements.push_back({m, random_word(rng, w)});
    if (x.complements.empty()) x.complements.push_back({sense.frame.begin()->first, random_word(rng, w)});
    if (chance(rng, stray)) {
      for (const auto& m : markers())
        if (!sense.has_case(m)) {
          x.complements.push_back({m, random_word(rng, w)});
          break;
        }
    }
    std::shuffle(x.complements.begin(), x.complements.end(), rng);
    out.push_back(std::move(x));
  }
  return out;
}

/// Senses of x's verb that accept a commit of x under the database policy.
inline std::vector<std::string> admissible_senses(const exsel::Database& db, const exsel::SentenceExample& x) {
  std::vector<std::string> out;
  for (const auto& s : db.find_verb(x.verb)->senses) {
    bool ok = db.policy() == exsel::FramePolicy::Extend;
    if (!ok) {
      ok = true;
      for (const auto& c : x.complements)
        if (!s.has_case(c.marker)) ok = false;
    }
    if (ok) out.push_back(s.sense);
  }
  return out;
}

/// Balanced binary tree of the given depth with words "a0", "a1", ... at
/// the leaves in left-to-right order, so leaf i and leaf j are 2*h apart
/// where h is the height of their lowest common ancestor.
inline std::shared_ptr<const exsel::Thesaurus> binary_tree(int depth, const std::string& prefix = "a") {
  std::vector<exsel::Thesaurus::NodeRecord> records;
  std::size_t width = 1;
  for (int d = 0; d < depth; ++d, width *= 2)
    for (std::size_t i = 0; i < width; ++i) {
      exsel::Thesaurus::NodeRecord r;
      r.id = "d" + std::to_string(d) + "_" + std::to_string(i);
      for (std::size_t c = 0; c < 2; ++c)
        r.children.push_back("d" + std::to_string(d + 1) + "_" + std::to_string(2 * i + c));
      records.push_back(std::move(r));
    }
  for (std::size_t i = 0; i < width; ++i) {
    exsel::Thesaurus::NodeRecord r;
    r.id = "d" + std::to_string(depth) + "_" + std::to_string(i);
    r.word = prefix + std::to_string(i);
    records.push_back(std::move(r));
  }
  return std::make_shared<const exsel::Thesaurus>(exsel::Thesaurus::from_records(std::move(records)));
}

inline exsel::SentenceExample sentence(std::string id, std::string verb,
                                       std::vector<exsel::Complement> complements,
                                       std::optional<std::string> gold = std::nullopt) {
  return {std::move(id), std::move(verb), std::move(complements), std::move(gold)};
}

}  // namespace fixtures

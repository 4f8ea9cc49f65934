#include <algorithm>
#include <map>
#include <set>

#include "doctest.h"
#include "exsel/sampler.hpp"
#include "fixtures.hpp"
#include "oracle.hpp"

using namespace exsel;

namespace {

// Scores of every candidate of row i, keyed by sense name.
std::map<std::string, double> cached_scores(const Sampler& s, std::size_t i) {
  const auto& row = s.cache().row(i);
  const auto& verb = s.database().verb(row.verb);
  std::map<std::string, double> out;
  for (std::size_t slot = 0; slot < row.scores.size(); ++slot)
    out[verb.senses[row.layout.candidates[slot]].sense] = row.scores[slot];
  return out;
}

std::map<std::string, double> fresh_scores(const Ranking& r) {
  std::map<std::string, double> out;
  for (const auto& i : r.ranked) out[i.sense] = i.score;
  return out;
}

// Exact comparison of the cache against a from-scratch evaluation under the
// sampler's current (possibly frozen) case contributions.
void require_cache_exact(const Sampler& s) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto& x = s.example(i);
    const auto& row = s.cache().row(i);
    auto r = score_senses(x, s.database(), s.params().ccd, s.contributions()[row.verb]);
    REQUIRE(cached_scores(s, i) == fresh_scores(r));
    double s1 = r.ranked[0].score, s2 = r.ranked.size() > 1 ? r.ranked[1].score : 0.0;
    REQUIRE(row.s1 == s1);
    REQUIRE(row.s2 == s2);
    REQUIRE(row.certainty == certainty(s1, s2, s.params().lambda));
    REQUIRE(row.layout.frame_mismatch == r.frame_mismatch);
  }
}

struct RandomState {
  fixtures::World world;
  std::unique_ptr<Sampler> sampler;
  std::vector<SentenceExample> corpus;
};

RandomState random_state(fixtures::Rng& rng, FramePolicy policy, SamplerParams params) {
  RandomState st;
  st.world = fixtures::random_tree(rng, 60, 5);
  auto db = fixtures::random_db(rng, st.world, 2, 4, policy);
  st.corpus = fixtures::random_corpus(rng, st.world, db, 10 + fixtures::pick(rng, 20));
  st.sampler = std::make_unique<Sampler>(db, st.corpus, params);
  auto rounds = fixtures::pick(rng, 4);
  for (std::size_t r = 0; r < rounds && st.sampler->pool_size() > 1; ++r) {
    std::vector<std::pair<std::size_t, std::string>> batch;
    auto pool = st.sampler->pool();
    std::shuffle(pool.begin(), pool.end(), rng);
    for (std::size_t j = 0; j < std::min<std::size_t>(pool.size() - 1, 1 + fixtures::pick(rng, 3)); ++j) {
      auto senses = fixtures::admissible_senses(st.sampler->database(), st.sampler->example(pool[j]));
      if (senses.empty()) continue;
      batch.emplace_back(pool[j], senses[fixtures::pick(rng, senses.size())]);
    }
    st.sampler->label_batch(batch);
  }
  return st;
}

std::vector<SentenceExample> pool_examples(const Sampler& s) {
  std::vector<SentenceExample> out;
  for (auto i : s.pool()) out.push_back(s.example(i));
  return out;
}

// Two senses of one verb on a depth-6 binary tree, seeded far apart.
Database two_poles() {
  Database db(fixtures::binary_tree(6));
  db.add_sense("v", "v.1", "", {{"ga", {"a0"}}});
  db.add_sense("v", "v.2", "", {{"ga", {"a63"}}});
  return db;
}

std::vector<SentenceExample> on_leaves(std::initializer_list<int> leaves) {
  std::vector<SentenceExample> out;
  for (int l : leaves) out.push_back(fixtures::sentence("x" + std::to_string(l), "v", {{"ga", "a" + std::to_string(l)}}));
  return out;
}

std::size_t index_of(const Sampler& s, const std::string& id) {
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s.example(i).id == id) return i;
  throw Error("no such example");
}

}  // namespace

TEST_CASE("certainty examples") {
  for (double lambda : {0.0, 0.25, 0.5, 1.0}) CHECK(certainty(11, 0, lambda) == 11.0);
  CHECK(certainty(7, 7, 0.0) == 0.0);
  CHECK(certainty(8, 6, 0.5) == 5.0);
}

TEST_CASE("parameter validation") {
  auto db = two_poles();
  CHECK_THROWS_AS(Sampler(db, {}, {1.5, 1, 1, {}}), Error);
  CHECK_THROWS_AS(Sampler(db, {}, {0.5, 0, 1, {}}), Error);
  CHECK_THROWS_AS(Sampler(db, {}, {0.5, 1, 0, {}}), Error);
  CHECK_THROWS_AS(Sampler(db, {}, {0.5, 1, 1, {false, -1.0}}), Error);
  CHECK_THROWS_AS(Sampler(db, on_leaves({1}) /*valid*/, {0.5, 1, 1, {}}).commit_and_update(5, "v.1"), Error);
}

TEST_CASE("certainty change from distant and identical fillers") {
  Sampler s(two_poles(), on_leaves({2, 40}), {});
  auto x = index_of(s, "x2"), y = index_of(s, "x40");
  // a2 and a40 meet only at the root, so x adds nothing for y.
  CHECK(s.delta_certainty(x, 0, y) == 0.0);
  CHECK(s.delta_certainty(x, 1, y) == 0.0);

  // Committing x to itself lifts that sense to 11.
  oracle::Tree bfs(s.database().thesaurus());
  auto pool = pool_examples(s);
  auto bases = oracle::all_bases(bfs, s.database().verb(0));
  double d = s.delta_certainty(x, 0, x);
  CHECK(d == doctest::Approx(oracle::delta_c(bfs, s.database(), s.example(x), "v.1", s.example(x), bases, s.params())));
  CHECK(d == doctest::Approx(11.0 - s.certainty(x)));
  s.commit_and_update(x, "v.1");
  auto r = s.cache().row(x);
  CHECK(r.scores[static_cast<std::size_t>(r.position[0])] == 11.0);
}

TEST_CASE("training utility of a pool already at full certainty") {
  Sampler s(two_poles(), on_leaves({0}), {});
  CHECK(s.certainty(0) == 11.0);
  CHECK(s.tuf(0) == 0.0);
}

TEST_CASE("delta certainty and TUF agree with clone-and-rescore") {
  fixtures::Rng rng(41);
  int extended = 0;
  for (int trial = 0; trial < 60; ++trial) {
    auto policy = trial % 2 ? FramePolicy::Extend : FramePolicy::Reject;
    SamplerParams params{0.25 + 0.25 * static_cast<double>(trial % 3), 1 + static_cast<std::size_t>(trial % 3), 1,
                         trial % 4 == 3 ? CcdSetting{false, 1.5} : CcdSetting{}};
    auto st = random_state(rng, policy, params);
    auto& s = *st.sampler;
    oracle::Tree bfs(s.database().thesaurus());
    auto pool = s.pool();
    auto pool_ex = pool_examples(s);
    for (int q = 0; q < 10; ++q) {
      auto x = pool[fixtures::pick(rng, pool.size())];
      auto y = pool[fixtures::pick(rng, pool.size())];
      const auto& verb = *s.database().find_verb(s.example(x).verb);
      auto sense = fixtures::pick(rng, verb.senses.size());
      auto bases = oracle::all_bases(bfs, *s.database().find_verb(s.example(y).verb));
      double want = oracle::delta_c(bfs, s.database(), s.example(x), verb.senses[sense].sense, s.example(y), bases,
                                    s.params());
      REQUIRE(s.delta_certainty(x, sense, y) == doctest::Approx(want).epsilon(1e-12).scale(1.0));
      if (policy == FramePolicy::Extend) {
        for (const auto& c : s.example(x).complements)
          if (!verb.senses[sense].has_case(c.marker)) ++extended;
      }
    }
    auto x = pool[fixtures::pick(rng, pool.size())];
    double want = oracle::tuf(bfs, s.database(), pool_ex, s.example(x), s.params());
    REQUIRE(std::abs(s.tuf(x) - want) <= 1e-9);
  }
  CHECK(extended > 0);
}

TEST_CASE("commits touch only the committed sense and keep the cache exact") {
  fixtures::Rng rng(43);
  for (int trial = 0; trial < 30; ++trial) {
    auto policy = trial % 3 == 2 ? FramePolicy::Extend : FramePolicy::Reject;
    auto st = random_state(rng, policy, {0.5, 1, 1, trial % 2 ? CcdSetting{false, 1.0} : CcdSetting{}});
    auto& s = *st.sampler;
    auto held_out = fixtures::random_corpus(rng, st.world, s.database(), 10);
    auto h = s.watch(held_out);
    require_cache_exact(s);
    while (s.pool_size() > 0) {
      auto pool = s.pool();
      auto x = pool[fixtures::pick(rng, pool.size())];
      auto senses = fixtures::admissible_senses(s.database(), s.example(x));
      if (senses.empty()) {
        s.restore_labeled(x, s.database().find_verb(s.example(x).verb)->senses[0].sense);
        continue;
      }
      auto sense = senses[fixtures::pick(rng, senses.size())];
      bool extends = false;
      const auto& entry = s.database().find_verb(s.example(x).verb)->senses[*s.database().find_verb(s.example(x).verb)->sense_index(sense)];
      for (const auto& c : s.example(x).complements) extends |= !entry.has_case(c.marker);

      std::vector<std::map<std::string, double>> before;
      for (std::size_t i = 0; i < s.size(); ++i) before.push_back(cached_scores(s, i));
      s.commit_and_update(x, sense);
      require_cache_exact(s);
      if (!extends)
        for (std::size_t i = 0; i < s.size(); ++i) {
          auto after = cached_scores(s, i);
          for (const auto& [name, score] : before[i])
            if (name != sense) REQUIRE(after.at(name) == score);
        }
      if (fixtures::chance(rng, 0.3)) {
        s.refresh_ccd();
        require_cache_exact(s);
        // After a refresh the contributions are those of the current database.
        for (std::size_t i = 0; i < s.size(); ++i) {
          auto r = score_senses(s.example(i), s.database(), s.params().ccd);
          REQUIRE(cached_scores(s, i) == fresh_scores(r));
        }
        const auto& w = s.watched(h);
        for (std::size_t i = 0; i < w.size(); ++i) {
          auto r = score_senses(w.example(i), s.database(), s.params().ccd);
          std::map<std::string, double> got;
          const auto& row = w.row(i);
          for (std::size_t slot = 0; slot < row.scores.size(); ++slot)
            got[s.database().verb(row.verb).senses[row.layout.candidates[slot]].sense] = row.scores[slot];
          REQUIRE(got == fresh_scores(r));
        }
      }
      // T and X partition the corpus.
      std::set<std::size_t> seen;
      for (auto i : s.pool()) seen.insert(i);
      for (const auto& [i, _] : s.labeled()) REQUIRE(seen.insert(i).second);
      REQUIRE(seen.size() == s.size());
    }
    CHECK(s.select_samples().empty());
  }
}

TEST_CASE("the neighbourhood with most examples has the highest utility") {
  // a: a dense cluster around leaf 18, b: three examples near 40, c: a lone 56.
  Sampler s(two_poles(), on_leaves({16, 17, 18, 19, 20, 21, 40, 41, 42, 56}), {});
  auto a = index_of(s, "x18"), b = index_of(s, "x41"), c = index_of(s, "x56");
  CHECK(s.tuf(a) > s.tuf(b));
  CHECK(s.tuf(a) > s.tuf(c));
  oracle::Tree bfs(s.database().thesaurus());
  auto pool = pool_examples(s);
  for (auto i : {a, b, c})
    CHECK(s.tuf(i) == doctest::Approx(oracle::tuf(bfs, s.database(), pool, s.example(i), s.params())));
}

TEST_CASE("three clusters: the brute-force argmax is selected first") {
  // All three clusters sit at the same distance from their nearest seed.
  auto cluster_a = {16, 17, 18, 19, 20, 21};
  Sampler s(two_poles(), on_leaves({16, 17, 18, 19, 20, 21, 36, 37, 38, 44, 45}), {});
  oracle::Tree bfs(s.database().thesaurus());
  auto pool = pool_examples(s);
  std::vector<double> tufs;
  for (std::size_t i = 0; i < s.size(); ++i) tufs.push_back(oracle::tuf(bfs, s.database(), pool, s.example(i), s.params()));
  double best_tuf = *std::max_element(tufs.begin(), tufs.end());
  auto picks = s.select_samples();
  REQUIRE(picks.size() == 1);
  CHECK(tufs[picks[0]] >= best_tuf - 1e-9);
  bool in_a = false;
  for (int l : cluster_a) in_a |= s.example(picks[0]).id == "x" + std::to_string(l);
  CHECK(in_a);
}

TEST_CASE("ties in utility go to the less certain example") {
  // Both examples already sit on a seed, so no commit can raise anything.
  Database db(fixtures::binary_tree(6));
  db.add_sense("v", "v.1", "", {{"ga", {"a0", "a32"}}});
  db.add_sense("v", "v.2", "", {{"ga", {"a1"}}});
  Sampler s(db, on_leaves({32, 0}), {});
  auto x32 = index_of(s, "x32"), x0 = index_of(s, "x0");
  REQUIRE(s.tuf(x32) == 0.0);
  REQUIRE(s.tuf(x0) == 0.0);
  REQUIRE(s.certainty(x0) < s.certainty(x32));
  CHECK(s.select_samples() == std::vector<std::size_t>{x0});
}

TEST_CASE("a batch as large as the pool returns it in utility order") {
  fixtures::Rng rng(47);
  for (int trial = 0; trial < 10; ++trial) {
    auto st = random_state(rng, FramePolicy::Reject, {0.5, 1, 1000, {}});
    auto& s = *st.sampler;
    auto picks = s.select_samples();
    REQUIRE(picks.size() == s.pool_size());
    for (std::size_t i = 1; i < picks.size(); ++i) {
      double ta = s.tuf(picks[i - 1]), tb = s.tuf(picks[i]);
      REQUIRE(ta >= tb);
      if (ta == tb) {
        REQUIRE(s.certainty(picks[i - 1]) <= s.certainty(picks[i]));
        if (s.certainty(picks[i - 1]) == s.certainty(picks[i])) REQUIRE(picks[i - 1] < picks[i]);
      }
    }
  }
}

TEST_CASE("labeling the last example empties the pool") {
  Sampler s(two_poles(), on_leaves({5}), {});
  CHECK(s.select_samples() == std::vector<std::size_t>{0});
  s.commit_and_update(0, "v.1");
  s.refresh_ccd();
  CHECK(s.pool_size() == 0);
  CHECK(s.labeled_size() == 1);
  CHECK(s.select_samples().empty());
  CHECK_THROWS_AS(s.commit_and_update(0, "v.1"), Error);
}

TEST_CASE("rejected hypothetical commits contribute nothing") {
  Database db(fixtures::binary_tree(4));
  db.add_sense("v", "v.1", "", {{"ga", {"a0"}}, {"o", {"a4"}}});
  db.add_sense("v", "v.2", "", {{"ga", {"a8"}}});
  auto x = fixtures::sentence("x", "v", {{"ga", "a1"}, {"o", "a5"}});
  auto y = fixtures::sentence("y", "v", {{"ga", "a9"}});
  Sampler s(db, {x, y}, {});
  CHECK(s.delta_certainty(0, 1, 1) == 0.0);
  CHECK(s.tuf_for_sense(0, 1) == 0.0);
  CHECK_THROWS_AS(s.commit_and_update(0, "v.2"), Error);
  CHECK(s.pool_size() == 2);
}

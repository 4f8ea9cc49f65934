#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "exsel/corpus_io.hpp"
#include "exsel/disambiguator.hpp"
#include "fixtures.hpp"

using namespace exsel;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SyntheticSpec small_spec(std::uint64_t seed) {
  SyntheticSpec spec;
  spec.verbs = {{"alpha", 3, 60}, {"beta", 5, 80}};
  spec.rng_seed = seed;
  return spec;
}

}  // namespace

TEST_CASE("same seed, same bytes") {
  namespace fs = std::filesystem;
  auto base = fs::temp_directory_path() / "exsel_gen_test";
  fs::remove_all(base);
  generate_synthetic(small_spec(9)).write((base / "a").string());
  generate_synthetic(small_spec(9)).write((base / "b").string());
  generate_synthetic(small_spec(10)).write((base / "c").string());
  for (auto f : {"thesaurus.jsonl", "seeds.jsonl", "corpus.jsonl", "spec.json"})
    CHECK(slurp(base / "a" / f) == slurp(base / "b" / f));
  CHECK(slurp(base / "a" / "corpus.jsonl") != slurp(base / "c" / "corpus.jsonl"));

  // The written files load back into the same benchmark.
  auto t = std::make_shared<const Thesaurus>(Thesaurus::load_file((base / "a" / "thesaurus.jsonl").string()));
  auto seeds = Database::load_file((base / "a" / "seeds.jsonl").string(), t);
  auto bench = generate_synthetic(small_spec(9));
  CHECK(seeds == bench.seeds);
  auto corpus = load_corpus((base / "a" / "corpus.jsonl").string(), &seeds);
  CHECK(corpus.examples == bench.corpus);
  CHECK(SyntheticSpec::load_file((base / "a" / "spec.json").string()).to_json_text() ==
        bench.spec.to_json_text());
  fs::remove_all(base);
}

TEST_CASE("a 29-sense verb with 84 sentences") {
  SyntheticSpec spec;
  spec.verbs = {{"toru", 29, 84}};
  auto bench = generate_synthetic(spec);
  CHECK(bench.seeds.sense_count() == 29);
  CHECK(bench.corpus.size() == 84);
  for (const auto& x : bench.corpus) CHECK_NOTHROW(bench.seeds.validate(x));
}

TEST_CASE("the evaluation-shaped preset") {
  auto bench = generate_synthetic(SyntheticSpec::standard(1));
  CHECK(bench.corpus.size() == 1111);
  CHECK(bench.seeds.verbs().size() == 10);
  CHECK(bench.seeds.find_verb("toru")->senses.size() == 29);
  CHECK(bench.seeds.find_verb("umu")->senses.size() == 2);
  // Seed fillers average about 3.7 per case.
  CHECK(bench.seeds.mean_fillers_per_case() == doctest::Approx(3.7).epsilon(0.05));
  std::set<std::string> ids;
  for (const auto& x : bench.corpus) {
    CHECK(ids.insert(x.id).second);
    REQUIRE(x.gold.has_value());
  }
}

TEST_CASE("without overlap every sentence is recovered from the full corpus") {
  auto spec = small_spec(3);
  spec.overlap = 0.0;
  auto bench = generate_synthetic(spec);
  // Modes of different senses never coincide.
  for (const auto& a : bench.clusters)
    for (const auto& b : bench.clusters) {
      if (a.verb != b.verb || a.sense == b.sense) continue;
      for (const auto& [m, modes] : a.modes) {
        if (!b.modes.count(m)) continue;
        for (auto r : modes) CHECK(std::count(b.modes.at(m).begin(), b.modes.at(m).end(), r) == 0);
      }
    }
  // Every filler lies in one of its gold sense's modes.
  for (const auto& x : bench.corpus) {
    const auto& truth = bench.clusters_of(x.verb, *x.gold);
    for (const auto& c : x.complements) {
      const auto& modes = truth.modes.at(c.marker);
      CHECK(std::count(modes.begin(), modes.end(), bench.mode_of(c.noun)) == 1);
    }
  }
  auto db = bench.seeds;
  for (const auto& x : bench.corpus) db.commit(x, *x.gold);
  std::size_t correct = 0;
  for (const auto& x : bench.corpus) correct += score_senses(x, db, {}).best().sense == *x.gold;
  CHECK(correct == bench.corpus.size());
}

TEST_CASE("spec parsing and validation") {
  auto spec = SyntheticSpec::from_json_text(R"({"verbs":3,"senses_per_verb":4,"sentences":20,"overlap":0.5})");
  CHECK(spec.verbs.size() == 3);
  CHECK(spec.verbs[1].senses == 4);
  CHECK(spec.overlap == 0.5);
  auto preset = SyntheticSpec::from_json_text(R"({"preset":"standard","rng_seed":7})");
  CHECK(preset.verbs.size() == 10);
  CHECK(preset.rng_seed == 7);
  CHECK_THROWS_AS(SyntheticSpec::from_json_text(R"({"verbs":2,"colour":"red"})"), ParseError);
  CHECK_THROWS_AS(SyntheticSpec::from_json_text(R"({"preset":"other"})"), ParseError);
  CHECK_THROWS_AS(SyntheticSpec::from_json_text("[1,2]"), ParseError);

  SyntheticSpec bad;
  bad.verbs = {{"v", 100, 10}};
  bad.depth = 4;
  bad.cluster_spread = 2;
  CHECK_THROWS_AS(generate_synthetic(bad), Error);  // 300 modes wanted, 16 available
  bad = small_spec(1);
  bad.overlap = 1.5;
  CHECK_THROWS_AS(generate_synthetic(bad), Error);
  bad = small_spec(1);
  bad.verbs.push_back(bad.verbs[0]);
  CHECK_THROWS_AS(generate_synthetic(bad), Error);
}

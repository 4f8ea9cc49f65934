#include <map>
#include <sstream>

#include "doctest.h"
#include "exsel/corpus_io.hpp"
#include "exsel/experiment.hpp"
#include "fixtures.hpp"
#include "json.hpp"

using namespace exsel;

namespace {

SyntheticBenchmark small_bench(std::uint64_t seed) {
  SyntheticSpec spec;
  spec.verbs = {{"alpha", 3, 40}, {"beta", 6, 50}, {"gamma", 2, 25}};
  spec.rng_seed = seed;
  return generate_synthetic(spec);
}

}  // namespace

TEST_CASE("fold assignment is balanced and deterministic") {
  auto bench = small_bench(1);
  auto a = assign_folds(bench.corpus, 6, 4);
  CHECK(a == assign_folds(bench.corpus, 6, 4));
  CHECK(a != assign_folds(bench.corpus, 6, 5));
  std::vector<std::size_t> sizes(6);
  for (auto f : a) ++sizes.at(f);
  auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
  CHECK(*hi - *lo <= 1);
}

TEST_CASE("configuration checks") {
  ExperimentConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.sampler.lambda == 0.5);
  CHECK(c.sampler.k == 1);
  CHECK(c.penalty == 1.0);
  CHECK(c.sampler.ccd.argmax_only);
  CHECK(c.folds == 6);
  auto bad = c;
  bad.folds = 1;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = c;
  bad.sampler.lambda = -0.1;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = c;
  bad.strategies.clear();
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = c;
  bad.penalty = -1;
  CHECK_THROWS_AS(bad.validate(), Error);
  CHECK(parse_strategy("utility") == Strategy::Utility);
  CHECK_FALSE(parse_strategy("greedy").has_value());
}

TEST_CASE("unlabeled corpora are refused") {
  auto bench = small_bench(1);
  bench.corpus[0].gold.reset();
  CHECK_THROWS_AS(run_experiment(bench.seeds, bench.corpus, {}), Error);
}

TEST_CASE("strategies agree at both ends of the curve") {
  auto bench = small_bench(2);
  ExperimentConfig config;
  config.rng_seed = 3;
  auto report = run_experiment(bench.seeds, bench.corpus, config);
  REQUIRE(report.curves.size() == 12);
  for (std::size_t f = 0; f < config.folds; ++f) {
    const auto& r = report.curve(Strategy::Random, f);
    const auto& u = report.curve(Strategy::Utility, f);
    CHECK(r.points.front().labeled == 0);
    CHECK(r.points.front().precision == u.points.front().precision);
    CHECK(r.final_point().labeled == r.training_size);
    CHECK(u.final_point().labeled == u.training_size);
    CHECK(r.final_point().precision == u.final_point().precision);
    CHECK(r.final_point().pm == u.final_point().pm);
    for (const auto* c : {&r, &u})
      for (const auto& p : c->points) {
        CHECK(p.precision >= 0.0);
        CHECK(p.precision <= 1.0);
        CHECK(p.pm >= -1.0);
        CHECK(p.pm <= 1.0);
        for (const auto& o : p.outcomes) {
          CHECK(o.certainty >= 0.0);
          CHECK(o.certainty <= 11.0);
        }
      }
  }
}

TEST_CASE("fixed seeds reproduce the report") {
  auto bench = small_bench(4);
  ExperimentConfig config;
  config.strategies = {Strategy::Random};
  config.rng_seed = 7;
  config.threads = 3;
  auto a = run_experiment(bench.seeds, bench.corpus, config);
  config.threads = 1;
  auto b = run_experiment(bench.seeds, bench.corpus, config);
  std::ostringstream ca, cb, sa, sb;
  a.write_csv(ca);
  b.write_csv(cb);
  a.write_summary(sa);
  b.write_summary(sb);
  CHECK(ca.str() == cb.str());
  CHECK(sa.str() == sb.str());
  CHECK(ca.str().rfind("strategy,fold,iteration,labeled,precision,pm\n", 0) == 0);

  config.rng_seed = 8;
  auto c = run_experiment(bench.seeds, bench.corpus, config);
  std::ostringstream cc;
  c.write_csv(cc);
  CHECK(cc.str() != ca.str());

  auto j = nlohmann::json::parse(sa.str());
  CHECK(j.contains("strategies"));
  CHECK(j["strategies"].contains("random"));
  CHECK(j.contains("lower_bound"));
}

TEST_CASE("strides and batches keep the final point") {
  auto bench = small_bench(5);
  ExperimentConfig config;
  config.folds = 3;
  config.eval_stride = 4;
  config.sampler.batch_size = 3;
  auto report = run_experiment(bench.seeds, bench.corpus, config);
  for (const auto& c : report.curves) {
    CHECK(c.final_point().labeled == c.training_size);
    for (std::size_t i = 1; i + 1 < c.points.size(); ++i) CHECK(c.points[i].iteration % 4 == 0);
  }
  for (std::size_t f = 0; f < 3; ++f)
    CHECK(report.curve(Strategy::Random, f).final_point().precision ==
          report.curve(Strategy::Utility, f).final_point().precision);
}

TEST_CASE("curve areas use the trapezoid rule") {
  FoldCurve c;
  c.training_size = 10;
  c.points.push_back({0, 0, 0.5, 0.0, {}, {}});
  c.points.push_back({1, 4, 0.7, 0.2, {}, {}});
  c.points.push_back({2, 10, 0.9, 0.4, {}, {}});
  CHECK(c.precision_area() == doctest::Approx(0.4 * 0.6 + 0.6 * 0.8));
  CHECK(c.pm_area() == doctest::Approx(0.4 * 0.1 + 0.6 * 0.3));
}

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "exsel/corpus_io.hpp"
#include "json.hpp"

namespace exsel {

using nlohmann::json;

namespace {

constexpr std::string_view kDigits = "0123456789abcdefghijklmnopqrstuvwxyz";
constexpr std::size_t kMaxLeaves = std::size_t{1} << 22;

std::size_t ipow(std::size_t base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

// Base-`branching` path of a node, most significant digit first.
std::string path_digits(std::size_t index, int digits, int branching) {
  std::string s(static_cast<std::size_t>(digits), '0');
  for (int i = digits - 1; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = kDigits[index % static_cast<std::size_t>(branching)];
    index /= static_cast<std::size_t>(branching);
  }
  return s;
}

std::string leaf_word(std::size_t leaf, const SyntheticSpec& spec) {
  return "w" + path_digits(leaf, spec.depth, spec.branching);
}

std::shared_ptr<const Thesaurus> build_tree(const SyntheticSpec& spec) {
  std::vector<Thesaurus::NodeRecord> records;
  const auto b = static_cast<std::size_t>(spec.branching);
  for (int d = 0; d < spec.depth; ++d) {
    std::size_t width = ipow(b, d);
    for (std::size_t i = 0; i < width; ++i) {
      Thesaurus::NodeRecord rec;
      rec.id = "c" + path_digits(i, d, spec.branching);
      for (std::size_t c = 0; c < b; ++c) {
        auto child = i * b + c;
        rec.children.push_back(d + 1 == spec.depth ? "l" + path_digits(child, d + 1, spec.branching)
                                                   : "c" + path_digits(child, d + 1, spec.branching));
      }
      records.push_back(std::move(rec));
    }
  }
  std::size_t leaves = ipow(b, spec.depth);
  for (std::size_t i = 0; i < leaves; ++i) {
    Thesaurus::NodeRecord rec;
    rec.id = "l" + path_digits(i, spec.depth, spec.branching);
    rec.word = leaf_word(i, spec);
    records.push_back(std::move(rec));
  }
  return std::make_shared<const Thesaurus>(Thesaurus::from_records(std::move(records)));
}

std::size_t draw_weighted(std::mt19937_64& rng, const std::vector<double>& weights) {
  std::discrete_distribution<std::size_t> dist(weights.begin(), weights.end());
  return dist(rng);
}

}  // namespace

SyntheticSpec SyntheticSpec::standard(std::uint64_t rng_seed) {
  SyntheticSpec spec;
  spec.verbs = {
      {"ataeru", 4, 136}, {"kakeru", 29, 160}, {"kuwaeru", 5, 167}, {"noru", 10, 126}, {"osameru", 8, 108},
      {"tsukuru", 15, 126}, {"toru", 29, 84}, {"umu", 2, 90}, {"wakaru", 5, 60}, {"yameru", 2, 54},
  };
  spec.rng_seed = rng_seed;
  return spec;
}

double SyntheticSpec::case_overlap(std::size_t case_index) const {
  return overlap * std::pow(overlap_decay, static_cast<double>(case_index));
}

void SyntheticSpec::validate() const {
  if (verbs.empty()) throw Error("synthetic spec has no verbs");
  std::set<std::string> names;
  for (const auto& v : verbs) {
    if (v.name.empty()) throw Error("synthetic verb with empty name");
    if (!names.insert(v.name).second) throw Error("duplicate synthetic verb '" + v.name + "'");
    if (v.senses == 0) throw Error("verb '" + v.name + "' needs at least one sense");
  }
  if (cases.empty()) throw Error("synthetic spec has no cases");
  if (std::set<std::string>(cases.begin(), cases.end()).size() != cases.size())
    throw Error("case markers must be distinct");
  for (const auto& c : cases)
    if (c.empty()) throw Error("empty case marker");
  if (depth < 1) throw Error("depth must be at least 1");
  if (branching < 2 || branching > static_cast<int>(kDigits.size()))
    throw Error("branching must lie in [2, 36]");
  if (cluster_spread < 0 || cluster_spread > depth) throw Error("cluster_spread must lie in [0, depth]");
  if (ipow(static_cast<std::size_t>(branching), depth) > kMaxLeaves) throw Error("thesaurus would be too large");
  if (modes_per_sense == 0) throw Error("modes_per_sense must be at least 1");
  if (overlap < 0.0 || overlap > 1.0) throw Error("overlap must lie in [0, 1]");
  if (overlap_decay < 0.0 || overlap_decay > 1.0) throw Error("overlap_decay must lie in [0, 1]");
  if (seed_fillers_mean < 1.0) throw Error("seed_fillers_mean must be at least 1");
  if (case_presence <= 0.0 || case_presence > 1.0) throw Error("case_presence must lie in (0, 1]");
  if (frame_drop < 0.0 || frame_drop >= 1.0) throw Error("frame_drop must lie in [0, 1)");
  if (sense_skew < 0.0) throw Error("sense_skew must be non-negative");

  const auto roots = ipow(static_cast<std::size_t>(branching), depth - cluster_spread);
  for (const auto& v : verbs)
    if (v.senses * modes_per_sense > roots)
      throw Error("infeasible spec: verb '" + v.name + "' needs up to " + std::to_string(v.senses * modes_per_sense) +
                  " distinct clusters per case but the thesaurus offers " + std::to_string(roots));
}

SyntheticSpec SyntheticSpec::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid generator spec JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("generator spec must be a JSON object");

  SyntheticSpec spec;
  if (j.contains("preset")) {
    if (j["preset"] != "standard") throw ParseError("unknown preset " + j["preset"].dump());
    spec = standard(spec.rng_seed);
  }
  std::size_t senses_per_verb = 2, sentences = 100;
  try {
    if (j.contains("senses_per_verb")) senses_per_verb = j["senses_per_verb"].get<std::size_t>();
    if (j.contains("sentences")) sentences = j["sentences"].get<std::size_t>();
    for (const auto& [key, value] : j.items()) {
      if (key == "preset" || key == "senses_per_verb" || key == "sentences") continue;
      if (key == "verbs") {
        spec.verbs.clear();
        if (value.is_number_integer()) {
          auto n = value.get<std::size_t>();
          for (std::size_t i = 0; i < n; ++i)
            spec.verbs.push_back({"verb" + std::to_string(i), senses_per_verb, sentences});
        } else if (value.is_array()) {
          for (const auto& v : value)
            spec.verbs.push_back({v.at("name").get<std::string>(), v.value("senses", senses_per_verb),
                                  v.value("sentences", sentences)});
        } else {
          throw ParseError("\"verbs\" must be a count or an array");
        }
      } else if (key == "cases") {
        spec.cases = value.get<std::vector<std::string>>();
      } else if (key == "depth") {
        spec.depth = value.get<int>();
      } else if (key == "branching") {
        spec.branching = value.get<int>();
      } else if (key == "cluster_spread") {
        spec.cluster_spread = value.get<int>();
      } else if (key == "modes_per_sense") {
        spec.modes_per_sense = value.get<std::size_t>();
      } else if (key == "overlap") {
        spec.overlap = value.get<double>();
      } else if (key == "overlap_decay") {
        spec.overlap_decay = value.get<double>();
      } else if (key == "seed_fillers_mean") {
        spec.seed_fillers_mean = value.get<double>();
      } else if (key == "case_presence") {
        spec.case_presence = value.get<double>();
      } else if (key == "frame_drop") {
        spec.frame_drop = value.get<double>();
      } else if (key == "sense_skew") {
        spec.sense_skew = value.get<double>();
      } else if (key == "rng_seed") {
        spec.rng_seed = value.get<std::uint64_t>();
      } else {
        throw ParseError("unknown generator spec key \"" + key + "\"");
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad generator spec value: ") + e.what());
  }
  return spec;
}

SyntheticSpec SyntheticSpec::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open generator spec '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string SyntheticSpec::to_json_text() const {
  json j;
  auto& vs = j["verbs"] = json::array();
  for (const auto& v : verbs) vs.push_back({{"name", v.name}, {"senses", v.senses}, {"sentences", v.sentences}});
  j["cases"] = cases;
  j["depth"] = depth;
  j["branching"] = branching;
  j["cluster_spread"] = cluster_spread;
  j["modes_per_sense"] = modes_per_sense;
  j["overlap"] = overlap;
  j["overlap_decay"] = overlap_decay;
  j["seed_fillers_mean"] = seed_fillers_mean;
  j["case_presence"] = case_presence;
  j["frame_drop"] = frame_drop;
  j["sense_skew"] = sense_skew;
  j["rng_seed"] = rng_seed;
  return j.dump(2);
}

std::size_t SyntheticBenchmark::mode_of(const std::string& word) const {
  if (word.size() != static_cast<std::size_t>(spec.depth) + 1 || word[0] != 'w')
    throw Error("'" + word + "' is not a generated word");
  std::size_t leaf = 0;
  for (std::size_t i = 1; i < word.size(); ++i) {
    auto d = kDigits.find(word[i]);
    if (d == std::string_view::npos || d >= static_cast<std::size_t>(spec.branching))
      throw Error("'" + word + "' is not a generated word");
    leaf = leaf * static_cast<std::size_t>(spec.branching) + d;
  }
  return leaf / ipow(static_cast<std::size_t>(spec.branching), spec.cluster_spread);
}

const SenseClusters& SyntheticBenchmark::clusters_of(const std::string& verb, const std::string& sense) const {
  for (const auto& c : clusters)
    if (c.verb == verb && c.sense == sense) return c;
  throw Error("no clusters for sense '" + sense + "' of '" + verb + "'");
}

void SyntheticBenchmark::write(const std::string& out_dir) const {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  auto open = [&](const char* name) {
    std::ofstream out(fs::path(out_dir) / name, std::ios::binary);
    if (!out) throw Error("cannot write '" + (fs::path(out_dir) / name).string() + "'");
    return out;
  };
  {
    auto out = open("thesaurus.jsonl");
    thesaurus->save_jsonl(out);
  }
  {
    auto out = open("seeds.jsonl");
    seeds.save_jsonl(out);
  }
  {
    auto out = open("corpus.jsonl");
    write_corpus(out, corpus);
  }
  {
    auto out = open("spec.json");
    out << spec.to_json_text() << '\n';
  }
}

SyntheticBenchmark generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  auto thesaurus = build_tree(spec);
  SyntheticBenchmark bench{spec, thesaurus, Database(thesaurus), {}, {}};

  std::seed_seq seq{static_cast<std::uint32_t>(spec.rng_seed), static_cast<std::uint32_t>(spec.rng_seed >> 32),
                    0x53594e54u};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const auto b = static_cast<std::size_t>(spec.branching);
  const auto mode_count = ipow(b, spec.depth - spec.cluster_spread);
  const auto mode_size = ipow(b, spec.cluster_spread);
  std::vector<double> mode_popularity(spec.modes_per_sense);
  for (std::size_t m = 0; m < spec.modes_per_sense; ++m) mode_popularity[m] = 1.0 / static_cast<double>(m + 1);

  auto draw_word = [&](const std::vector<std::size_t>& modes) {
    auto mode = modes[draw_weighted(rng, mode_popularity)];
    std::uniform_int_distribution<std::size_t> in_mode(0, mode_size - 1);
    return leaf_word(mode * mode_size + in_mode(rng), spec);
  };

  for (const auto& shape : spec.verbs) {
    const std::size_t n = shape.senses;
    std::vector<SenseClusters> senses(n);
    for (std::size_t i = 0; i < n; ++i) {
      senses[i].verb = shape.name;
      senses[i].sense = shape.name + "." + std::to_string(i + 1);
    }
    // Frames: the first case always, later ones unless dropped.
    std::vector<std::vector<std::size_t>> frame(n);
    for (std::size_t i = 0; i < n; ++i) {
      frame[i].push_back(0);
      for (std::size_t c = 1; c < spec.cases.size(); ++c)
        if (unit(rng) >= spec.frame_drop) frame[i].push_back(c);
    }

    for (std::size_t c = 0; c < spec.cases.size(); ++c) {
      std::vector<std::size_t> fresh(mode_count);
      for (std::size_t r = 0; r < mode_count; ++r) fresh[r] = r;
      std::shuffle(fresh.begin(), fresh.end(), rng);
      std::size_t next_fresh = 0;
      std::vector<std::size_t> used;  // modes taken by earlier senses for this case
      const double share = spec.case_overlap(c);
      for (std::size_t i = 0; i < n; ++i) {
        if (std::find(frame[i].begin(), frame[i].end(), c) == frame[i].end()) continue;
        auto& mine = senses[i].modes[spec.cases[c]];
        for (std::size_t m = 0; m < spec.modes_per_sense; ++m) {
          std::vector<std::size_t> shareable;
          for (auto u : used)
            if (std::find(mine.begin(), mine.end(), u) == mine.end()) shareable.push_back(u);
          if (!shareable.empty() && unit(rng) < share) {
            std::uniform_int_distribution<std::size_t> pick(0, shareable.size() - 1);
            mine.push_back(shareable[pick(rng)]);
          } else {
            mine.push_back(fresh.at(next_fresh++));
          }
        }
        for (auto u : mine)
          if (std::find(used.begin(), used.end(), u) == used.end()) used.push_back(u);
      }
    }

    const auto whole = static_cast<std::size_t>(std::floor(spec.seed_fillers_mean));
    const double extra = spec.seed_fillers_mean - static_cast<double>(whole);
    for (std::size_t i = 0; i < n; ++i) {
      std::map<std::string, std::vector<std::string>> seed_frame;
      for (auto c : frame[i]) {
        const auto& modes = senses[i].modes.at(spec.cases[c]);
        std::size_t count = whole + (unit(rng) < extra ? 1 : 0);
        auto& out = seed_frame[spec.cases[c]];
        for (std::size_t k = 0; k < count; ++k) out.push_back(draw_word(modes));
      }
      bench.seeds.add_sense(shape.name, senses[i].sense, "sense " + std::to_string(i + 1) + " of " + shape.name,
                            seed_frame);
    }

    // Gold senses follow a Zipf law over a random ranking of the senses.
    std::vector<std::size_t> rank(n);
    for (std::size_t i = 0; i < n; ++i) rank[i] = i;
    std::shuffle(rank.begin(), rank.end(), rng);
    std::vector<double> sense_weight(n);
    for (std::size_t i = 0; i < n; ++i)
      sense_weight[i] = 1.0 / std::pow(static_cast<double>(rank[i] + 1), spec.sense_skew);

    for (std::size_t k = 0; k < shape.sentences; ++k) {
      auto s = draw_weighted(rng, sense_weight);
      SentenceExample x;
      std::ostringstream id;
      id << shape.name << '-' << k;
      x.id = id.str();
      x.verb = shape.name;
      x.gold = senses[s].sense;
      for (auto c : frame[s]) {
        if (unit(rng) >= spec.case_presence) continue;
        x.complements.push_back({spec.cases[c], draw_word(senses[s].modes.at(spec.cases[c]))});
      }
      if (x.complements.empty()) {
        std::uniform_int_distribution<std::size_t> pick(0, frame[s].size() - 1);
        auto c = frame[s][pick(rng)];
        x.complements.push_back({spec.cases[c], draw_word(senses[s].modes.at(spec.cases[c]))});
      }
      bench.corpus.push_back(std::move(x));
    }
    for (auto& sc : senses) bench.clusters.push_back(std::move(sc));
  }
  return bench;
}

}  // namespace exsel

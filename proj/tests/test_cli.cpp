#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  std::string cmd = std::string(EXSEL_CLI) + " " + args + " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Workspace {
  fs::path dir = fs::temp_directory_path() / "exsel_cli_test";
  Workspace() {
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ofstream(dir / "spec.json") << R"({"verbs":[{"name":"a","senses":3,"sentences":30},{"name":"b","senses":2,"sentences":24}],"rng_seed":4})";
    REQUIRE(run("gen --spec " + (dir / "spec.json").string() + " --out-dir " + (dir / "bench").string()) == 0);
  }
  ~Workspace() { fs::remove_all(dir); }
  std::string inputs() const {
    auto b = dir / "bench";
    return " --thesaurus " + (b / "thesaurus.jsonl").string() + " --seeds " + (b / "seeds.jsonl").string() +
           " --corpus " + (b / "corpus.jsonl").string();
  }
};

}  // namespace

TEST_CASE("command-line defaults and reports") {
  Workspace ws;
  REQUIRE(run("run" + ws.inputs() + " --out " + (ws.dir / "r").string()) == 0);
  auto summary = nlohmann::json::parse(slurp(ws.dir / "r" / "summary.json"));
  const auto& p = summary["parameters"];
  CHECK(p["lambda"] == 0.5);
  CHECK(p["k"] == 1);
  CHECK(p["p"] == 1.0);
  CHECK(p["ccd"] == "argmax-only");
  CHECK(p["folds"] == 6);
  CHECK(summary["strategies"].contains("random"));
  CHECK(summary["strategies"].contains("utility"));
  CHECK(slurp(ws.dir / "r" / "report.csv").rfind("strategy,fold,iteration,labeled,precision,pm\n", 0) == 0);

  REQUIRE(run("run" + ws.inputs() + " --alpha 2 --folds 3 --out " + (ws.dir / "p").string()) == 0);
  auto power = nlohmann::json::parse(slurp(ws.dir / "p" / "summary.json"));
  CHECK(power["parameters"]["ccd"] == 2.0);
  CHECK(power["parameters"]["folds"] == 3);
}

TEST_CASE("fixed seed gives identical reports") {
  Workspace ws;
  auto args = ws.inputs() + " --strategy random --rng-seed 7 --out ";
  REQUIRE(run("run" + args + (ws.dir / "r1").string()) == 0);
  REQUIRE(run("run" + args + (ws.dir / "r2").string()) == 0);
  CHECK(slurp(ws.dir / "r1" / "report.csv") == slurp(ws.dir / "r2" / "report.csv"));
  CHECK(slurp(ws.dir / "r1" / "summary.json") == slurp(ws.dir / "r2" / "summary.json"));
}

TEST_CASE("out-of-range settings fail") {
  Workspace ws;
  auto out = " --out " + (ws.dir / "bad").string();
  CHECK(run("run" + ws.inputs() + " --lambda 1.5" + out) != 0);
  CHECK(run("run" + ws.inputs() + " --k 0" + out) != 0);
  CHECK(run("run" + ws.inputs() + " --folds 1" + out) != 0);
  CHECK(run("run" + ws.inputs() + " --strategy greedy" + out) != 0);
  CHECK(run("run" + ws.inputs() + " --alpha 1 --ccd-argmax-only" + out) != 0);
  CHECK(run("run --thesaurus /nonexistent --seeds x --corpus y" + out) != 0);
  CHECK(run("") != 0);
}

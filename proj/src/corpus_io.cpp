#include "exsel/corpus_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "json.hpp"

namespace exsel {

using nlohmann::json;

namespace {

SentenceExample sentence_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("record is not an object");
  SentenceExample x;
  if (!j.contains("id")) throw ParseError("missing \"id\"");
  if (j["id"].is_string())
    x.id = j["id"].get<std::string>();
  else if (j["id"].is_number_integer())
    x.id = std::to_string(j["id"].get<long long>());
  else
    throw ParseError("\"id\" must be a string or integer");
  if (!j.contains("verb") || !j["verb"].is_string()) throw ParseError("missing string \"verb\"");
  x.verb = j["verb"].get<std::string>();
  if (!j.contains("complements") || !j["complements"].is_array())
    throw ParseError("missing array \"complements\"");
  for (const auto& c : j["complements"]) {
    if (!c.is_array() || c.size() != 2 || !c[0].is_string() || !c[1].is_string())
      throw ParseError("each complement must be a [marker, noun] pair of strings");
    x.complements.push_back({c[0].get<std::string>(), c[1].get<std::string>()});
  }
  if (x.complements.empty()) throw ParseError("sentence has no complements");
  std::unordered_set<std::string> seen;
  for (const auto& c : x.complements) {
    if (c.marker.empty() || c.noun.empty()) throw ParseError("empty case marker or noun");
    if (!seen.insert(c.marker).second) throw ParseError("case marker '" + c.marker + "' repeated");
  }
  if (j.contains("gold") && !j["gold"].is_null()) {
    if (!j["gold"].is_string()) throw ParseError("\"gold\" must be a string or null");
    x.gold = j["gold"].get<std::string>();
  }
  return x;
}

}  // namespace

CorpusParseResult parse_corpus(std::istream& in, const Database* db) {
  CorpusParseResult result;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    SentenceExample x;
    try {
      x = sentence_from_json(json::parse(line));
    } catch (const json::exception& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), lineno);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), lineno);
    }
    if (!ids.insert(x.id).second) throw ParseError("duplicate sentence id '" + x.id + "'", lineno);
    if (db) {
      if (!db->find_verb(x.verb)) {
        ++result.skipped_unknown_verb;
        result.warnings.push_back("line " + std::to_string(lineno) + ": skipping sentence '" + x.id +
                                  "' of unknown verb '" + x.verb + "'");
        continue;
      }
      try {
        db->validate(x);
      } catch (const Error& e) {
        throw ParseError(e.what(), lineno);
      }
    }
    result.examples.push_back(std::move(x));
    result.lines.push_back(lineno);
  }
  return result;
}

CorpusParseResult load_corpus(const std::string& path, const Database* db) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open corpus file '" + path + "'");
  try {
    return parse_corpus(in, db);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_corpus(std::ostream& out, std::span<const SentenceExample> corpus) {
  for (const auto& x : corpus) {
    json j;
    j["id"] = x.id;
    j["verb"] = x.verb;
    auto& comps = j["complements"] = json::array();
    for (const auto& c : x.complements) comps.push_back({c.marker, c.noun});
    j["gold"] = x.gold ? json(*x.gold) : json(nullptr);
    out << j.dump() << '\n';
  }
}

}  // namespace exsel

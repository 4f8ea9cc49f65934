#include "exsel/example_db.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "json.hpp"

namespace exsel {

using nlohmann::json;

void FillerSet::add(Term t) {
  auto pos = std::upper_bound(items_.begin(), items_.end(), t);
  items_.insert(pos, std::move(t));
}

std::optional<std::size_t> VerbEntry::sense_index(std::string_view sense) const {
  for (std::size_t i = 0; i < senses.size(); ++i)
    if (senses[i].sense == sense) return i;
  return std::nullopt;
}

Database::Database(std::shared_ptr<const Thesaurus> thesaurus, FramePolicy policy)
    : thesaurus_(std::move(thesaurus)), policy_(policy) {
  if (!thesaurus_) throw Error("database requires a thesaurus");
}

void Database::add_sense(std::string_view verb, std::string_view sense, std::string_view gloss,
                         const std::map<std::string, std::vector<std::string>>& frame) {
  if (verb.empty()) throw Error("sense entry with empty verb");
  if (sense.empty()) throw Error("sense entry for '" + std::string(verb) + "' with empty sense id");
  if (frame.empty())
    throw Error("sense '" + std::string(sense) + "' of '" + std::string(verb) + "' has an empty case frame");

  SenseEntry entry{std::string(verb), std::string(sense), std::string(gloss), {}};
  for (const auto& [marker, words] : frame) {
    if (marker.empty()) throw Error("empty case marker in sense '" + entry.sense + "'");
    if (words.empty())
      throw Error("case '" + marker + "' of sense '" + entry.sense + "' has no example fillers");
    auto& set = entry.frame[marker];
    for (const auto& w : words) set.add(thesaurus_->resolve(w));
  }

  auto [it, inserted] = verb_lookup_.try_emplace(entry.verb, verbs_.size());
  if (inserted) verbs_.push_back(VerbEntry{entry.verb, {}});
  auto& ve = verbs_[it->second];
  if (ve.sense_index(entry.sense))
    throw Error("duplicate sense id '" + entry.sense + "' for verb '" + entry.verb + "'");
  ve.senses.push_back(std::move(entry));
  ++version_;
}

Database Database::load_jsonl(std::istream& in, std::shared_ptr<const Thesaurus> thesaurus,
                              FramePolicy policy) {
  Database db(std::move(thesaurus), policy);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = json::parse(line);
      if (!j.is_object()) throw ParseError("record is not an object");
      for (const char* key : {"verb", "sense"})
        if (!j.contains(key) || !j[key].is_string())
          throw ParseError(std::string("missing string \"") + key + "\"");
      if (!j.contains("frame") || !j["frame"].is_object()) throw ParseError("missing object \"frame\"");
      std::map<std::string, std::vector<std::string>> frame;
      for (const auto& [marker, fillers] : j["frame"].items()) {
        if (!fillers.is_array()) throw ParseError("fillers of case '" + marker + "' must be an array");
        auto& out = frame[marker];
        for (const auto& f : fillers) {
          if (!f.is_string()) throw ParseError("fillers must be strings");
          out.push_back(f.get<std::string>());
        }
      }
      std::string gloss = j.contains("gloss") && j["gloss"].is_string() ? j["gloss"].get<std::string>() : "";
      db.add_sense(j["verb"].get<std::string>(), j["sense"].get<std::string>(), gloss, frame);
    } catch (const json::exception& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), lineno);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), lineno);
    } catch (const Error& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  if (db.verbs_.empty()) throw ParseError("seed file contains no sense entries");
  return db;
}

Database Database::load_file(const std::string& path, std::shared_ptr<const Thesaurus> thesaurus,
                             FramePolicy policy) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open seed file '" + path + "'");
  try {
    return load_jsonl(in, std::move(thesaurus), policy);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void Database::save_jsonl(std::ostream& out) const {
  for (const auto& ve : verbs_) {
    for (const auto& s : ve.senses) {
      json j;
      j["verb"] = s.verb;
      j["sense"] = s.sense;
      if (!s.gloss.empty()) j["gloss"] = s.gloss;
      auto& frame = j["frame"] = json::object();
      for (const auto& [marker, set] : s.frame) {
        auto& arr = frame[marker] = json::array();
        for (const auto& t : set.items()) arr.push_back(t.word);
      }
      out << j.dump() << '\n';
    }
  }
}

void Database::validate(const SentenceExample& x) const {
  if (x.id.empty()) throw Error("sentence with empty id");
  const auto* ve = find_verb(x.verb);
  if (!ve) throw Error("sentence '" + x.id + "': verb '" + x.verb + "' has no database entry");
  if (x.complements.empty()) throw Error("sentence '" + x.id + "' has no complements");
  std::set<std::string_view> seen;
  for (const auto& c : x.complements) {
    if (c.marker.empty() || c.noun.empty())
      throw Error("sentence '" + x.id + "' has an empty case marker or noun");
    if (!seen.insert(c.marker).second)
      throw Error("sentence '" + x.id + "' repeats case marker '" + c.marker + "'");
  }
  if (x.gold && !ve->sense_index(*x.gold))
    throw Error("sentence '" + x.id + "': gold sense '" + *x.gold + "' is not a sense of '" + x.verb + "'");
}

CommitResult Database::commit(const SentenceExample& x, std::string_view sense) {
  auto vi = verb_index(x.verb);
  if (!vi) throw Error("cannot commit '" + x.id + "': unknown verb '" + x.verb + "'");
  auto& ve = verbs_[*vi];
  auto si = ve.sense_index(sense);
  if (!si)
    throw Error("cannot commit '" + x.id + "': '" + std::string(sense) + "' is not a sense of '" + x.verb + "'");
  auto& entry = ve.senses[*si];

  CommitResult result{*vi, *si, false};
  for (const auto& c : x.complements) {
    if (!entry.has_case(c.marker)) {
      if (policy_ == FramePolicy::Reject)
        throw Error("cannot commit '" + x.id + "': case '" + c.marker + "' is not subcategorized by sense '" +
                    entry.sense + "'");
      result.frame_extended = true;
    }
  }
  for (const auto& c : x.complements) entry.frame[c.marker].add(thesaurus_->resolve(c.noun));
  ++version_;
  return result;
}

const VerbEntry* Database::find_verb(std::string_view verb) const {
  auto it = verb_lookup_.find(std::string(verb));
  return it == verb_lookup_.end() ? nullptr : &verbs_[it->second];
}

std::optional<std::size_t> Database::verb_index(std::string_view verb) const {
  auto it = verb_lookup_.find(std::string(verb));
  if (it == verb_lookup_.end()) return std::nullopt;
  return it->second;
}

std::size_t Database::sense_count() const {
  std::size_t n = 0;
  for (const auto& ve : verbs_) n += ve.senses.size();
  return n;
}

std::size_t Database::filler_count() const {
  std::size_t n = 0;
  for (const auto& ve : verbs_)
    for (const auto& s : ve.senses)
      for (const auto& [m, set] : s.frame) n += set.size();
  return n;
}

std::size_t Database::case_count() const {
  std::size_t n = 0;
  for (const auto& ve : verbs_)
    for (const auto& s : ve.senses) n += s.frame.size();
  return n;
}

double Database::mean_fillers_per_case() const {
  auto cases = case_count();
  return cases ? static_cast<double>(filler_count()) / static_cast<double>(cases) : 0.0;
}

Database Database::restricted_to(std::string_view verb) const {
  const auto* ve = find_verb(verb);
  if (!ve) throw Error("no database entry for verb '" + std::string(verb) + "'");
  Database out(thesaurus_, policy_);
  out.verb_lookup_.emplace(ve->verb, 0);
  out.verbs_.push_back(*ve);
  return out;
}

bool operator==(const Database& a, const Database& b) {
  if (a.verbs_.size() != b.verbs_.size()) return false;
  for (std::size_t i = 0; i < a.verbs_.size(); ++i) {
    const auto& va = a.verbs_[i];
    const auto& vb = b.verbs_[i];
    if (va.verb != vb.verb || va.senses.size() != vb.senses.size()) return false;
    for (std::size_t s = 0; s < va.senses.size(); ++s) {
      const auto& sa = va.senses[s];
      const auto& sb = vb.senses[s];
      if (sa.sense != sb.sense || sa.gloss != sb.gloss || sa.frame != sb.frame) return false;
    }
  }
  return true;
}

}  // namespace exsel

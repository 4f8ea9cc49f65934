#include "exsel/session.hpp"

#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>

#include "httplib.h"

namespace exsel {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "exsel-session/1";

std::vector<SentenceExample> hide_gold(std::vector<SentenceExample> corpus) {
  for (auto& x : corpus) x.gold.reset();
  return corpus;
}

json database_records(const Database& db) {
  std::ostringstream out;
  db.save_jsonl(out);
  std::istringstream in(out.str());
  json records = json::array();
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) records.push_back(json::parse(line));
  return records;
}

json error_body(const std::string& message) { return {{"error", message}}; }

}  // namespace

AnnotationSession::AnnotationSession(Database seeds, std::vector<SentenceExample> corpus, SamplerParams params,
                                     std::optional<std::string> state_path)
    : sampler_(std::make_unique<Sampler>(std::move(seeds), hide_gold(std::move(corpus)), params)),
      state_path_(std::move(state_path)) {
  for (std::size_t i = 0; i < sampler_->size(); ++i)
    if (!index_of_.emplace(sampler_->example(i).id, i).second)
      throw Error("duplicate sentence id '" + sampler_->example(i).id + "'");
  persist();
}

AnnotationSession::AnnotationSession(Resumed, Database db, std::vector<SentenceExample> corpus,
                                     SamplerParams params, std::string state_path,
                                     const std::vector<std::pair<std::string, std::string>>& labeled)
    : sampler_(std::make_unique<Sampler>(std::move(db), hide_gold(std::move(corpus)), params)),
      state_path_(std::move(state_path)) {
  for (std::size_t i = 0; i < sampler_->size(); ++i)
    if (!index_of_.emplace(sampler_->example(i).id, i).second)
      throw Error("duplicate sentence id '" + sampler_->example(i).id + "'");
  for (const auto& [id, sense] : labeled) {
    auto it = index_of_.find(id);
    if (it == index_of_.end()) throw Error("session file labels '" + id + "', which is not in the corpus");
    const auto& verb = *sampler_->database().find_verb(sampler_->example(it->second).verb);
    if (!verb.sense_index(sense)) throw Error("session file labels '" + id + "' with unknown sense '" + sense + "'");
    sampler_->restore_labeled(it->second, sense);
  }
}

std::unique_ptr<AnnotationSession> AnnotationSession::resume(const std::string& state_path,
                                                             std::shared_ptr<const Thesaurus> thesaurus,
                                                             std::vector<SentenceExample> corpus,
                                                             SamplerParams params) {
  std::ifstream in(state_path);
  if (!in) throw Error("cannot open session file '" + state_path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(state_path + ": " + e.what());
  }
  if (!j.is_object() || j.value("format", "") != kFormat)
    throw ParseError(state_path + ": not an " + std::string(kFormat) + " file");

  std::ostringstream records;
  std::vector<std::pair<std::string, std::string>> labeled;
  try {
    for (const auto& r : j.at("database")) records << r.dump() << '\n';
    for (const auto& l : j.at("labeled"))
      labeled.emplace_back(l.at("id").get<std::string>(), l.at("sense").get<std::string>());
  } catch (const json::exception& e) {
    throw ParseError(state_path + ": " + e.what());
  }
  std::istringstream db_in(records.str());
  auto db = Database::load_jsonl(db_in, std::move(thesaurus));
  return std::unique_ptr<AnnotationSession>(
      new AnnotationSession(Resumed{}, std::move(db), std::move(corpus), params, state_path, labeled));
}

json AnnotationSession::next_locked() const {
  const auto& s = *sampler_;
  auto picks = s.select_samples();
  if (picks.empty()) return {{"done", true}, {"labeled", s.labeled_size()}, {"total", s.size()}};

  auto x = picks.front();
  const auto& ex = s.example(x);
  const auto& row = s.cache().row(x);
  const auto& verb = s.database().verb(row.verb);

  json complements = json::array();
  for (const auto& c : ex.complements) complements.push_back({{"case", c.marker}, {"noun", c.noun}});
  json candidates = json::array();
  for (auto sense : s.cache().ranking(x)) {
    auto slot = static_cast<std::size_t>(row.position[sense]);
    json per_case = json::object();
    for (std::size_t c = 0; c < row.case_count(); ++c) per_case[row.markers[c]] = row.cell(slot, c);
    candidates.push_back({{"sense", verb.senses[sense].sense},
                          {"gloss", verb.senses[sense].gloss},
                          {"score", row.scores[slot]},
                          {"per_case_sim", per_case}});
  }
  return {{"done", false},
          {"example_id", ex.id},
          {"verb", ex.verb},
          {"complements", complements},
          {"candidates", candidates},
          {"certainty", row.certainty},
          {"tuf", s.tuf(x)},
          {"frame_mismatch", row.layout.frame_mismatch},
          {"labeled", s.labeled_size()},
          {"total", s.size()}};
}

SessionReply AnnotationSession::next() const {
  std::shared_lock lock(mutex_);
  return {200, next_locked()};
}

SessionReply AnnotationSession::label(const std::string& example_id, const std::string& sense_id) {
  std::unique_lock lock(mutex_);
  auto it = index_of_.find(example_id);
  if (it == index_of_.end()) return {404, error_body("unknown example id '" + example_id + "'")};
  auto x = it->second;
  if (!sampler_->in_pool(x)) return {409, error_body("example '" + example_id + "' is already labeled")};
  try {
    sampler_->commit_and_update(x, sense_id);
  } catch (const Error& e) {
    return {400, error_body(e.what())};
  }
  sampler_->refresh_ccd();
  persist();
  return {200, next_locked()};
}

SessionReply AnnotationSession::label_request(const std::string& body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception&) {
    return {400, error_body("request body is not JSON")};
  }
  if (!j.is_object() || !j.contains("example_id") || !j.contains("sense_id") || !j["sense_id"].is_string())
    return {400, error_body("expected {\"example_id\": .., \"sense_id\": ..}")};
  std::string id;
  if (j["example_id"].is_string())
    id = j["example_id"].get<std::string>();
  else if (j["example_id"].is_number_integer())
    id = std::to_string(j["example_id"].get<long long>());
  else
    return {400, error_body("\"example_id\" must be a string or integer")};
  return label(id, j["sense_id"].get<std::string>());
}

SessionReply AnnotationSession::state() const {
  std::shared_lock lock(mutex_);
  const auto& s = *sampler_;
  return {200,
          {{"labeled", s.labeled_size()},
           {"pool", s.pool_size()},
           {"total", s.size()},
           {"senses", s.database().sense_count()},
           {"fillers", s.database().filler_count()}}};
}

Database AnnotationSession::database() const {
  std::shared_lock lock(mutex_);
  return sampler_->database();
}

json AnnotationSession::state_json() const {
  const auto& s = *sampler_;
  json labeled = json::array();
  for (const auto& [x, sense] : s.labeled()) labeled.push_back({{"id", s.example(x).id}, {"sense", sense}});
  json pool = json::array();
  for (auto x : s.pool()) pool.push_back(s.example(x).id);
  return {{"format", kFormat}, {"database", database_records(s.database())}, {"labeled", labeled}, {"pool", pool}};
}

void AnnotationSession::persist() const {
  if (!state_path_) return;
  namespace fs = std::filesystem;
  fs::path target(*state_path_);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write session file '" + tmp.string() + "'");
    out << state_json().dump() << '\n';
    if (!out.flush()) throw Error("cannot write session file '" + tmp.string() + "'");
  }
  fs::rename(tmp, target);
}

void mount_session(httplib::Server& server, AnnotationSession& session) {
  auto send = [](httplib::Response& res, const SessionReply& reply) {
    res.status = reply.status;
    res.set_content(reply.body.dump(), "application/json");
  };
  server.Get("/session/next", [&session, send](const httplib::Request&, httplib::Response& res) {
    send(res, session.next());
  });
  server.Get("/session/state", [&session, send](const httplib::Request&, httplib::Response& res) {
    send(res, session.state());
  });
  server.Post("/session/label", [&session, send](const httplib::Request& req, httplib::Response& res) {
    send(res, session.label_request(req.body));
  });
}

}  // namespace exsel

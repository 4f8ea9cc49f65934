#pragma once

#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "exsel/sampler.hpp"
#include "json.hpp"

namespace httplib {
class Server;
}

namespace exsel {

/// Reply of a session request: an HTTP status and a JSON body.
struct SessionReply {
  int status = 200;
  nlohmann::json body;
};

/// One annotator labeling one corpus.
///
/// Gold labels in the corpus are ignored. After every commit the database
/// and the labeled/pool partition are written to the session file, if one
/// is set, so the session can be resumed with `resume`.
class AnnotationSession {
public:
  AnnotationSession(Database seeds, std::vector<SentenceExample> corpus, SamplerParams params,
                    std::optional<std::string> state_path = std::nullopt);

  /// Reopens a session file written by a previous run over the same corpus.
  static std::unique_ptr<AnnotationSession> resume(const std::string& state_path,
                                                   std::shared_ptr<const Thesaurus> thesaurus,
                                                   std::vector<SentenceExample> corpus, SamplerParams params);

  SessionReply next() const;
  SessionReply label(const std::string& example_id, const std::string& sense_id);
  /// Parses a POST /session/label body before delegating to `label`.
  SessionReply label_request(const std::string& body);
  SessionReply state() const;

  /// Copy of the current database.
  Database database() const;
  nlohmann::json state_json() const;

private:
  struct Resumed {};
  AnnotationSession(Resumed, Database db, std::vector<SentenceExample> corpus, SamplerParams params,
                    std::string state_path, const std::vector<std::pair<std::string, std::string>>& labeled);

  nlohmann::json next_locked() const;
  void persist() const;

  mutable std::shared_mutex mutex_;
  std::unique_ptr<Sampler> sampler_;
  std::unordered_map<std::string, std::size_t> index_of_;
  std::optional<std::string> state_path_;
};

/// Registers GET /session/next, POST /session/label and GET /session/state.
void mount_session(httplib::Server& server, AnnotationSession& session);

}  // namespace exsel

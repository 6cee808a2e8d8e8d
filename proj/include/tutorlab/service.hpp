#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>

#include "tutorlab/platform/platform.hpp"

namespace httplib {
class Server;
}

namespace tutorlab {

struct HttpResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

// JSON-over-HTTP front of a Platform. handle() is transport independent;
// mount() registers the same routes on an httplib server.
//
//   POST /sessions                          {"participant_id", "seed"?}
//   GET  /sessions/{id}
//   GET  /sessions/{id}/step
//   POST /sessions/{id}/consent
//   POST /sessions/{id}/attention           {"definition"?, "color"?, "training_process"?}
//   POST /sessions/{id}/training/answer     {"review_id", "label"}
//   POST /sessions/{id}/advance
//   GET  /sessions/{id}/prediction/next
//   POST /sessions/{id}/prediction          {"review_id", "label", "trust_rating"?}
//   POST /sessions/{id}/survey              SurveyRecord
//   GET  /admin/responses[?format=csv]
//   GET  /admin/tallies
//
// Errors are {"error": kind, "message": text} with status 400 (validation),
// 404 (unknown session or route), 409 (state, timer, repeat participant) or
// 503 (enrollment closed).
class StudyService {
 public:
  explicit StudyService(std::shared_ptr<Platform> platform);

  HttpResponse handle(std::string_view method, std::string_view path, std::string_view body,
                      const std::map<std::string, std::string>& query = {});
  void mount(httplib::Server& server);

 private:
  HttpResponse route(std::string_view method, std::string_view path, std::string_view body,
                     const std::map<std::string, std::string>& query);

  std::shared_ptr<Platform> platform_;
};

}  // namespace tutorlab

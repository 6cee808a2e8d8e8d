#include "tutorlab/service.hpp"

#include <sstream>
#include <vector>

#include "httplib.h"

#include "tutorlab/analysis.hpp"
#include "tutorlab/errors.hpp"
#include "tutorlab/platform/wire.hpp"

namespace tutorlab {

using nlohmann::json;

namespace {

HttpResponse ok(const json& body, int status = 200) { return {status, "application/json", body.dump()}; }

HttpResponse error(int status, std::string_view kind, std::string_view message) {
  return ok(json{{"error", kind}, {"message", message}}, status);
}

std::vector<std::string_view> segments(std::string_view path) {
  std::vector<std::string_view> out;
  while (!path.empty()) {
    const auto start = path.find_first_not_of('/');
    if (start == std::string_view::npos) break;
    path.remove_prefix(start);
    const auto end = path.find('/');
    out.push_back(path.substr(0, end));
    if (end == std::string_view::npos) break;
    path.remove_prefix(end);
  }
  return out;
}

json parse_body(std::string_view body) {
  if (body.empty()) return json::object();
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded()) throw ValidationError("request body is not valid JSON");
  if (!j.is_object()) throw ValidationError("request body must be a JSON object");
  return j;
}

template <typename T>
T required(const json& j, const char* key) {
  if (!j.contains(key)) throw ValidationError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(std::string("field '") + key + "' has the wrong type");
  }
}

}  // namespace

StudyService::StudyService(std::shared_ptr<Platform> platform) : platform_(std::move(platform)) {}

HttpResponse StudyService::handle(std::string_view method, std::string_view path, std::string_view body,
                                  const std::map<std::string, std::string>& query) {
  try {
    return route(method, path, body, query);
  } catch (const ValidationError& e) {
    return error(400, "validation", e.what());
  } catch (const NotFound& e) {
    return error(404, "not_found", e.what());
  } catch (const TimerNotElapsed& e) {
    return error(409, "timer_not_elapsed", e.what());
  } catch (const StateError& e) {
    return error(409, "state", e.what());
  } catch (const DuplicateParticipant& e) {
    return error(409, "duplicate_participant", e.what());
  } catch (const EnrollmentClosed& e) {
    return error(503, "enrollment_closed", e.what());
  } catch (const json::exception& e) {
    return error(400, "validation", e.what());
  } catch (const std::exception& e) {
    return error(500, "internal", e.what());
  }
}

HttpResponse StudyService::route(std::string_view method, std::string_view path, std::string_view body,
                                 const std::map<std::string, std::string>& query) {
  const auto seg = segments(path);
  const bool get = method == "GET";
  const bool post = method == "POST";
  Platform& p = *platform_;

  if (seg.size() == 1 && seg[0] == "sessions" && post) {
    const json j = parse_body(body);
    std::optional<std::uint64_t> seed;
    if (j.contains("seed") && !j["seed"].is_null()) seed = required<std::uint64_t>(j, "seed");
    const Session s = p.create_session(required<std::string>(j, "participant_id"), seed);
    return ok(json(s), 201);
  }
  if (seg.size() == 2 && seg[0] == "admin" && get) {
    if (seg[1] == "tallies") {
      const auto tallies = p.tallies();
      json rows = json::array();
      for (std::size_t i = 0; i < tallies.size(); ++i) {
        rows.push_back({{"condition", p.conditions()[i]}, {"sessions", tallies[i]}, {"quota", p.config().quota}});
      }
      return ok(json{{"experiment", std::string(to_string(p.config().experiment))}, {"tallies", rows}});
    }
    if (seg[1] == "responses") {
      const auto sessions = p.sessions();
      const auto format = query.find("format");
      if (format != query.end() && format->second == "csv") {
        std::ostringstream os;
        write_responses_csv(os, sessions);
        return {200, "text/csv", os.str()};
      }
      if (format != query.end() && format->second != "json") {
        throw ValidationError("unknown export format '" + format->second + "'");
      }
      return ok(json{{"responses", responses_json(sessions)}});
    }
  }
  if (seg.size() >= 2 && seg[0] == "sessions") {
    const std::string id(seg[1]);
    const auto tail = std::vector<std::string_view>(seg.begin() + 2, seg.end());
    const auto is = [&](std::initializer_list<std::string_view> parts) {
      return std::equal(tail.begin(), tail.end(), parts.begin(), parts.end());
    };
    if (get && tail.empty()) return ok(json(p.session(id)));
    if (get && is({"step"})) return ok(p.current_step(id));
    if (post && is({"consent"})) {
      p.consent(id);
      return ok(p.current_step(id));
    }
    if (post && is({"attention"})) {
      const auto result = p.submit_attention_check(id, parse_body(body).get<AttentionAnswers>());
      return ok(json{{"passed", result.passed}, {"phase", result.phase}});
    }
    if (post && is({"training", "answer"})) {
      const json j = parse_body(body);
      return ok(json(p.submit_training_answer(id, required<std::string>(j, "review_id"),
                                              parse_label(required<std::string>(j, "label")))));
    }
    if (post && is({"advance"})) {
      p.advance(id);
      return ok(p.current_step(id));
    }
    if (get && is({"prediction", "next"})) return ok(json(p.next_prediction_item(id)));
    if (post && is({"prediction"})) {
      const json j = parse_body(body);
      std::optional<int> trust;
      if (j.contains("trust_rating") && !j["trust_rating"].is_null()) trust = required<int>(j, "trust_rating");
      return ok(json(p.submit_prediction(id, required<std::string>(j, "review_id"),
                                         parse_label(required<std::string>(j, "label")), trust)));
    }
    if (post && is({"survey"})) {
      p.submit_survey(id, parse_body(body).get<SurveyRecord>());
      return ok(p.current_step(id));
    }
  }
  throw NotFound("no route for " + std::string(method) + " " + std::string(path));
}

void StudyService::mount(httplib::Server& server) {
  const auto dispatch = [this](const httplib::Request& req, httplib::Response& res) {
    std::map<std::string, std::string> query;
    for (const auto& [k, v] : req.params) query[k] = v;
    const auto r = handle(req.method, req.path, req.body, query);
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  server.Get(".*", dispatch);
  server.Post(".*", dispatch);
}

}  // namespace tutorlab

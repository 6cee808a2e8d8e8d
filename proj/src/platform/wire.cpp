#include "tutorlab/platform/wire.hpp"

#include "tutorlab/errors.hpp"

namespace tutorlab {

using nlohmann::json;

void to_json(json& j, Label v) { j = std::string(to_string(v)); }
void from_json(const json& j, Label& v) { v = parse_label(j.get<std::string>()); }
void to_json(json& j, Phase v) { j = std::string(to_string(v)); }
void from_json(const json& j, Phase& v) { v = parse_phase(j.get<std::string>()); }

void to_json(json& j, const Condition& c) {
  j = json{{"experiment", std::string(to_string(c.experiment))},
           {"tutorial", std::string(to_string(c.tutorial))},
           {"assistance", std::string(to_string(c.assistance))},
           {"importance_method", std::string(to_string(c.importance_method))},
           {"key", c.key()}};
}

void from_json(const json& j, Condition& c) {
  c.experiment = parse_experiment(j.at("experiment").get<std::string>());
  c.tutorial = parse_tutorial_kind(j.at("tutorial").get<std::string>());
  c.assistance = parse_assistance(j.at("assistance").get<std::string>());
  c.importance_method = parse_importance_method(j.at("importance_method").get<std::string>());
}

void to_json(json& j, const AttentionAnswers& a) {
  j = json::object();
  if (a.definition) j["definition"] = *a.definition;
  if (a.color) j["color"] = *a.color;
  if (a.training_process) j["training_process"] = *a.training_process;
}

void from_json(const json& j, AttentionAnswers& a) {
  if (!j.is_object()) throw ValidationError("attention answers must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "definition" && value.is_string()) {
      a.definition = value.get<std::string>();
    } else if (key == "color" && value.is_string()) {
      a.color = value.get<std::string>();
    } else if (key == "training_process" && value.is_boolean()) {
      a.training_process = value.get<bool>();
    } else {
      throw ValidationError("unexpected attention answer field '" + key + "'");
    }
  }
}

void to_json(json& j, const SurveyRecord& s) {
  j = json{{"age_band", s.age_band}, {"gender", s.gender}, {"education", s.education}, {"free_text", s.free_text}};
  j["tutorial_useful"] = s.tutorial_useful ? json(*s.tutorial_useful) : json(nullptr);
}

void from_json(const json& j, SurveyRecord& s) {
  if (!j.is_object()) throw ValidationError("survey must be an object");
  s.age_band = j.value("age_band", "");
  s.gender = j.value("gender", "");
  s.education = j.value("education", "");
  s.free_text = j.value("free_text", "");
  s.tutorial_useful.reset();
  if (j.contains("tutorial_useful") && !j["tutorial_useful"].is_null()) {
    if (!j["tutorial_useful"].is_boolean()) throw ValidationError("tutorial_useful must be a boolean");
    s.tutorial_useful = j["tutorial_useful"].get<bool>();
  }
}

void to_json(json& j, const TrainingStep& s) {
  j = json{{"kind", s.kind == TrainingStep::Kind::guidelines ? "guidelines" : "example"},
           {"timer_s", s.timer_s},
           {"review_id", s.review_id}};
}

void from_json(const json& j, TrainingStep& s) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "guidelines") {
    s.kind = TrainingStep::Kind::guidelines;
  } else if (kind == "example") {
    s.kind = TrainingStep::Kind::example;
  } else {
    throw ValidationError("unknown training step kind '" + kind + "'");
  }
  s.timer_s = j.at("timer_s").get<int>();
  s.review_id = j.at("review_id").get<std::string>();
}

void to_json(json& j, const PredictionResponse& r) {
  j = json{{"review_id", r.review_id},     {"chosen_label", r.chosen_label}, {"correct", r.correct},
           {"elapsed_ms", r.elapsed_ms},   {"model_label", r.model_label},   {"model_correct", r.model_correct}};
  j["trust_rating"] = r.trust_rating ? json(*r.trust_rating) : json(nullptr);
}

void to_json(json& j, const HighlightSet& h) {
  j = json::array();
  for (const auto& s : h.spans) {
    j.push_back({{"begin", s.begin},
                 {"end", s.end},
                 {"token", s.token},
                 {"feature", s.feature},
                 {"polarity", std::string(to_string(s.polarity))},
                 {"intensity", s.intensity}});
  }
}

void to_json(json& j, const Session& s) {
  j = json{{"session_id", s.session_id},
           {"participant_id", s.participant_id},
           {"condition", s.condition},
           {"phase", s.phase},
           {"prediction_items", s.prediction_items},
           {"responses", s.responses},
           {"bonus_cents", s.bonus_cents},
           {"disqualified", s.disqualified},
           {"seed", s.seed}};
  j["survey"] = s.survey ? json(*s.survey) : json(nullptr);
}

}  // namespace tutorlab

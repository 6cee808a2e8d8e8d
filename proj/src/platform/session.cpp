#include "tutorlab/platform/session.hpp"

#include <algorithm>

#include "tutorlab/errors.hpp"
#include "tutorlab/platform/wire.hpp"

namespace tutorlab {
namespace {

using nlohmann::json;

void expect_phase(const Session& s, Phase phase, const Event& e) {
  if (s.phase != phase) {
    throw IntegrityError("event " + std::to_string(e.seq) + " (" + e.type + ") arrived in phase " +
                         std::string(to_string(s.phase)));
  }
}

[[noreturn]] void reject(const Event& e, const std::string& why) {
  throw IntegrityError("event " + std::to_string(e.seq) + " (" + e.type + "): " + why);
}

void enter_prediction(Session& s, std::int64_t t) {
  s.phase = Phase::prediction;
  s.prediction_reference_ms = t;
  s.item_shown_ms.reset();
}

void start_step(Session& s, std::int64_t t) {
  const TrainingStep* step = s.current_training_step();
  if (step && step->kind == TrainingStep::Kind::guidelines) {
    s.gate_started_ms = t;
  } else {
    s.gate_started_ms.reset();
  }
}

}  // namespace

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::consent: return "consent";
    case Phase::attention_check: return "attention_check";
    case Phase::training: return "training";
    case Phase::prediction: return "prediction";
    case Phase::survey: return "survey";
    case Phase::done: return "done";
  }
  return "consent";
}

Phase parse_phase(std::string_view text) {
  for (const auto p : {Phase::consent, Phase::attention_check, Phase::training, Phase::prediction, Phase::survey,
                       Phase::done}) {
    if (to_string(p) == text) return p;
  }
  throw ValidationError("unknown phase '" + std::string(text) + "'");
}

std::vector<TrainingStep> training_steps_for(const TutorialPlan& plan) {
  std::vector<TrainingStep> steps;
  const auto add_guidelines = [&](int timer) {
    steps.push_back({TrainingStep::Kind::guidelines, timer, ""});
  };
  if (plan.kind == TutorialPlanKind::guidelines || plan.kind == TutorialPlanKind::combined) {
    add_guidelines(plan.pre_guidelines_timer_s);
  }
  if (plan.kind == TutorialPlanKind::examples || plan.kind == TutorialPlanKind::combined) {
    for (const auto& item : plan.items) {
      steps.push_back({TrainingStep::Kind::example, item.reveal_timer_s, item.review_id});
    }
  }
  if (plan.kind == TutorialPlanKind::combined) add_guidelines(plan.post_guidelines_timer_s);
  return steps;
}

std::size_t Session::correct_count() const {
  return static_cast<std::size_t>(
      std::count_if(responses.begin(), responses.end(), [](const PredictionResponse& r) { return r.correct; }));
}

std::optional<std::string> Session::current_prediction_item() const {
  if (phase != Phase::prediction || responses.size() >= prediction_items.size()) return std::nullopt;
  return prediction_items[responses.size()];
}

const TrainingStep* Session::current_training_step() const {
  return training_step < training_steps.size() ? &training_steps[training_step] : nullptr;
}

bool Session::current_example_answered() const {
  const TrainingStep* step = current_training_step();
  return step && step->kind == TrainingStep::Kind::example && gate_started_ms.has_value();
}

void Session::apply(const Event& e) {
  const std::int64_t t = e.t_ms;
  try {
    if (e.type == "created") {
      if (!session_id.empty()) reject(e, "session already created");
      session_id = e.session_id;
      participant_id = e.data.at("participant_id").get<std::string>();
      condition = e.data.at("condition").get<Condition>();
      prediction_items = e.data.at("items").get<std::vector<std::string>>();
      item_block = e.data.at("block").get<std::size_t>();
      seed = e.data.at("seed").get<std::uint64_t>();
      training_steps = e.data.at("training_steps").get<std::vector<TrainingStep>>();
      created_ms = t;
      phase = Phase::consent;
    } else if (e.type == "consented") {
      expect_phase(*this, Phase::consent, e);
      phase = Phase::attention_check;
    } else if (e.type == "attention") {
      expect_phase(*this, Phase::attention_check, e);
      if (e.data.at("passed").get<bool>()) {
        if (training_steps.empty()) {
          enter_prediction(*this, t);
        } else {
          phase = Phase::training;
          training_step = 0;
          start_step(*this, t);
        }
      } else {
        disqualified = true;
        phase = Phase::done;
      }
    } else if (e.type == "training_answer") {
      expect_phase(*this, Phase::training, e);
      const TrainingStep* step = current_training_step();
      const auto review_id = e.data.at("review_id").get<std::string>();
      if (!step || step->kind != TrainingStep::Kind::example || step->review_id != review_id) {
        reject(e, "answer does not match the current training example");
      }
      if (gate_started_ms) reject(e, "example already answered");
      training_answers.push_back(
          {review_id, e.data.at("label").get<Label>(), e.data.at("correct").get<bool>()});
      gate_started_ms = t;
    } else if (e.type == "advanced") {
      expect_phase(*this, Phase::training, e);
      const TrainingStep* step = current_training_step();
      if (!step || !gate_started_ms) reject(e, "advance before the step's gate opened");
      if (t - *gate_started_ms < static_cast<std::int64_t>(step->timer_s) * 1000) {
        reject(e, "advance before the timer elapsed");
      }
      ++training_step;
      if (training_step == training_steps.size()) {
        gate_started_ms.reset();
        enter_prediction(*this, t);
      } else {
        start_step(*this, t);
      }
    } else if (e.type == "item_shown") {
      expect_phase(*this, Phase::prediction, e);
      if (current_prediction_item() != e.data.at("review_id").get<std::string>()) {
        reject(e, "shown item is not the current item");
      }
      if (!item_shown_ms) item_shown_ms = t;
    } else if (e.type == "prediction") {
      expect_phase(*this, Phase::prediction, e);
      PredictionResponse r;
      r.review_id = e.data.at("review_id").get<std::string>();
      if (current_prediction_item() != r.review_id) reject(e, "response is not for the current item");
      r.chosen_label = e.data.at("label").get<Label>();
      r.correct = e.data.at("correct").get<bool>();
      if (!e.data.at("trust").is_null()) r.trust_rating = e.data["trust"].get<int>();
      r.elapsed_ms = e.data.at("elapsed_ms").get<std::int64_t>();
      r.model_label = e.data.at("model_label").get<Label>();
      r.model_correct = e.data.at("model_correct").get<bool>();
      responses.push_back(std::move(r));
      if (responses.back().correct) bonus_cents += kBonusCentsPerCorrect;
      item_shown_ms.reset();
      prediction_reference_ms = t;
      if (responses.size() == prediction_items.size()) phase = Phase::survey;
    } else if (e.type == "survey") {
      expect_phase(*this, Phase::survey, e);
      survey = e.data.at("survey").get<SurveyRecord>();
      phase = Phase::done;
    } else {
      reject(e, "unknown event type");
    }
  } catch (const nlohmann::json::exception& err) {
    throw IntegrityError("event " + std::to_string(e.seq) + " (" + e.type + "): malformed payload: " + err.what());
  } catch (const ValidationError& err) {
    throw IntegrityError("event " + std::to_string(e.seq) + " (" + e.type + "): " + err.what());
  }
}

Session restore_session(std::span<const Event> events, std::string_view session_id) {
  Session s;
  bool found = false;
  for (const auto& e : events) {
    if (e.session_id != session_id) continue;
    if (!found && e.type != "created") {
      throw IntegrityError("session " + std::string(session_id) + " has events before its creation");
    }
    found = true;
    s.apply(e);
  }
  if (!found) throw NotFound("no session '" + std::string(session_id) + "' in the log");
  return s;
}

Session restore_session(const EventStore& store, std::string_view session_id) {
  const auto events = store.read_all();
  return restore_session(events, session_id);
}

}  // namespace tutorlab

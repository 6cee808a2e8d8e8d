#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tutorlab/corpus.hpp"
#include "tutorlab/platform/condition.hpp"
#include "tutorlab/platform/event_store.hpp"

namespace tutorlab {

inline constexpr std::size_t kPredictionItemsPerSession = 20;
inline constexpr int kBonusCentsPerCorrect = 5;

enum class Phase { consent, attention_check, training, prediction, survey, done };
std::string_view to_string(Phase phase);
Phase parse_phase(std::string_view text);

struct PredictionResponse {
  std::string review_id;
  Label chosen_label = Label::genuine;
  bool correct = false;
  std::optional<int> trust_rating;
  std::int64_t elapsed_ms = 0;
  // Model baseline on the same review, recorded when the answer arrives.
  Label model_label = Label::genuine;
  bool model_correct = false;

  friend bool operator==(const PredictionResponse&, const PredictionResponse&) = default;
};

struct TrainingAnswer {
  std::string review_id;
  Label chosen_label = Label::genuine;
  bool correct = false;
  friend bool operator==(const TrainingAnswer&, const TrainingAnswer&) = default;
};

struct SurveyRecord {
  std::string age_band;
  std::string gender;
  std::string education;
  std::optional<bool> tutorial_useful;
  std::string free_text;
  friend bool operator==(const SurveyRecord&, const SurveyRecord&) = default;
};

// Answers to the attention checks that apply to the session's condition;
// checks that do not apply must be left empty.
struct AttentionAnswers {
  std::optional<std::string> definition;
  std::optional<std::string> color;
  std::optional<bool> training_process;
  friend bool operator==(const AttentionAnswers&, const AttentionAnswers&) = default;
};

// One screen of the training phase.
struct TrainingStep {
  enum class Kind { guidelines, example };
  Kind kind = Kind::guidelines;
  int timer_s = 0;
  std::string review_id;  // example steps only
  friend bool operator==(const TrainingStep&, const TrainingStep&) = default;
};

std::vector<TrainingStep> training_steps_for(const TutorialPlan& plan);

// A participant's session, rebuilt entirely by folding its events with
// apply(). All validation that depends on study materials happens before an
// event is written; apply() re-checks only what the log itself must satisfy.
struct Session {
  std::string session_id;
  std::string participant_id;
  Condition condition;
  Phase phase = Phase::consent;
  std::vector<std::string> prediction_items;
  std::vector<PredictionResponse> responses;
  std::vector<TrainingAnswer> training_answers;
  std::optional<SurveyRecord> survey;
  std::uint64_t seed = 0;
  int bonus_cents = 0;
  bool disqualified = false;
  std::size_t item_block = 0;
  std::vector<TrainingStep> training_steps;
  std::int64_t created_ms = 0;

  // Training progress. A gate opens when its step starts (guidelines) or
  // when the example is answered; nullopt means not started.
  std::size_t training_step = 0;
  std::optional<std::int64_t> gate_started_ms;
  // Prediction clock: when the current item was first served, falling back
  // to the moment the previous item was answered.
  std::optional<std::int64_t> item_shown_ms;
  std::int64_t prediction_reference_ms = 0;

  bool completed_predictions() const { return responses.size() == prediction_items.size() && !prediction_items.empty(); }
  std::size_t correct_count() const;
  std::optional<std::string> current_prediction_item() const;
  const TrainingStep* current_training_step() const;
  bool current_example_answered() const;

  // Throws IntegrityError when the event does not fit the current state.
  void apply(const Event& event);

  friend bool operator==(const Session&, const Session&) = default;
};

// Folds the events that belong to session_id.
Session restore_session(std::span<const Event> events, std::string_view session_id);
Session restore_session(const EventStore& store, std::string_view session_id);

}  // namespace tutorlab

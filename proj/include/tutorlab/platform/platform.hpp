#pragma once

#include "json.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tutorlab/classifier.hpp"
#include "tutorlab/corpus.hpp"
#include "tutorlab/explainer.hpp"
#include "tutorlab/platform/condition.hpp"
#include "tutorlab/platform/event_store.hpp"
#include "tutorlab/platform/session.hpp"
#include "tutorlab/tutorial.hpp"

namespace tutorlab {

inline constexpr std::string_view kAccuracyStatement = "It has an accuracy of approximately 86%";
inline constexpr std::size_t kDefaultQuota = 80;
inline constexpr std::size_t kTutorialBudget = 10;

// Everything a running study reads but never modifies.
struct StudyMaterials {
  std::vector<Review> test_reviews;
  std::shared_ptr<const Vocabulary> vocab;
  std::shared_ptr<const Predictor> predictor;
  // Model label per test review, the baseline participants are compared to.
  std::map<std::string, Label, std::less<>> model_labels;
  // Rows covering every test review, per importance method in use.
  std::map<ImportanceMethod, ImportanceMatrix> prediction_importance;
  std::map<std::pair<TutorialKind, ImportanceMethod>, TutorialPlan> plans;
  GuidelineDoc guidelines;

  const TutorialPlan& plan_for(const Condition& condition) const;
};

struct MaterialsOptions {
  std::size_t tutorial_budget = kTutorialBudget;
  std::uint64_t seed = 0;
  // Required for exp3: rows for training and test reviews.
  std::optional<ImportanceMatrix> attention;
  std::optional<ImportanceMatrix> external_lime;
};

// Builds coefficient highlights, tutorial selections (random, greedy
// coverage, greedy spaced repetition over correctly classified training
// reviews) and plans for every condition of the experiment.
StudyMaterials build_study_materials(Experiment experiment, std::span<const Review> reviews,
                                     std::shared_ptr<const LinearModel> model,
                                     std::shared_ptr<const Vocabulary> vocab, GuidelineDoc guidelines,
                                     const MaterialsOptions& options = {});

struct PlatformConfig {
  Experiment experiment = Experiment::exp1;
  std::size_t quota = kDefaultQuota;
  std::size_t items_per_session = kPredictionItemsPerSession;
  std::uint64_t seed = 0;
};

using Clock = std::function<std::int64_t()>;
// Wall-clock milliseconds since the epoch, so timers survive a restart.
Clock system_clock_ms();

// Per-condition prediction item allocation. Each condition draws from an
// endless stream of seeded permutations of the test ids; block b holds stream
// positions [b*k, (b+1)*k). When the first q blocks are in use every review
// is covered q*k/N times. Blocks of disqualified sessions are handed out
// again before new ones.
class ItemScheduler {
 public:
  ItemScheduler(std::vector<std::string> test_ids, std::size_t conditions, std::size_t items_per_block,
                std::uint64_t seed);

  std::size_t acquire(std::size_t condition);
  void release(std::size_t condition, std::size_t block);
  // Replay: marks a block as taken without drawing.
  void mark_taken(std::size_t condition, std::size_t block);
  std::vector<std::string> items(std::size_t condition, std::size_t block);

 private:
  struct Stream {
    std::vector<std::vector<std::string>> permutations;
    std::size_t next_block = 0;
    std::set<std::size_t> released;
  };
  const std::vector<std::string>& permutation(std::size_t condition, std::size_t index);

  std::vector<std::string> ids_;
  std::size_t per_block_;
  std::uint64_t seed_;
  std::vector<Stream> streams_;
};

struct AttentionQuestion {
  std::string id;
  std::string prompt;
  nlohmann::json options;  // array of {value, text}
};

// Checks that apply to the condition, in display order.
std::vector<AttentionQuestion> attention_questions(const Condition& condition);

struct AttentionResult {
  bool passed = false;
  Phase phase = Phase::consent;
};

struct RevealPayload {
  std::string review_id;
  Label chosen_label = Label::genuine;
  Label actual_label = Label::genuine;
  Label predicted_label = Label::genuine;
  HighlightSet highlights;
  bool highlights_signed = true;
  int reveal_timer_s = 0;
};

struct RenderedItem {
  std::string review_id;
  std::string text;
  std::vector<std::string> tokens;
  std::size_t position = 0;  // 1-based
  std::size_t total = 0;
  std::optional<HighlightSet> highlights;
  bool highlights_signed = false;
  std::optional<Label> predicted_label;
  std::optional<std::vector<std::string>> guidelines;
  std::optional<std::string> accuracy_statement;
};

struct PredictionAck {
  bool correct = false;
  int bonus_cents = 0;
  std::size_t answered = 0;
  Phase phase = Phase::prediction;
};

// Runs one experiment. Every state change is an event appended to the store
// before it is applied; constructing a Platform over a non-empty store replays
// it. Operations on one session are serialized; different sessions proceed
// concurrently.
class Platform {
 public:
  Platform(PlatformConfig config, std::shared_ptr<const StudyMaterials> materials,
           std::shared_ptr<EventStore> store, Clock clock = system_clock_ms());

  const PlatformConfig& config() const { return config_; }
  const std::vector<Condition>& conditions() const { return conditions_; }
  const StudyMaterials& materials() const { return *materials_; }

  // Throws DuplicateParticipant or EnrollmentClosed. Without a seed one is
  // derived from the study seed and the participant id.
  Session create_session(const std::string& participant_id, std::optional<std::uint64_t> seed = std::nullopt);
  void consent(const std::string& session_id);
  AttentionResult submit_attention_check(const std::string& session_id, const AttentionAnswers& answers);
  RevealPayload submit_training_answer(const std::string& session_id, const std::string& review_id, Label label);
  // Moves past the current training screen; TimerNotElapsed while its gate
  // is still running, StateError when an example has not been answered.
  void advance(const std::string& session_id);
  RenderedItem next_prediction_item(const std::string& session_id);
  PredictionAck submit_prediction(const std::string& session_id, const std::string& review_id, Label label,
                                  std::optional<int> trust_rating = std::nullopt);
  void submit_survey(const std::string& session_id, const SurveyRecord& survey);

  // Wire view of what the session should display now.
  nlohmann::json current_step(const std::string& session_id);

  Session session(const std::string& session_id) const;
  std::vector<Session> sessions() const;
  // Non-disqualified sessions per condition, in conditions() order.
  std::vector<std::size_t> tallies() const;

 private:
  struct Entry {
    std::mutex mutex;
    Session session;
  };

  Entry& entry(const std::string& session_id) const;
  Event make_event(const Session& session, std::string type, nlohmann::json data) const;
  void commit(Entry& entry, Event event);
  void replay();
  std::size_t condition_index(const Condition& condition) const;
  const Review& test_review(std::string_view id) const;
  const TutorialItem& training_item(const Session& session) const;
  RenderedItem render(const Session& session, const Review& review) const;

  PlatformConfig config_;
  std::shared_ptr<const StudyMaterials> materials_;
  std::shared_ptr<EventStore> store_;
  Clock clock_;
  std::vector<Condition> conditions_;
  std::map<std::string, std::size_t, std::less<>> test_index_;

  mutable std::mutex registry_mutex_;
  std::map<std::string, std::unique_ptr<Entry>, std::less<>> sessions_;
  std::set<std::string, std::less<>> participants_;
  std::vector<std::size_t> tallies_;
  ItemScheduler scheduler_;
};

void to_json(nlohmann::json& j, const RevealPayload& r);
void to_json(nlohmann::json& j, const RenderedItem& r);
void to_json(nlohmann::json& j, const PredictionAck& a);
void to_json(nlohmann::json& j, const AttentionQuestion& q);

}  // namespace tutorlab

#include "tutorlab/platform/platform.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>

#include "tutorlab/errors.hpp"
#include "tutorlab/platform/wire.hpp"
#include "tutorlab/random.hpp"

namespace tutorlab {

using nlohmann::json;

namespace {

constexpr std::string_view kConsentText =
    "You will read hotel reviews and decide whether each one is genuine or deceptive. "
    "You earn a bonus of 5 cents for every correctly labeled review in the prediction phase. "
    "Participation is voluntary and you may stop at any time.";

const std::vector<std::pair<std::string, std::string>>& definition_options() {
  static const std::vector<std::pair<std::string, std::string>> options = {
      {"experienced", "Written by a guest describing a real stay at the hotel"},
      {"imagined", "Written by someone who never stayed at the hotel, imagining the experience"},
      {"staff", "Written by the hotel's own staff"},
  };
  return options;
}
constexpr std::string_view kDefinitionAnswer = "imagined";
constexpr std::string_view kColorAnswer = "red";

bool has_option(const AttentionQuestion& q, std::string_view value) {
  return std::any_of(q.options.begin(), q.options.end(),
                     [&](const json& o) { return o.at("value").get<std::string>() == value; });
}

}  // namespace

Clock system_clock_ms() {
  return [] {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
  };
}

// --- ItemScheduler ---------------------------------------------------------

ItemScheduler::ItemScheduler(std::vector<std::string> test_ids, std::size_t conditions, std::size_t items_per_block,
                             std::uint64_t seed)
    : ids_(std::move(test_ids)), per_block_(items_per_block), seed_(seed), streams_(conditions) {
  if (per_block_ == 0) throw ValidationError("items per session must be positive");
  if (ids_.size() < per_block_) {
    throw ValidationError("need at least " + std::to_string(per_block_) + " test reviews, have " +
                          std::to_string(ids_.size()));
  }
  // Blocks that straddle two permutations must be repairable without repeats.
  if (ids_.size() % per_block_ != 0 && ids_.size() < 2 * (per_block_ - 1)) {
    throw ValidationError("test review count must be a multiple of the items per session or at least twice it");
  }
}

const std::vector<std::string>& ItemScheduler::permutation(std::size_t condition, std::size_t index) {
  auto& perms = streams_.at(condition).permutations;
  while (perms.size() <= index) {
    const std::size_t k = perms.size();
    std::vector<std::string> perm = ids_;
    Rng rng(mix_seed(mix_seed(seed_, condition), k));
    shuffle_in_place(std::span<std::string>(perm), rng);
    if (k > 0) {
      // The head of this permutation may share a block with the tail of the
      // previous one; move any repeated id out of the head.
      const auto& prev = perms.back();
      const std::size_t h = per_block_ - 1;
      const std::set<std::string> tail(prev.end() - static_cast<std::ptrdiff_t>(std::min(h, prev.size())),
                                       prev.end());
      std::size_t j = h;
      for (std::size_t i = 0; i < h && i < perm.size(); ++i) {
        if (!tail.contains(perm[i])) continue;
        while (j < perm.size() && tail.contains(perm[j])) ++j;
        if (j == perm.size()) throw StateError("item stream cannot avoid a repeated review");
        std::swap(perm[i], perm[j]);
        ++j;
      }
    }
    perms.push_back(std::move(perm));
  }
  return perms[index];
}

std::size_t ItemScheduler::acquire(std::size_t condition) {
  auto& s = streams_.at(condition);
  if (!s.released.empty()) {
    const std::size_t b = *s.released.begin();
    s.released.erase(s.released.begin());
    return b;
  }
  return s.next_block++;
}

void ItemScheduler::release(std::size_t condition, std::size_t block) { streams_.at(condition).released.insert(block); }

void ItemScheduler::mark_taken(std::size_t condition, std::size_t block) {
  auto& s = streams_.at(condition);
  if (s.released.erase(block) == 0) {
    for (std::size_t b = s.next_block; b < block; ++b) s.released.insert(b);
    s.next_block = std::max(s.next_block, block + 1);
  }
}

std::vector<std::string> ItemScheduler::items(std::size_t condition, std::size_t block) {
  const std::size_t n = ids_.size();
  std::vector<std::string> out;
  out.reserve(per_block_);
  for (std::size_t pos = block * per_block_; pos < (block + 1) * per_block_; ++pos) {
    out.push_back(permutation(condition, pos / n)[pos % n]);
  }
  return out;
}

// --- attention checks ------------------------------------------------------

std::vector<AttentionQuestion> attention_questions(const Condition& condition) {
  std::vector<AttentionQuestion> out;
  AttentionQuestion def{"definition", "How are deceptive reviews defined in this study?", json::array()};
  for (const auto& [value, text] : definition_options()) def.options.push_back({{"value", value}, {"text", text}});
  out.push_back(std::move(def));
  if (condition.shows_signed_highlights()) {
    out.push_back({"color",
                   "Which highlight color marks words that point toward a deceptive review?",
                   json::array({json{{"value", "red"}, {"text", "Red"}},
                                json{{"value", "green"}, {"text", "Green"}},
                                json{{"value", "blue"}, {"text", "Blue"}}})});
  }
  if (condition.has_tutorial()) {
    const std::string prompt = condition.tutorial_has_examples()
                                   ? "True or false: in the training phase you choose a label for each example "
                                     "before its explanation is revealed."
                                   : "True or false: the training phase shows a list of guidelines before the "
                                     "prediction phase begins.";
    out.push_back({"training_process", prompt,
                   json::array({json{{"value", true}, {"text", "True"}}, json{{"value", false}, {"text", "False"}}})});
  }
  return out;
}

// --- Platform ----------------------------------------------------------------

namespace {

std::vector<std::string> test_ids_of(const StudyMaterials& m) {
  std::vector<std::string> ids;
  ids.reserve(m.test_reviews.size());
  for (const auto& r : m.test_reviews) ids.push_back(r.id);
  return ids;
}

}  // namespace

Platform::Platform(PlatformConfig config, std::shared_ptr<const StudyMaterials> materials,
                   std::shared_ptr<EventStore> store, Clock clock)
    : config_(config),
      materials_(std::move(materials)),
      store_(std::move(store)),
      clock_(std::move(clock)),
      conditions_(conditions_for(config.experiment)),
      tallies_(conditions_.size(), 0),
      scheduler_(test_ids_of(*materials_), conditions_.size(), config.items_per_session, config.seed) {
  if (!store_) throw ValidationError("platform needs an event store");
  for (std::size_t i = 0; i < materials_->test_reviews.size(); ++i) {
    const auto& r = materials_->test_reviews[i];
    if (r.split != Split::test) throw ValidationError("prediction review '" + r.id + "' is not in the test split");
    if (!test_index_.emplace(r.id, i).second) throw ValidationError("duplicate test review '" + r.id + "'");
    if (!materials_->model_labels.contains(r.id)) throw ValidationError("no model label for '" + r.id + "'");
  }
  for (const auto& c : conditions_) {
    c.validate();
    materials_->plan_for(c);
    if (c.prediction_shows_highlights()) {
      const auto it = materials_->prediction_importance.find(c.importance_method);
      if (it == materials_->prediction_importance.end()) {
        throw ValidationError("no importance rows for method " + std::string(to_string(c.importance_method)));
      }
      for (const auto& r : materials_->test_reviews) {
        if (!it->second.contains(r.id)) {
          throw NotFound("no " + std::string(to_string(c.importance_method)) + " importance row for '" + r.id + "'");
        }
      }
    }
  }
  replay();
}

void Platform::replay() {
  for (const auto& e : store_->read_all()) {
    if (e.type == "created") {
      if (sessions_.contains(e.session_id)) throw IntegrityError("session '" + e.session_id + "' created twice");
      auto entry = std::make_unique<Entry>();
      entry->session.apply(e);
      const auto& s = entry->session;
      if (s.condition.experiment != config_.experiment) {
        throw IntegrityError("log holds a session of " + std::string(to_string(s.condition.experiment)));
      }
      const std::size_t c = condition_index(s.condition);
      if (!participants_.insert(s.participant_id).second) {
        throw IntegrityError("participant '" + s.participant_id + "' has two sessions");
      }
      ++tallies_[c];
      scheduler_.mark_taken(c, s.item_block);
      sessions_.emplace(e.session_id, std::move(entry));
      continue;
    }
    const auto it = sessions_.find(e.session_id);
    if (it == sessions_.end()) throw IntegrityError("event for unknown session '" + e.session_id + "'");
    Session& s = it->second->session;
    s.apply(e);
    if (e.type == "attention" && s.disqualified) {
      const std::size_t c = condition_index(s.condition);
      --tallies_[c];
      scheduler_.release(c, s.item_block);
    }
  }
}

std::size_t Platform::condition_index(const Condition& condition) const {
  const auto it = std::find(conditions_.begin(), conditions_.end(), condition);
  if (it == conditions_.end()) throw IntegrityError("condition " + condition.key() + " is not part of the study");
  return static_cast<std::size_t>(it - conditions_.begin());
}

Platform::Entry& Platform::entry(const std::string& session_id) const {
  std::lock_guard lock(registry_mutex_);
  const auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw NotFound("unknown session '" + session_id + "'");
  return *it->second;
}

Event Platform::make_event(const Session& session, std::string type, json data) const {
  Event e;
  e.session_id = session.session_id;
  e.type = std::move(type);
  e.t_ms = clock_();
  e.data = std::move(data);
  return e;
}

void Platform::commit(Entry& entry, Event event) {
  // Apply to a copy first so a rejected event never reaches the log.
  Session next = entry.session;
  next.apply(event);
  store_->append(event);
  entry.session = std::move(next);
}

const Review& Platform::test_review(std::string_view id) const {
  const auto it = test_index_.find(id);
  if (it == test_index_.end()) throw NotFound("unknown test review '" + std::string(id) + "'");
  return materials_->test_reviews[it->second];
}

const TutorialItem& Platform::training_item(const Session& session) const {
  const TrainingStep* step = session.current_training_step();
  if (!step || step->kind != TrainingStep::Kind::example) throw StateError("the current training screen has no example");
  const auto& plan = materials_->plan_for(session.condition);
  const auto it = std::find_if(plan.items.begin(), plan.items.end(),
                               [&](const TutorialItem& item) { return item.review_id == step->review_id; });
  if (it == plan.items.end()) throw NotFound("training review '" + step->review_id + "' is not in the plan");
  return *it;
}

Session Platform::create_session(const std::string& participant_id, std::optional<std::uint64_t> seed) {
  if (participant_id.empty()) throw ValidationError("participant id must not be empty");
  std::lock_guard lock(registry_mutex_);
  if (participants_.contains(participant_id)) {
    throw DuplicateParticipant("participant '" + participant_id + "' already has a session");
  }
  const std::uint64_t participant_seed = mix_seed(config_.seed, stable_hash(participant_id));
  const std::size_t c = assign_condition(tallies_, config_.quota, participant_seed);
  const Condition& condition = conditions_[c];
  const std::size_t block = scheduler_.acquire(c);

  char id[32];
  std::snprintf(id, sizeof id, "s%06zu", sessions_.size() + 1);
  Event e;
  e.session_id = id;
  e.type = "created";
  e.t_ms = clock_();
  e.data = json{{"participant_id", participant_id},
                {"condition", condition},
                {"items", scheduler_.items(c, block)},
                {"block", block},
                {"seed", seed.value_or(participant_seed)},
                {"training_steps", training_steps_for(materials_->plan_for(condition))}};
  auto entry = std::make_unique<Entry>();
  try {
    entry->session.apply(e);
    store_->append(e);
  } catch (...) {
    scheduler_.release(c, block);
    throw;
  }
  participants_.insert(participant_id);
  ++tallies_[c];
  Session snapshot = entry->session;
  sessions_.emplace(id, std::move(entry));
  return snapshot;
}

void Platform::consent(const std::string& session_id) {
  Entry& en = entry(session_id);
  std::lock_guard lock(en.mutex);
  if (en.session.phase != Phase::consent) throw StateError("consent is only accepted in the consent phase");
  commit(en, make_event(en.session, "consented", json::object()));
}

AttentionResult Platform::submit_attention_check(const std::string& session_id, const AttentionAnswers& answers) {
  Entry& en = entry(session_id);
  std::lock_guard lock(en.mutex);
  const Session& s = en.session;
  if (s.phase != Phase::attention_check) throw StateError("session is not at the attention check");

  const auto questions = attention_questions(s.condition);
  const auto asked = [&](std::string_view id) {
    return std::any_of(questions.begin(), questions.end(), [&](const AttentionQuestion& q) { return q.id == id; });
  };
  const auto question = [&](std::string_view id) -> const AttentionQuestion& {
    return *std::find_if(questions.begin(), questions.end(), [&](const AttentionQuestion& q) { return q.id == id; });
  };
  const auto require = [&](bool present, std::string_view id) {
    if (present != asked(id)) {
      throw ValidationError(present ? "answer '" + std::string(id) + "' was not asked for this condition"
                                    : "missing answer '" + std::string(id) + "'");
    }
  };
  require(answers.definition.has_value(), "definition");
  require(answers.color.has_value(), "color");
  require(answers.training_process.has_value(), "training_process");
  if (answers.definition && !has_option(question("definition"), *answers.definition)) {
    throw ValidationError("unknown definition option '" + *answers.definition + "'");
  }
  if (answers.color && !has_option(question("color"), *answers.color)) {
    throw ValidationError("unknown color option '" + *answers.color + "'");
  }

  bool passed = answers.definition == kDefinitionAnswer;
  if (answers.color) passed = passed && *answers.color == kColorAnswer;
  if (answers.training_process) passed = passed && *answers.training_process;

  Event e = make_event(s, "attention", json{{"answers", answers}, {"passed", passed}});
  if (passed) {
    commit(en, std::move(e));
  } else {
    // Session lock, then registry lock: the released block must be in the log
    // before any session that reuses it.
    std::lock_guard registry(registry_mutex_);
    commit(en, std::move(e));
    const std::size_t c = condition_index(en.session.condition);
    --tallies_[c];
    scheduler_.release(c, en.session.item_block);
  }
  return {passed, en.session.phase};
}

RevealPayload Platform::submit_training_answer(const std::string& session_id, const std::string& review_id,
                                               Label label) {
  Entry& en = entry(session_id);
  std::lock_guard lock(en.mutex);
  const Session& s = en.session;
  if (s.phase != Phase::training) throw StateError("session is not in the training phase");
  const TutorialItem& item = training_item(s);
  if (item.review_id != review_id) {
    throw StateError("training answer for '" + review_id + "' but the current example is '" + item.review_id + "'");
  }
  if (s.current_example_answered()) throw StateError("the current example was already answered");
  commit(en, make_event(s, "training_answer",
                        json{{"review_id", review_id}, {"label", label}, {"correct", label == item.actual_label}}));
  return {item.review_id,       label, item.actual_label, item.predicted_label, item.highlights,
          is_signed_method(en.session.condition.importance_method), item.reveal_timer_s};
}

void Platform::advance(const std::string& session_id) {
  Entry& en = entry(session_id);
  std::lock_guard lock(en.mutex);
  const Session& s = en.session;
  if (s.phase != Phase::training) throw StateError("session is not in the training phase");
  const TrainingStep* step = s.current_training_step();
  if (!s.gate_started_ms) throw StateError("the example must be answered before moving on");
  const std::int64_t now = clock_();
  const std::int64_t remaining = static_cast<std::int64_t>(step->timer_s) * 1000 - (now - *s.gate_started_ms);
  if (remaining > 0) {
    throw TimerNotElapsed("timer still running: " + std::to_string(remaining) + " ms remaining");
  }
  Event e = make_event(s, "advanced", json::object());
  e.t_ms = now;
  commit(en, std::move(e));
}

RenderedItem Platform::render(const Session& session, const Review& review) const {
  const Condition& c = session.condition;
  RenderedItem out;
  out.review_id = review.id;
  out.text = review.text;
  out.tokens = review.tokens;
  out.position = session.responses.size() + 1;
  out.total = session.prediction_items.size();
  if (c.prediction_shows_highlights()) {
    const auto& matrix = materials_->prediction_importance.at(c.importance_method);
    out.highlights_signed = c.prediction_highlights_signed();
    out.highlights = build_highlights(matrix.row(review.id), review, *materials_->vocab, out.highlights_signed);
  }
  if (c.shows_predicted_label()) out.predicted_label = materials_->model_labels.find(review.id)->second;
  if (c.offers_guidelines()) out.guidelines = materials_->guidelines.items;
  if (c.shows_accuracy_statement()) out.accuracy_statement = std::string(kAccuracyStatement);
  return out;
}

RenderedItem Platform::next_prediction_item(const std::string& session_id) {
  Entry& en = entry(session_id);
  std::lock_guard lock(en.mutex);
  const Session& s = en.session;
  if (s.phase != Phase::prediction) throw StateError("session is not in the prediction phase");
  const auto id = *s.current_prediction_item();
  if (!s.item_shown_ms) commit(en, make_event(s, "item_shown", json{{"review_id", id}}));
  return render(en.session, test_review(id));
}

PredictionAck Platform::submit_prediction(const std::string& session_id, const std::string& review_id, Label label,
                                          std::optional<int> trust_rating) {
  if (trust_rating && (*trust_rating < 1 || *trust_rating > 5)) {
    throw ValidationError("trust rating must be between 1 and 5");
  }
  Entry& en = entry(session_id);
  std::lock_guard lock(en.mutex);
  const Session& s = en.session;
  if (s.phase != Phase::prediction) throw StateError("session is not in the prediction phase");
  const auto current = *s.current_prediction_item();
  if (review_id != current) {
    const bool answered = std::any_of(s.responses.begin(), s.responses.end(),
                                      [&](const PredictionResponse& r) { return r.review_id == review_id; });
    throw StateError(answered ? "review '" + review_id + "' was already answered"
                              : "review '" + review_id + "' is not the current item");
  }
  const Review& review = test_review(review_id);
  const Label model_label = materials_->model_labels.find(review_id)->second;
  const std::int64_t now = clock_();
  const std::int64_t started = s.item_shown_ms.value_or(s.prediction_reference_ms);
  Event e = make_event(s, "prediction",
                       json{{"review_id", review_id},
                            {"label", label},
                            {"trust", trust_rating ? json(*trust_rating) : json(nullptr)},
                            {"correct", label == review.label},
                            {"elapsed_ms", std::max<std::int64_t>(0, now - started)},
                            {"model_label", model_label},
                            {"model_correct", model_label == review.label}});
  e.t_ms = now;
  commit(en, std::move(e));
  return {label == review.label, en.session.bonus_cents, en.session.responses.size(), en.session.phase};
}

void Platform::submit_survey(const std::string& session_id, const SurveyRecord& survey) {
  Entry& en = entry(session_id);
  std::lock_guard lock(en.mutex);
  const Session& s = en.session;
  if (s.phase != Phase::survey) throw StateError("session is not at the survey");
  if (survey.tutorial_useful.has_value() != s.condition.has_tutorial()) {
    throw ValidationError(s.condition.has_tutorial() ? "tutorial_useful is required for this condition"
                                                     : "tutorial_useful must be omitted without a tutorial");
  }
  commit(en, make_event(s, "survey", json{{"survey", survey}}));
}

json Platform::current_step(const std::string& session_id) {
  Entry& en = entry(session_id);
  std::lock_guard lock(en.mutex);
  const Session& s = en.session;
  json out{{"session_id", s.session_id}, {"phase", s.phase}, {"condition", s.condition}};
  switch (s.phase) {
    case Phase::consent:
      out["consent_text"] = kConsentText;
      break;
    case Phase::attention_check:
      out["questions"] = attention_questions(s.condition);
      break;
    case Phase::training: {
      const TrainingStep& step = *s.current_training_step();
      json j{{"index", s.training_step}, {"total", s.training_steps.size()}, {"timer_s", step.timer_s}};
      std::optional<std::int64_t> remaining;
      if (s.gate_started_ms) {
        remaining = std::max<std::int64_t>(0, step.timer_s * 1000 - (clock_() - *s.gate_started_ms));
      }
      j["timer_remaining_ms"] = remaining ? json(*remaining) : json(nullptr);
      if (step.kind == TrainingStep::Kind::guidelines) {
        j["kind"] = "guidelines";
        j["items"] = materials_->plan_for(s.condition).guidelines.value_or(materials_->guidelines).items;
      } else {
        const TutorialItem& item = training_item(s);
        j["kind"] = "example";
        j["review_id"] = item.review_id;
        j["text"] = item.text;
        j["tokens"] = item.tokens;
        j["answered"] = s.current_example_answered();
        if (s.current_example_answered()) {
          const auto& answer = s.training_answers.back();
          j["reveal"] = RevealPayload{item.review_id,         answer.chosen_label, item.actual_label,
                                      item.predicted_label,   item.highlights,
                                      is_signed_method(s.condition.importance_method), item.reveal_timer_s};
        }
      }
      out["step"] = std::move(j);
      break;
    }
    case Phase::prediction:
      out["answered"] = s.responses.size();
      out["total"] = s.prediction_items.size();
      out["bonus_cents"] = s.bonus_cents;
      break;
    case Phase::survey:
      out["ask_tutorial_useful"] = s.condition.has_tutorial();
      out["fields"] = {"age_band", "gender", "education", "free_text"};
      break;
    case Phase::done:
      out["disqualified"] = s.disqualified;
      out["bonus_cents"] = s.bonus_cents;
      out["correct"] = s.correct_count();
      break;
  }
  return out;
}

Session Platform::session(const std::string& session_id) const {
  Entry& en = entry(session_id);
  std::lock_guard lock(en.mutex);
  return en.session;
}

std::vector<Session> Platform::sessions() const {
  std::vector<Entry*> entries;
  {
    std::lock_guard lock(registry_mutex_);
    for (const auto& [id, e] : sessions_) entries.push_back(e.get());
  }
  std::vector<Session> out;
  out.reserve(entries.size());
  for (Entry* e : entries) {
    std::lock_guard lock(e->mutex);
    out.push_back(e->session);
  }
  return out;
}

std::vector<std::size_t> Platform::tallies() const {
  std::lock_guard lock(registry_mutex_);
  return tallies_;
}

// --- wire ----------------------------------------------------------------------

void to_json(json& j, const RevealPayload& r) {
  j = json{{"review_id", r.review_id},
           {"chosen_label", r.chosen_label},
           {"actual_label", r.actual_label},
           {"predicted_label", r.predicted_label},
           {"highlights", r.highlights},
           {"highlights_signed", r.highlights_signed},
           {"reveal_timer_s", r.reveal_timer_s}};
}

void to_json(json& j, const RenderedItem& r) {
  j = json{{"review_id", r.review_id}, {"text", r.text}, {"tokens", r.tokens}, {"position", r.position},
           {"total", r.total}};
  if (r.highlights) {
    j["highlights"] = *r.highlights;
    j["highlights_signed"] = r.highlights_signed;
  }
  if (r.predicted_label) j["predicted_label"] = *r.predicted_label;
  if (r.guidelines) j["guidelines"] = *r.guidelines;
  if (r.accuracy_statement) j["accuracy_statement"] = *r.accuracy_statement;
}

void to_json(json& j, const PredictionAck& a) {
  j = json{{"correct", a.correct}, {"bonus_cents", a.bonus_cents}, {"answered", a.answered}, {"phase", a.phase}};
}

void to_json(json& j, const AttentionQuestion& q) {
  j = json{{"id", q.id}, {"prompt", q.prompt}, {"options", q.options}};
}

}  // namespace tutorlab

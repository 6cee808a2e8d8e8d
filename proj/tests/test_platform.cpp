#include <gtest/gtest.h>

#include <map>
#include <set>
#include <thread>

#include "fixtures.hpp"
#include "tutorlab/errors.hpp"
#include "tutorlab/platform/wire.hpp"
#include "tutorlab/simulation.hpp"

using namespace tutorlab;
using namespace tutorlab::testing;
using nlohmann::json;

namespace {

AttentionAnswers passing_answers(const Condition& c) {
  AttentionAnswers a;
  a.definition = "imagined";
  if (c.shows_signed_highlights()) a.color = "red";
  if (c.has_tutorial()) a.training_process = true;
  return a;
}

SurveyRecord survey_for(const Condition& c) {
  SurveyRecord s{"25-34", "prefer not to say", "bachelor", std::nullopt, ""};
  if (c.has_tutorial()) s.tutorial_useful = true;
  return s;
}

struct Study {
  explicit Study(Experiment e, std::size_t quota = 80, std::shared_ptr<EventStore> s = nullptr)
      : store(s ? std::move(s) : std::make_shared<MemoryEventStore>()),
        platform(PlatformConfig{e, quota, kPredictionItemsPerSession, 5}, study_materials(e), store, clock.clock()) {}

  // New participants until one lands in a condition satisfying pred.
  Session session_where(const std::function<bool(const Condition&)>& pred) {
    for (;;) {
      auto s = platform.create_session("p" + std::to_string(next++));
      if (pred(s.condition)) return s;
    }
  }

  void pass_attention(const Session& s) {
    platform.consent(s.session_id);
    ASSERT_TRUE(platform.submit_attention_check(s.session_id, passing_answers(s.condition)).passed);
  }

  void finish_training(const std::string& id) {
    for (;;) {
      const auto s = platform.session(id);
      if (s.phase != Phase::training) return;
      const auto* step = s.current_training_step();
      if (step->kind == TrainingStep::Kind::example) platform.submit_training_answer(id, step->review_id, Label::genuine);
      clock.advance(step->timer_s * 1000);
      platform.advance(id);
    }
  }

  void finish_predictions(const std::string& id, Label label = Label::deceptive) {
    while (platform.session(id).phase == Phase::prediction) {
      const auto item = platform.next_prediction_item(id);
      clock.advance(1500);
      platform.submit_prediction(id, item.review_id, label, 4);
    }
  }

  Session complete(const Session& s) {
    pass_attention(s);
    finish_training(s.session_id);
    finish_predictions(s.session_id);
    platform.submit_survey(s.session_id, survey_for(s.condition));
    return platform.session(s.session_id);
  }

  ManualClock clock{1'000'000};
  std::shared_ptr<EventStore> store;
  Platform platform;
  int next = 0;
};

bool is(const Condition& c, TutorialKind k) { return c.tutorial == k; }

}  // namespace

TEST(CreateSession, TwentyDistinctTestItemsInConsentPhase) {
  Study st(Experiment::exp1);
  const auto s = st.platform.create_session("alice");
  EXPECT_EQ(s.session_id, "s000001");
  EXPECT_EQ(s.phase, Phase::consent);
  ASSERT_EQ(s.prediction_items.size(), 20u);
  EXPECT_EQ(std::set<std::string>(s.prediction_items.begin(), s.prediction_items.end()).size(), 20u);
  std::set<std::string> test_ids;
  for (const auto& r : st.platform.materials().test_reviews) test_ids.insert(r.id);
  for (const auto& id : s.prediction_items) EXPECT_TRUE(test_ids.contains(id));
  EXPECT_EQ(st.platform.current_step(s.session_id)["phase"], "consent");
}

TEST(CreateSession, RepeatParticipantIsRejected) {
  Study st(Experiment::exp1);
  st.platform.create_session("alice");
  EXPECT_THROW(st.platform.create_session("alice"), DuplicateParticipant);
  EXPECT_THROW(st.platform.create_session(""), ValidationError);
  EXPECT_EQ(st.platform.sessions().size(), 1u);
}

TEST(CreateSession, DeterministicForSameStudySeed) {
  Study a(Experiment::exp2), b(Experiment::exp2);
  for (int i = 0; i < 12; ++i) {
    const auto pid = "p" + std::to_string(i);
    const auto sa = a.platform.create_session(pid);
    const auto sb = b.platform.create_session(pid);
    EXPECT_EQ(sa.condition, sb.condition);
    EXPECT_EQ(sa.prediction_items, sb.prediction_items);
    EXPECT_EQ(sa.seed, sb.seed);
  }
}

TEST(CreateSession, EnrollmentClosesAtQuota) {
  Study st(Experiment::exp1, 1);
  for (int i = 0; i < 6; ++i) st.platform.create_session("p" + std::to_string(i));
  EXPECT_EQ(st.platform.tallies(), std::vector<std::size_t>(6, 1));
  EXPECT_THROW(st.platform.create_session("late"), EnrollmentClosed);
}

TEST(Phases, OperationsOutOfOrderAreStateErrors) {
  Study st(Experiment::exp1);
  const auto s = st.platform.create_session("alice");
  const auto id = s.session_id;
  EXPECT_THROW(st.platform.submit_attention_check(id, passing_answers(s.condition)), StateError);
  EXPECT_THROW(st.platform.next_prediction_item(id), StateError);
  EXPECT_THROW(st.platform.advance(id), StateError);
  EXPECT_THROW(st.platform.submit_survey(id, survey_for(s.condition)), StateError);
  st.platform.consent(id);
  EXPECT_THROW(st.platform.consent(id), StateError);
  EXPECT_THROW(st.platform.consent("s999999"), NotFound);
}

TEST(AttentionCheck, QuestionsDependOnCondition) {
  for (const auto& c : conditions_for(Experiment::exp1)) {
    const auto q = attention_questions(c);
    ASSERT_FALSE(q.empty());
    EXPECT_EQ(q.front().id, "definition");
    const bool has_color = std::any_of(q.begin(), q.end(), [](const auto& x) { return x.id == "color"; });
    const bool has_training = std::any_of(q.begin(), q.end(), [](const auto& x) { return x.id == "training_process"; });
    EXPECT_EQ(has_color, c.shows_signed_highlights()) << c.key();
    EXPECT_EQ(has_training, c.has_tutorial()) << c.key();
  }
}

TEST(AttentionCheck, MissingExtraAndUnknownAnswersAreValidationErrors) {
  Study st(Experiment::exp1);
  const auto s = st.session_where([](const Condition& c) { return is(c, TutorialKind::sr); });
  st.platform.consent(s.session_id);
  auto a = passing_answers(s.condition);
  a.color.reset();
  EXPECT_THROW(st.platform.submit_attention_check(s.session_id, a), ValidationError);
  a = passing_answers(s.condition);
  a.color = "purple";
  EXPECT_THROW(st.platform.submit_attention_check(s.session_id, a), ValidationError);
  a = passing_answers(s.condition);
  a.definition = "maybe";
  EXPECT_THROW(st.platform.submit_attention_check(s.session_id, a), ValidationError);

  const auto none = st.session_where([](const Condition& c) { return is(c, TutorialKind::none); });
  st.platform.consent(none.session_id);
  auto extra = passing_answers(none.condition);
  extra.training_process = true;
  EXPECT_THROW(st.platform.submit_attention_check(none.session_id, extra), ValidationError);
  EXPECT_EQ(st.platform.session(none.session_id).phase, Phase::attention_check);
}

TEST(AttentionCheck, FailureDisqualifiesAndRecyclesTheBlock) {
  Study st(Experiment::exp1);
  const auto s = st.session_where([](const Condition& c) { return is(c, TutorialKind::guidelines); });
  const auto c = std::find(st.platform.conditions().begin(), st.platform.conditions().end(), s.condition) -
                 st.platform.conditions().begin();
  const auto before = st.platform.tallies()[static_cast<std::size_t>(c)];
  st.platform.consent(s.session_id);
  auto a = passing_answers(s.condition);
  a.definition = "experienced";
  const auto result = st.platform.submit_attention_check(s.session_id, a);
  EXPECT_FALSE(result.passed);
  EXPECT_EQ(result.phase, Phase::done);
  const auto after = st.platform.session(s.session_id);
  EXPECT_TRUE(after.disqualified);
  EXPECT_EQ(st.platform.tallies()[static_cast<std::size_t>(c)], before - 1);
  EXPECT_EQ(st.platform.current_step(s.session_id)["disqualified"], true);
  EXPECT_THROW(st.platform.next_prediction_item(s.session_id), StateError);

  const auto next = st.session_where([&](const Condition& x) { return x == s.condition; });
  EXPECT_EQ(next.item_block, s.item_block);
  EXPECT_EQ(next.prediction_items, s.prediction_items);
}

TEST(Training, StandaloneGuidelinesGateIsThirtySeconds) {
  Study st(Experiment::exp1);
  const auto s = st.session_where([](const Condition& c) { return is(c, TutorialKind::guidelines); });
  st.pass_attention(s);
  const auto id = s.session_id;
  auto step = st.platform.current_step(id);
  EXPECT_EQ(step["step"]["kind"], "guidelines");
  EXPECT_EQ(step["step"]["timer_s"], 30);
  EXPECT_EQ(step["step"]["timer_remaining_ms"], 30000);
  EXPECT_THROW(st.platform.advance(id), TimerNotElapsed);
  st.clock.advance(29'999);
  EXPECT_THROW(st.platform.advance(id), TimerNotElapsed);
  EXPECT_EQ(st.platform.current_step(id)["step"]["timer_remaining_ms"], 1);
  st.clock.advance(1);
  st.platform.advance(id);
  EXPECT_EQ(st.platform.session(id).phase, Phase::prediction);
}

TEST(Training, ExamplesRequireAnswerThenTenSecondReveal) {
  Study st(Experiment::exp1);
  const auto s = st.session_where([](const Condition& c) { return is(c, TutorialKind::sr); });
  st.pass_attention(s);
  const auto id = s.session_id;
  const auto& plan = st.platform.materials().plan_for(s.condition);
  ASSERT_EQ(plan.items.size(), 10u);
  for (std::size_t i = 0; i < plan.items.size(); ++i) {
    const auto& item = plan.items[i];
    auto step = st.platform.current_step(id)["step"];
    EXPECT_EQ(step["kind"], "example");
    EXPECT_EQ(step["review_id"], item.review_id);
    EXPECT_EQ(step["answered"], false);
    EXPECT_FALSE(step.contains("reveal"));
    EXPECT_TRUE(step["timer_remaining_ms"].is_null());
    EXPECT_THROW(st.platform.advance(id), StateError);
    EXPECT_THROW(st.platform.submit_training_answer(id, "not-it", Label::genuine), StateError);
    const auto reveal = st.platform.submit_training_answer(id, item.review_id, Label::deceptive);
    EXPECT_EQ(reveal.actual_label, item.actual_label);
    EXPECT_EQ(reveal.predicted_label, item.predicted_label);
    EXPECT_EQ(reveal.highlights, item.highlights);
    EXPECT_EQ(reveal.reveal_timer_s, 10);
    EXPECT_THROW(st.platform.submit_training_answer(id, item.review_id, Label::deceptive), StateError);
    step = st.platform.current_step(id)["step"];
    EXPECT_EQ(step["answered"], true);
    EXPECT_EQ(step["reveal"]["actual_label"], json(item.actual_label));
    st.clock.advance(9'999);
    EXPECT_THROW(st.platform.advance(id), TimerNotElapsed);
    st.clock.advance(1);
    st.platform.advance(id);
  }
  const auto after = st.platform.session(id);
  EXPECT_EQ(after.phase, Phase::prediction);
  EXPECT_EQ(after.training_answers.size(), 10u);
}

TEST(Training, CombinedTutorialStepsAndTimers) {
  Study st(Experiment::exp2);
  const auto s = st.platform.create_session("bob");
  const auto& steps = s.training_steps;
  ASSERT_EQ(steps.size(), 12u);
  EXPECT_EQ(steps.front().kind, TrainingStep::Kind::guidelines);
  EXPECT_EQ(steps.front().timer_s, 15);
  EXPECT_EQ(steps.back().kind, TrainingStep::Kind::guidelines);
  EXPECT_EQ(steps.back().timer_s, 15);
  for (std::size_t i = 1; i + 1 < steps.size(); ++i) {
    EXPECT_EQ(steps[i].kind, TrainingStep::Kind::example);
    EXPECT_EQ(steps[i].timer_s, 10);
  }
  st.pass_attention(s);
  st.clock.advance(14'999);
  EXPECT_THROW(st.platform.advance(s.session_id), TimerNotElapsed);
  st.clock.advance(1);
  st.platform.advance(s.session_id);
  EXPECT_EQ(st.platform.session(s.session_id).training_step, 1u);
}

TEST(Training, NoTutorialGoesStraightToPrediction) {
  Study st(Experiment::exp1);
  const auto s = st.session_where([](const Condition& c) { return is(c, TutorialKind::none); });
  EXPECT_TRUE(s.training_steps.empty());
  st.pass_attention(s);
  EXPECT_EQ(st.platform.session(s.session_id).phase, Phase::prediction);
}

TEST(Training, TimersSurviveRestart) {
  auto store = std::make_shared<MemoryEventStore>();
  Study st(Experiment::exp1, 80, store);
  const auto s = st.session_where([](const Condition& c) { return is(c, TutorialKind::guidelines); });
  st.pass_attention(s);
  st.clock.advance(20'000);
  Platform restarted(st.platform.config(), study_materials(Experiment::exp1), store, st.clock.clock());
  EXPECT_THROW(restarted.advance(s.session_id), TimerNotElapsed);
  st.clock.advance(10'000);
  restarted.advance(s.session_id);
}

TEST(Prediction, ResponsesBonusAndElapsedTime) {
  Study st(Experiment::exp1);
  const auto s = st.session_where([](const Condition& c) { return is(c, TutorialKind::none); });
  st.pass_attention(s);
  const auto id = s.session_id;
  std::map<std::string, Label> truth;
  for (const auto& r : st.platform.materials().test_reviews) truth[r.id] = r.label;

  EXPECT_THROW(st.platform.submit_prediction(id, s.prediction_items[0], Label::genuine, 6), ValidationError);
  EXPECT_THROW(st.platform.submit_prediction(id, s.prediction_items[0], Label::genuine, 0), ValidationError);
  EXPECT_THROW(st.platform.submit_prediction(id, s.prediction_items[1], Label::genuine), StateError);

  int correct = 0;
  for (std::size_t i = 0; i < 20; ++i) {
    const auto item = st.platform.next_prediction_item(id);
    EXPECT_EQ(item.review_id, s.prediction_items[i]);
    EXPECT_EQ(item.position, i + 1);
    EXPECT_EQ(item.total, 20u);
    EXPECT_FALSE(item.highlights.has_value());
    EXPECT_FALSE(item.predicted_label.has_value());
    st.clock.advance(700);
    // A second fetch does not restart the item clock.
    st.platform.next_prediction_item(id);
    st.clock.advance(300 + static_cast<std::int64_t>(i));
    const Label choice = i % 3 == 0 ? Label::deceptive : Label::genuine;
    const auto ack = st.platform.submit_prediction(id, item.review_id, choice, 1 + static_cast<int>(i % 5));
    correct += ack.correct ? 1 : 0;
    EXPECT_EQ(ack.correct, choice == truth.at(item.review_id));
    EXPECT_EQ(ack.bonus_cents, 5 * correct);
    EXPECT_EQ(ack.answered, i + 1);
    if (i > 0) {
      EXPECT_THROW(st.platform.submit_prediction(id, s.prediction_items[0], choice), StateError);
    }
  }
  const auto done = st.platform.session(id);
  EXPECT_EQ(done.phase, Phase::survey);
  EXPECT_EQ(done.bonus_cents, 5 * correct);
  EXPECT_EQ(static_cast<int>(done.correct_count()), correct);
  for (std::size_t i = 0; i < 20; ++i) {
    EXPECT_EQ(done.responses[i].elapsed_ms, 1000 + static_cast<std::int64_t>(i));
    EXPECT_EQ(done.responses[i].trust_rating, 1 + static_cast<int>(i % 5));
    EXPECT_EQ(done.responses[i].model_label, st.platform.materials().model_labels.at(done.responses[i].review_id));
  }
}

TEST(Prediction, AssistanceSpectrumRendering) {
  Study st(Experiment::exp2);
  const auto& conditions = st.platform.conditions();
  for (std::size_t c = 0; c < conditions.size(); ++c) {
    const auto s = st.session_where([&](const Condition& x) { return x == conditions[c]; });
    st.pass_attention(s);
    st.finish_training(s.session_id);
    const auto item = st.platform.next_prediction_item(s.session_id);
    const auto& cond = conditions[c];
    EXPECT_EQ(item.highlights.has_value(), c >= 1) << cond.key();
    EXPECT_EQ(item.highlights_signed, c >= 2) << cond.key();
    if (item.highlights) {
      for (const auto& span : item.highlights->spans) {
        EXPECT_EQ(span.polarity == Polarity::magnitude, c == 1);
      }
    }
    EXPECT_EQ(item.predicted_label.has_value(), c >= 3) << cond.key();
    if (item.predicted_label) {
      EXPECT_EQ(*item.predicted_label, st.platform.materials().model_labels.at(item.review_id));
    }
    EXPECT_EQ(item.guidelines.has_value(), c >= 4) << cond.key();
    EXPECT_EQ(item.accuracy_statement.has_value(), c == 5) << cond.key();
    if (item.accuracy_statement) {
      EXPECT_EQ(*item.accuracy_statement, "It has an accuracy of approximately 86%");
    }
    const json j = item;
    EXPECT_EQ(j.contains("predicted_label"), c >= 3);
    EXPECT_EQ(j.contains("accuracy_statement"), c == 5);
  }
}

TEST(Prediction, ExperimentThreeUsesEachImportanceSource) {
  Study st(Experiment::exp3);
  for (const auto& cond : st.platform.conditions()) {
    if (cond.has_tutorial()) continue;
    const auto s = st.session_where([&](const Condition& x) { return x == cond; });
    st.pass_attention(s);
    const auto item = st.platform.next_prediction_item(s.session_id);
    ASSERT_TRUE(item.highlights.has_value());
    const auto& matrix = st.platform.materials().prediction_importance.at(cond.importance_method);
    const auto& review = *std::find_if(st.platform.materials().test_reviews.begin(),
                                       st.platform.materials().test_reviews.end(),
                                       [&](const Review& r) { return r.id == item.review_id; });
    EXPECT_EQ(*item.highlights, build_highlights(matrix.row(review.id), review, *st.platform.materials().vocab,
                                                 is_signed_method(cond.importance_method)));
  }
}

TEST(Survey, TutorialUsefulPresentIffTutorial) {
  Study st(Experiment::exp1);
  for (const auto k : {TutorialKind::none, TutorialKind::sp_lime}) {
    const auto s = st.session_where([&](const Condition& c) { return is(c, k); });
    st.pass_attention(s);
    st.finish_training(s.session_id);
    st.finish_predictions(s.session_id);
    auto wrong = survey_for(s.condition);
    wrong.tutorial_useful = wrong.tutorial_useful ? std::nullopt : std::optional<bool>(false);
    EXPECT_THROW(st.platform.submit_survey(s.session_id, wrong), ValidationError);
    st.platform.submit_survey(s.session_id, survey_for(s.condition));
    const auto done = st.platform.session(s.session_id);
    EXPECT_EQ(done.phase, Phase::done);
    EXPECT_EQ(done.survey, survey_for(s.condition));
    EXPECT_THROW(st.platform.submit_survey(s.session_id, survey_for(s.condition)), StateError);
  }
}

TEST(Replay, RebuildsIdenticalStateFromFileStore) {
  TempDir dir("replay");
  const auto path = dir / "events.log";
  std::vector<Session> before;
  std::vector<std::size_t> tallies;
  {
    Study st(Experiment::exp1, 80, std::make_shared<FileEventStore>(path));
    for (int i = 0; i < 8; ++i) {
      auto s = st.platform.create_session("p" + std::to_string(i));
      if (i % 3 == 0) st.complete(s);
      if (i % 3 == 1) {
        st.platform.consent(s.session_id);
        auto a = passing_answers(s.condition);
        a.definition = "staff";
        st.platform.submit_attention_check(s.session_id, a);
      }
    }
    before = st.platform.sessions();
    tallies = st.platform.tallies();
  }
  ManualClock clock;
  Platform reopened(PlatformConfig{Experiment::exp1, 80, kPredictionItemsPerSession, 5},
                    study_materials(Experiment::exp1), std::make_shared<FileEventStore>(path), clock.clock());
  EXPECT_EQ(reopened.sessions(), before);
  EXPECT_EQ(reopened.tallies(), tallies);
  EXPECT_THROW(reopened.create_session("p3"), DuplicateParticipant);
  const auto next = reopened.create_session("fresh");
  EXPECT_EQ(next.session_id, "s000009");
}

TEST(Replay, EveryPrefixMatchesTheLiveStateAtThatPoint) {
  Study st(Experiment::exp2);
  const auto s = st.platform.create_session("carol");
  const auto id = s.session_id;
  std::vector<std::pair<std::size_t, Session>> checkpoints;
  const auto snap = [&] { checkpoints.emplace_back(st.store->read_all().size(), st.platform.session(id)); };
  snap();
  st.platform.consent(id);
  snap();
  st.platform.submit_attention_check(id, passing_answers(s.condition));
  snap();
  while (st.platform.session(id).phase == Phase::training) {
    const auto current = st.platform.session(id);
    const auto* step = current.current_training_step();
    if (step->kind == TrainingStep::Kind::example) {
      st.platform.submit_training_answer(id, step->review_id, Label::genuine);
      snap();
    }
    st.clock.advance(step->timer_s * 1000);
    st.platform.advance(id);
    snap();
  }
  for (int i = 0; i < 3; ++i) {
    const auto item = st.platform.next_prediction_item(id);
    snap();
    st.clock.advance(100);
    st.platform.submit_prediction(id, item.review_id, Label::genuine);
    snap();
  }
  const auto events = st.store->read_all();
  for (const auto& [n, expected] : checkpoints) {
    EXPECT_EQ(restore_session(std::span<const Event>(events.data(), n), id), expected) << n;
  }
  EXPECT_THROW(restore_session(events, "s404"), NotFound);
}

TEST(Replay, CorruptLogIsRejected) {
  auto store = std::make_shared<MemoryEventStore>();
  Event e;
  e.session_id = "s000001";
  e.type = "consented";
  store->append(e);
  ManualClock clock;
  EXPECT_THROW(Platform(PlatformConfig{Experiment::exp1}, study_materials(Experiment::exp1), store, clock.clock()),
               IntegrityError);
}

TEST(Replay, ApplyRejectsEventsThatDoNotFit) {
  Study st(Experiment::exp1);
  const auto s = st.platform.create_session("dave");
  auto copy = st.platform.session(s.session_id);
  Event bad;
  bad.session_id = s.session_id;
  bad.type = "prediction";
  bad.data = {{"review_id", s.prediction_items[0]}};
  EXPECT_THROW(copy.apply(bad), IntegrityError);
  bad.type = "teleported";
  EXPECT_THROW(copy.apply(bad), IntegrityError);
}

TEST(Scheduler, BlocksCoverEachReviewEvenly) {
  std::vector<std::string> ids;
  for (int i = 0; i < 320; ++i) ids.push_back("t" + std::to_string(i));
  ItemScheduler scheduler(ids, 2, 20, 9);
  for (std::size_t c = 0; c < 2; ++c) {
    std::map<std::string, int> counts;
    for (int b = 0; b < 80; ++b) {
      const auto block = scheduler.acquire(c);
      const auto items = scheduler.items(c, block);
      ASSERT_EQ(std::set<std::string>(items.begin(), items.end()).size(), 20u);
      for (const auto& id : items) ++counts[id];
    }
    ASSERT_EQ(counts.size(), 320u);
    for (const auto& [id, n] : counts) ASSERT_EQ(n, 5) << id;
  }
}

TEST(Scheduler, UnevenPoolStillAvoidsRepeatsWithinABlock) {
  std::vector<std::string> ids;
  for (int i = 0; i < 50; ++i) ids.push_back("t" + std::to_string(i));
  ItemScheduler scheduler(ids, 1, 20, 4);
  std::map<std::string, int> counts;
  for (int b = 0; b < 5; ++b) {
    const auto items = scheduler.items(0, scheduler.acquire(0));
    ASSERT_EQ(std::set<std::string>(items.begin(), items.end()).size(), 20u) << b;
    for (const auto& id : items) ++counts[id];
  }
  for (const auto& [id, n] : counts) EXPECT_EQ(n, 2) << id;
}

TEST(Scheduler, PoolSizeRules) {
  std::vector<std::string> ids(30);
  for (int i = 0; i < 30; ++i) ids[static_cast<std::size_t>(i)] = "t" + std::to_string(i);
  EXPECT_THROW(ItemScheduler(ids, 1, 20, 0), ValidationError);
  ids.resize(10);
  EXPECT_THROW(ItemScheduler(ids, 1, 20, 0), ValidationError);
  EXPECT_THROW(ItemScheduler(ids, 1, 0, 0), ValidationError);
}

TEST(Scheduler, ReleasedBlocksAreReusedSmallestFirst) {
  std::vector<std::string> ids;
  for (int i = 0; i < 40; ++i) ids.push_back("t" + std::to_string(i));
  ItemScheduler scheduler(ids, 1, 20, 1);
  for (std::size_t b = 0; b < 4; ++b) EXPECT_EQ(scheduler.acquire(0), b);
  scheduler.release(0, 2);
  scheduler.release(0, 1);
  EXPECT_EQ(scheduler.acquire(0), 1u);
  EXPECT_EQ(scheduler.acquire(0), 2u);
  EXPECT_EQ(scheduler.acquire(0), 4u);
}

TEST(FullCondition, EveryReviewLabeledFiveTimesPerCondition) {
  Study st(Experiment::exp1);
  SimulationOptions options;
  options.participants = 480;
  options.probe_timers = false;
  options.policy = AgentPolicy::coin_flip;
  const auto result = run_simulation(st.platform, st.clock, options);
  EXPECT_EQ(result.completed, 480u);
  EXPECT_EQ(st.platform.tallies(), std::vector<std::size_t>(6, 80));
  std::map<std::string, std::map<std::string, int>> counts;
  for (const auto& s : st.platform.sessions()) {
    for (const auto& r : s.responses) ++counts[s.condition.key()][r.review_id];
  }
  ASSERT_EQ(counts.size(), 6u);
  for (const auto& [key, per_review] : counts) {
    ASSERT_EQ(per_review.size(), 320u) << key;
    for (const auto& [id, n] : per_review) ASSERT_EQ(n, 5) << key << " " << id;
  }
}

TEST(Concurrency, ParallelParticipantsKeepInvariants) {
  auto store = std::make_shared<MemoryEventStore>();
  Study st(Experiment::exp2, 10, store);
  std::vector<std::thread> threads;
  std::atomic<int> failures{0};
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      try {
        for (int i = 0; i < 12; ++i) {
          const auto s = st.platform.create_session("t" + std::to_string(t) + "-" + std::to_string(i));
          st.platform.consent(s.session_id);
          auto a = passing_answers(s.condition);
          if (i % 4 == 3) a.definition = "staff";
          if (!st.platform.submit_attention_check(s.session_id, a).passed) continue;
          // Clock is shared; gates may already be open, so retry on timers.
          while (st.platform.session(s.session_id).phase == Phase::training) {
            const auto current = st.platform.session(s.session_id);
            const auto* step = current.current_training_step();
            if (step->kind == TrainingStep::Kind::example && !current.current_example_answered()) {
              st.platform.submit_training_answer(s.session_id, step->review_id, Label::genuine);
            }
            try {
              st.platform.advance(s.session_id);
            } catch (const TimerNotElapsed&) {
              st.clock.advance(1000);
            }
          }
          st.finish_predictions(s.session_id);
          st.platform.submit_survey(s.session_id, survey_for(s.condition));
        }
      } catch (const std::exception&) {
        ++failures;
      }
    });
  }
  for (auto& th : threads) th.join();
  EXPECT_EQ(failures.load(), 0);
  const auto sessions = st.platform.sessions();
  EXPECT_EQ(sessions.size(), 48u);
  std::set<std::string> ids;
  for (const auto& s : sessions) ids.insert(s.session_id);
  EXPECT_EQ(ids.size(), 48u);
  std::size_t active = 0;
  for (const auto t : st.platform.tallies()) active += t;
  EXPECT_EQ(active, 36u);
  // Blocks held by live sessions never collide within a condition.
  std::set<std::pair<std::string, std::size_t>> blocks;
  for (const auto& s : sessions) {
    if (!s.disqualified) {
      EXPECT_TRUE(blocks.emplace(s.condition.key(), s.item_block).second);
    }
  }
  Platform replayed(st.platform.config(), study_materials(Experiment::exp2), store, st.clock.clock());
  EXPECT_EQ(replayed.sessions(), sessions);
}

TEST(Wire, SessionJsonCarriesPhaseAndCondition) {
  Study st(Experiment::exp1);
  const auto s = st.platform.create_session("erin");
  const json j = s;
  EXPECT_EQ(j["session_id"], s.session_id);
  EXPECT_EQ(j["phase"], "consent");
  EXPECT_EQ(j["condition"]["experiment"], "exp1");
  EXPECT_EQ(j["prediction_items"].size(), 20u);
  const auto step = st.platform.current_step(s.session_id);
  EXPECT_TRUE(step.contains("consent_text"));
  st.platform.consent(s.session_id);
  const auto check = st.platform.current_step(s.session_id);
  EXPECT_EQ(check["phase"], "attention_check");
  EXPECT_EQ(check["questions"][0]["id"], "definition");
  EXPECT_EQ(check["questions"][0]["options"].size(), 3u);
}

#include "tutorlab/simulation.hpp"

#include <cstdio>

#include "tutorlab/errors.hpp"
#include "tutorlab/random.hpp"

namespace tutorlab {

std::string_view to_string(AgentPolicy policy) {
  switch (policy) {
    case AgentPolicy::highlight_follower: return "highlight_follower";
    case AgentPolicy::label_follower: return "label_follower";
    case AgentPolicy::ground_truth: return "ground_truth";
    case AgentPolicy::coin_flip: return "coin_flip";
  }
  return "coin_flip";
}

AgentPolicy parse_agent_policy(std::string_view text) {
  for (const auto p : {AgentPolicy::highlight_follower, AgentPolicy::label_follower, AgentPolicy::ground_truth,
                       AgentPolicy::coin_flip}) {
    if (to_string(p) == text) return p;
  }
  throw ValidationError("unknown agent policy '" + std::string(text) + "'");
}

namespace {

Label coin(Rng& rng) { return coin_flip(rng, 0.5) ? Label::deceptive : Label::genuine; }

Label decide(AgentPolicy policy, const RenderedItem& item, Label truth, Rng& rng) {
  switch (policy) {
    case AgentPolicy::highlight_follower:
      if (item.highlights && item.highlights_signed) {
        const double mass = item.highlights->signed_mass();
        if (mass > 0) return Label::deceptive;
        if (mass < 0) return Label::genuine;
      }
      return coin(rng);
    case AgentPolicy::label_follower:
      return item.predicted_label ? *item.predicted_label : coin(rng);
    case AgentPolicy::ground_truth:
      return truth;
    case AgentPolicy::coin_flip:
      return coin(rng);
  }
  return coin(rng);
}

}  // namespace

SimulationResult run_simulation(Platform& platform, ManualClock& clock, const SimulationOptions& o) {
  SimulationResult result;
  std::map<std::string, Label, std::less<>> truth;
  for (const auto& r : platform.materials().test_reviews) truth.emplace(r.id, r.label);

  for (std::size_t i = 0; i < o.participants; ++i) {
    char pid[64];
    std::snprintf(pid, sizeof pid, "%s-%05zu", o.participant_prefix.c_str(), i + 1);
    Rng rng(mix_seed(o.seed, stable_hash(pid)));
    Session created;
    try {
      created = platform.create_session(pid);
    } catch (const EnrollmentClosed&) {
      result.enrollment_closed = true;
      break;
    }
    ++result.created;
    const std::string& sid = created.session_id;
    clock.advance(1000);
    platform.consent(sid);

    AttentionAnswers answers;
    for (const auto& q : attention_questions(created.condition)) {
      if (q.id == "definition") answers.definition = "imagined";
      if (q.id == "color") answers.color = "red";
      if (q.id == "training_process") answers.training_process = true;
    }
    if (o.attention_fail_rate > 0 && uniform_unit(rng) < o.attention_fail_rate) answers.definition = "staff";
    clock.advance(5000);
    if (!platform.submit_attention_check(sid, answers).passed) {
      ++result.disqualified;
      continue;
    }

    for (const auto& step : created.training_steps) {
      if (step.kind == TrainingStep::Kind::example) {
        clock.advance(3000);
        platform.submit_training_answer(sid, step.review_id, coin(rng));
      }
      bool moved = false;
      if (o.probe_timers && step.timer_s > 0) {
        for (const std::int64_t wait : {std::int64_t{0}, std::int64_t{step.timer_s} * 1000 - 1}) {
          clock.advance(wait);
          ++result.premature_attempts;
          try {
            platform.advance(sid);
            moved = true;  // an early advance got through
            break;
          } catch (const TimerNotElapsed&) {
            ++result.premature_rejections;
          }
        }
        clock.advance(1);
      } else {
        clock.advance(std::int64_t{step.timer_s} * 1000);
      }
      if (!moved) platform.advance(sid);
    }

    for (std::size_t k = 0; k < created.prediction_items.size(); ++k) {
      const RenderedItem item = platform.next_prediction_item(sid);
      clock.advance(4000 + static_cast<std::int64_t>(uniform_index(rng, 8000)));
      const Label label = decide(o.policy, item, truth.at(item.review_id), rng);
      platform.submit_prediction(sid, item.review_id, label, 1 + static_cast<int>(uniform_index(rng, 5)));
    }

    SurveyRecord survey{"25-34", "undisclosed", "bachelor", std::nullopt, ""};
    if (created.condition.has_tutorial()) survey.tutorial_useful = coin_flip(rng, 0.5);
    platform.submit_survey(sid, survey);
    ++result.completed;
  }
  return result;
}

}  // namespace tutorlab

#include "tutorlab/platform/condition.hpp"

#include "tutorlab/errors.hpp"
#include "tutorlab/random.hpp"

namespace tutorlab {

std::string_view to_string(Experiment e) {
  switch (e) {
    case Experiment::exp1: return "exp1";
    case Experiment::exp2: return "exp2";
    case Experiment::exp3: return "exp3";
  }
  return "exp1";
}

std::string_view to_string(TutorialKind k) {
  switch (k) {
    case TutorialKind::none: return "none";
    case TutorialKind::guidelines: return "guidelines";
    case TutorialKind::random: return "random";
    case TutorialKind::sp_lime: return "sp_lime";
    case TutorialKind::sr: return "sr";
    case TutorialKind::sr_plus_guidelines: return "sr_plus_guidelines";
  }
  return "none";
}

std::string_view to_string(Assistance a) {
  switch (a) {
    case Assistance::none: return "none";
    case Assistance::unsigned_highlights: return "unsigned_highlights";
    case Assistance::signed_highlights: return "signed_highlights";
    case Assistance::signed_plus_label: return "signed_plus_label";
    case Assistance::signed_plus_label_guidelines: return "signed_plus_label_guidelines";
    case Assistance::signed_plus_label_guidelines_accuracy: return "signed_plus_label_guidelines_accuracy";
  }
  return "none";
}

Experiment parse_experiment(std::string_view text) {
  for (const auto e : {Experiment::exp1, Experiment::exp2, Experiment::exp3}) {
    if (to_string(e) == text) return e;
  }
  throw ValidationError("unknown experiment '" + std::string(text) + "'");
}

TutorialKind parse_tutorial_kind(std::string_view text) {
  for (const auto k : {TutorialKind::none, TutorialKind::guidelines, TutorialKind::random, TutorialKind::sp_lime,
                       TutorialKind::sr, TutorialKind::sr_plus_guidelines}) {
    if (to_string(k) == text) return k;
  }
  throw ValidationError("unknown tutorial kind '" + std::string(text) + "'");
}

Assistance parse_assistance(std::string_view text) {
  for (const auto a : {Assistance::none, Assistance::unsigned_highlights, Assistance::signed_highlights,
                       Assistance::signed_plus_label, Assistance::signed_plus_label_guidelines,
                       Assistance::signed_plus_label_guidelines_accuracy}) {
    if (to_string(a) == text) return a;
  }
  throw ValidationError("unknown assistance level '" + std::string(text) + "'");
}

bool is_signed_method(ImportanceMethod method) { return method != ImportanceMethod::external_attention; }

TutorialPlanKind plan_kind_for(TutorialKind kind) {
  switch (kind) {
    case TutorialKind::none: return TutorialPlanKind::none;
    case TutorialKind::guidelines: return TutorialPlanKind::guidelines;
    case TutorialKind::random:
    case TutorialKind::sp_lime:
    case TutorialKind::sr: return TutorialPlanKind::examples;
    case TutorialKind::sr_plus_guidelines: return TutorialPlanKind::combined;
  }
  return TutorialPlanKind::none;
}

SelectionMethod selection_method_for(TutorialKind kind) {
  switch (kind) {
    case TutorialKind::random: return SelectionMethod::random;
    case TutorialKind::sp_lime: return SelectionMethod::sp_lime;
    case TutorialKind::sr:
    case TutorialKind::sr_plus_guidelines: return SelectionMethod::spaced_repetition;
    default: break;
  }
  throw ValidationError("tutorial kind '" + std::string(to_string(kind)) + "' has no example selection");
}

std::string Condition::key() const {
  std::string k(to_string(experiment));
  k += '/';
  k += to_string(tutorial);
  k += '/';
  k += to_string(assistance);
  k += '/';
  k += to_string(importance_method);
  return k;
}

bool Condition::tutorial_has_examples() const {
  const auto kind = plan_kind_for(tutorial);
  return kind == TutorialPlanKind::examples || kind == TutorialPlanKind::combined;
}

bool Condition::prediction_highlights_signed() const {
  return assistance >= Assistance::signed_highlights && is_signed_method(importance_method);
}

bool Condition::shows_signed_highlights() const {
  return (tutorial_has_examples() && is_signed_method(importance_method)) || prediction_highlights_signed();
}

void Condition::validate() const {
  switch (experiment) {
    case Experiment::exp1:
      if (assistance != Assistance::none) throw ValidationError("exp1 conditions have no real-time assistance");
      break;
    case Experiment::exp2:
      if (tutorial != TutorialKind::sr_plus_guidelines) {
        throw ValidationError("exp2 conditions share the sr_plus_guidelines tutorial");
      }
      break;
    case Experiment::exp3:
      if (assistance != Assistance::signed_highlights && assistance != Assistance::unsigned_highlights) {
        throw ValidationError("exp3 assistance is limited to highlights");
      }
      if (importance_method == ImportanceMethod::external_attention && assistance != Assistance::unsigned_highlights) {
        throw ValidationError("attention-based highlights are unsigned");
      }
      if (tutorial != TutorialKind::none && tutorial != TutorialKind::sr) {
        throw ValidationError("exp3 training uses the sr example tutorial");
      }
      break;
  }
  if (importance_method == ImportanceMethod::external_attention && assistance >= Assistance::signed_highlights) {
    throw ValidationError("attention-based highlights are unsigned");
  }
}

std::vector<Condition> conditions_for(Experiment experiment) {
  std::vector<Condition> out;
  switch (experiment) {
    case Experiment::exp1:
      for (const auto k : {TutorialKind::none, TutorialKind::guidelines, TutorialKind::random, TutorialKind::sp_lime,
                           TutorialKind::sr, TutorialKind::sr_plus_guidelines}) {
        out.push_back({experiment, k, Assistance::none, ImportanceMethod::svm_coef});
      }
      break;
    case Experiment::exp2:
      for (const auto a : {Assistance::none, Assistance::unsigned_highlights, Assistance::signed_highlights,
                           Assistance::signed_plus_label, Assistance::signed_plus_label_guidelines,
                           Assistance::signed_plus_label_guidelines_accuracy}) {
        out.push_back({experiment, TutorialKind::sr_plus_guidelines, a, ImportanceMethod::svm_coef});
      }
      break;
    case Experiment::exp3:
      for (const auto k : {TutorialKind::none, TutorialKind::sr}) {
        for (const auto m :
             {ImportanceMethod::svm_coef, ImportanceMethod::external_attention, ImportanceMethod::external_lime}) {
          const auto a = is_signed_method(m) ? Assistance::signed_highlights : Assistance::unsigned_highlights;
          out.push_back({experiment, k, a, m});
        }
      }
      break;
  }
  return out;
}

std::size_t assign_condition(std::span<const std::size_t> tallies, std::size_t quota, std::uint64_t seed) {
  std::vector<std::size_t> open;
  for (std::size_t c = 0; c < tallies.size(); ++c) {
    if (tallies[c] < quota) open.push_back(c);
  }
  if (open.empty()) throw EnrollmentClosed("enrollment closed: every condition is at quota");
  std::uint64_t state = seed;
  for (const auto t : tallies) state = mix_seed(state, t);
  Rng rng(state);
  return open[uniform_index(rng, open.size())];
}

}  // namespace tutorlab

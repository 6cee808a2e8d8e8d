#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tutorlab/explainer.hpp"
#include "tutorlab/tutorial.hpp"

namespace tutorlab {

enum class Experiment { exp1, exp2, exp3 };

enum class TutorialKind { none, guidelines, random, sp_lime, sr, sr_plus_guidelines };

// Real-time assistance levels, ordered from full human agency toward full
// automation.
enum class Assistance {
  none,
  unsigned_highlights,
  signed_highlights,
  signed_plus_label,
  signed_plus_label_guidelines,
  signed_plus_label_guidelines_accuracy,
};

std::string_view to_string(Experiment e);
std::string_view to_string(TutorialKind k);
std::string_view to_string(Assistance a);
Experiment parse_experiment(std::string_view text);
TutorialKind parse_tutorial_kind(std::string_view text);
Assistance parse_assistance(std::string_view text);

// Whether highlights derived from the method carry a sign. Attention weights
// are magnitudes only.
bool is_signed_method(ImportanceMethod method);

TutorialPlanKind plan_kind_for(TutorialKind kind);
// Selection algorithm behind an example-bearing tutorial kind.
SelectionMethod selection_method_for(TutorialKind kind);

struct Condition {
  Experiment experiment = Experiment::exp1;
  TutorialKind tutorial = TutorialKind::none;
  Assistance assistance = Assistance::none;
  ImportanceMethod importance_method = ImportanceMethod::svm_coef;

  // Stable identifier, e.g. "exp2/sr_plus_guidelines/signed_highlights/svm_coef".
  std::string key() const;

  bool has_tutorial() const { return tutorial != TutorialKind::none; }
  bool tutorial_has_examples() const;
  bool prediction_shows_highlights() const { return assistance != Assistance::none; }
  // Highlights in the prediction phase carry polarity.
  bool prediction_highlights_signed() const;
  // Any screen of the session shows red/green highlights.
  bool shows_signed_highlights() const;
  bool shows_predicted_label() const { return assistance >= Assistance::signed_plus_label; }
  bool offers_guidelines() const { return assistance >= Assistance::signed_plus_label_guidelines; }
  bool shows_accuracy_statement() const {
    return assistance == Assistance::signed_plus_label_guidelines_accuracy;
  }

  // Throws ValidationError when the experiment's structural rules fail.
  void validate() const;

  friend bool operator==(const Condition&, const Condition&) = default;
  friend auto operator<=>(const Condition&, const Condition&) = default;
};

// The six between-subject conditions of each experiment.
std::vector<Condition> conditions_for(Experiment experiment);

// Uniform draw among conditions whose tally is below quota. Deterministic in
// (tallies, seed). Throws EnrollmentClosed when all are full.
std::size_t assign_condition(std::span<const std::size_t> tallies, std::size_t quota, std::uint64_t seed);

}  // namespace tutorlab

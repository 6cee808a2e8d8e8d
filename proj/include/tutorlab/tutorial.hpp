#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tutorlab/classifier.hpp"
#include "tutorlab/explainer.hpp"
#include "tutorlab/selector.hpp"

namespace tutorlab {

// Protocol timers, in seconds. Fixed regardless of configuration.
inline constexpr int kGuidelinesTimerSeconds = 30;
inline constexpr int kCombinedGuidelinesTimerSeconds = 15;
inline constexpr int kExampleRevealTimerSeconds = 10;

struct GuidelineDoc {
  std::vector<std::string> items;
  std::string source_note;

  // Plain text, one guideline per line. Blank lines are skipped and lines
  // starting with '#' are collected into source_note.
  static GuidelineDoc load(const std::filesystem::path& path);
  static GuidelineDoc defaults();

  friend bool operator==(const GuidelineDoc&, const GuidelineDoc&) = default;
};

struct TutorialItem {
  std::string review_id;
  std::string text;
  std::vector<std::string> tokens;
  Label actual_label = Label::genuine;
  Label predicted_label = Label::genuine;
  HighlightSet highlights;
  int reveal_timer_s = kExampleRevealTimerSeconds;

  friend bool operator==(const TutorialItem&, const TutorialItem&) = default;
};

enum class TutorialPlanKind { none, guidelines, examples, combined };
std::string_view to_string(TutorialPlanKind kind);
TutorialPlanKind parse_tutorial_plan_kind(std::string_view text);

struct TutorialPlan {
  TutorialPlanKind kind = TutorialPlanKind::none;
  int pre_guidelines_timer_s = 0;
  int post_guidelines_timer_s = 0;
  std::optional<SelectionMethod> selection_method;
  std::optional<ImportanceMethod> importance_method;
  std::vector<TutorialItem> items;
  std::optional<GuidelineDoc> guidelines;

  std::string to_json() const;
  static TutorialPlan from_json(std::string_view text);
  void save(const std::filesystem::path& path) const;
  static TutorialPlan load(const std::filesystem::path& path);

  friend bool operator==(const TutorialPlan&, const TutorialPlan&) = default;
};

// Where tutorial highlights come from; must be the same source the
// session's condition uses during prediction.
struct ImportanceSource {
  const ImportanceMatrix* matrix = nullptr;
  const Vocabulary* vocab = nullptr;
};

TutorialPlan no_tutorial();

// Standalone guidelines screen gated by the 30-second timer.
TutorialPlan assemble_guidelines(const GuidelineDoc& guidelines);

// One item per selected review, in selection order. Throws NotFound for ids
// missing from `reviews` or the importance source, and ValidationError for an
// empty selection or a test-split review.
TutorialPlan assemble_examples(const TutorialSelection& selection, std::span<const Review> reviews,
                               const Predictor& predictor, const ImportanceSource& importance);

// Guidelines for 15 s, the selected examples, then guidelines again for 15 s.
TutorialPlan assemble_combined(const GuidelineDoc& guidelines, const TutorialSelection& selection,
                               std::span<const Review> reviews, const Predictor& predictor,
                               const ImportanceSource& importance);

}  // namespace tutorlab

#include <algorithm>

#include "tutorlab/errors.hpp"
#include "tutorlab/platform/platform.hpp"
#include "tutorlab/selector.hpp"

namespace tutorlab {

const TutorialPlan& StudyMaterials::plan_for(const Condition& condition) const {
  const auto it = plans.find({condition.tutorial, condition.importance_method});
  if (it == plans.end()) throw NotFound("no tutorial plan for condition " + condition.key());
  return it->second;
}

StudyMaterials build_study_materials(Experiment experiment, std::span<const Review> reviews,
                                     std::shared_ptr<const LinearModel> model,
                                     std::shared_ptr<const Vocabulary> vocab, GuidelineDoc guidelines,
                                     const MaterialsOptions& options) {
  if (!model || !vocab) throw ValidationError("study materials need a model and a vocabulary");
  StudyMaterials m;
  m.vocab = vocab;
  auto predictor = std::make_shared<LinearSvmPredictor>(model, vocab);
  m.predictor = predictor;
  m.guidelines = std::move(guidelines);

  const auto train = filter_split(reviews, Split::train);
  m.test_reviews = filter_split(reviews, Split::test);
  for (const auto& r : m.test_reviews) m.model_labels.emplace(r.id, predictor->predict_tokens(r.tokens).label);

  const auto conditions = conditions_for(experiment);
  const auto matrix_for = [&](ImportanceMethod method) -> const ImportanceMatrix& {
    auto it = m.prediction_importance.find(method);
    if (it != m.prediction_importance.end()) return it->second;
    switch (method) {
      case ImportanceMethod::svm_coef:
        return m.prediction_importance.emplace(method, coefficient_matrix(*model, reviews, *vocab)).first->second;
      case ImportanceMethod::external_attention:
        if (!options.attention) throw ValidationError("experiment needs an attention importance file");
        return m.prediction_importance.emplace(method, *options.attention).first->second;
      case ImportanceMethod::external_lime:
        if (!options.external_lime) throw ValidationError("experiment needs an external LIME importance file");
        return m.prediction_importance.emplace(method, *options.external_lime).first->second;
      case ImportanceMethod::lime:
        break;
    }
    throw ValidationError("importance method " + std::string(to_string(method)) + " is not used by the platform");
  };

  const auto correct_train = correctly_classified_ids(train, *predictor);
  for (const auto& c : conditions) {
    const auto key = std::make_pair(c.tutorial, c.importance_method);
    const ImportanceMatrix& matrix = matrix_for(c.importance_method);
    if (m.plans.contains(key)) continue;
    const auto kind = plan_kind_for(c.tutorial);
    if (kind == TutorialPlanKind::none) {
      m.plans.emplace(key, no_tutorial());
      continue;
    }
    if (kind == TutorialPlanKind::guidelines) {
      m.plans.emplace(key, assemble_guidelines(m.guidelines));
      continue;
    }
    std::vector<std::string> candidates;
    std::copy_if(correct_train.begin(), correct_train.end(), std::back_inserter(candidates),
                 [&](const std::string& id) { return matrix.contains(id); });
    const SelectionProblem problem(matrix, std::move(candidates), vocab->size(), options.tutorial_budget);
    TutorialSelection selection;
    switch (selection_method_for(c.tutorial)) {
      case SelectionMethod::random: selection = random_select(problem, options.seed); break;
      case SelectionMethod::sp_lime: selection = greedy_coverage(problem); break;
      case SelectionMethod::spaced_repetition: selection = greedy_sr(problem); break;
    }
    const ImportanceSource source{&matrix, vocab.get()};
    m.plans.emplace(key, kind == TutorialPlanKind::combined
                             ? assemble_combined(m.guidelines, selection, reviews, *predictor, source)
                             : assemble_examples(selection, reviews, *predictor, source));
  }
  return m;
}

}  // namespace tutorlab

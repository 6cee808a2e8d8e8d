#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tutorlab/classifier.hpp"
#include "tutorlab/explainer.hpp"

namespace tutorlab {

enum class SelectionMethod { random, sp_lime, spaced_repetition };

std::string_view to_string(SelectionMethod method);
// Accepts the canonical names plus the CLI spellings "sp-lime" and "sr".
SelectionMethod parse_selection_method(std::string_view text);

// I_j = sqrt(sum_i |W_ij|) over the given rows.
Eigen::VectorXd global_importance(std::span<const ImportanceRow> rows, std::size_t dimension);

class SelectionProblem {
 public:
  // Rows are looked up in `importance` for each candidate id (NotFound when
  // absent). Throws ValidationError if budget exceeds the candidate count or
  // a feature index is outside [0, dimension).
  SelectionProblem(const ImportanceMatrix& importance, std::vector<std::string> candidate_ids,
                   std::size_t dimension, std::size_t budget = 10);

  std::size_t size() const { return ids_.size(); }
  std::size_t budget() const { return budget_; }
  std::size_t dimension() const { return static_cast<std::size_t>(importance_.size()); }
  const std::vector<std::string>& candidate_ids() const { return ids_; }
  const ImportanceRow& row(std::size_t candidate) const { return rows_[candidate]; }
  // Features with a nonzero weight in the candidate's row, ascending.
  const std::vector<FeatureIndex>& support(std::size_t candidate) const { return support_[candidate]; }
  const Eigen::VectorXd& importance() const { return importance_; }

  // Candidate positions for ids; throws NotFound / ValidationError on unknown
  // or repeated ids.
  std::vector<std::size_t> positions_of(std::span<const std::string> ids) const;

 private:
  std::vector<std::string> ids_;
  std::vector<ImportanceRow> rows_;
  std::vector<std::vector<FeatureIndex>> support_;
  Eigen::VectorXd importance_;
  std::size_t budget_;
};

struct TutorialSelection {
  SelectionMethod method = SelectionMethod::random;
  std::vector<std::string> sequence;
  double objective_value = 0.0;
  std::uint64_t seed = 0;
  std::size_t budget = 0;

  // JSON record: method, seed, budget, ordered ids, objective value.
  std::string to_json() const;
  static TutorialSelection from_json(std::string_view text);
  void save(const std::filesystem::path& path) const;
  static TutorialSelection load(const std::filesystem::path& path);

  friend bool operator==(const TutorialSelection&, const TutorialSelection&) = default;
};

// Sum of I_j over features covered by at least one selected example.
double coverage_objective(std::span<const std::size_t> sequence, const SelectionProblem& problem);
double coverage_objective(std::span<const std::string> ids, const SelectionProblem& problem);

// Sum of I_j over features whose first and last occurrence positions in the
// sequence are at least three apart.
double sr_objective(std::span<const std::size_t> sequence, const SelectionProblem& problem);
double sr_objective(std::span<const std::string> ids, const SelectionProblem& problem);

// Appends the candidate with the largest marginal coverage gain until the
// budget is reached or no candidate adds anything. Ties keep candidate order.
TutorialSelection greedy_coverage(const SelectionProblem& problem);

// Builds the sequence by appending the candidate that most increases the
// spaced-repetition objective. When every gain is zero it appends the
// candidate with the most importance among features not yet counted. Always
// fills the budget.
TutorialSelection greedy_sr(const SelectionProblem& problem);

// Uniform sample without replacement; objective_value is the coverage value.
TutorialSelection random_select(const SelectionProblem& problem, std::uint64_t seed);

enum class SelectionObjective { coverage, spaced_repetition };

// Exact optimum by enumeration. Coverage enumerates C(n, B) sets and returns
// the winner ordered by in-set greedy gain; spaced repetition enumerates all
// n!/(n-B)! sequences. Throws LimitExceeded above `limit` evaluations.
TutorialSelection brute_force_select(const SelectionProblem& problem, SelectionObjective objective,
                                     double limit = 5e6);

// Ids of training reviews the predictor labels correctly, in input order.
std::vector<std::string> correctly_classified_ids(std::span<const Review> reviews, const Predictor& predictor);

}  // namespace tutorlab

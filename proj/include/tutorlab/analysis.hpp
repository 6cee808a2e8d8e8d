#pragma once

#include "json.hpp"

#include <array>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "tutorlab/platform/condition.hpp"
#include "tutorlab/platform/event_store.hpp"
#include "tutorlab/platform/session.hpp"
#include "tutorlab/stats.hpp"

namespace tutorlab {

// Every session in the log, in creation order.
std::vector<Session> load_sessions(const EventStore& store);

// Sessions that answered every prediction item and were not disqualified.
bool is_analyzable(const Session& session);
double session_accuracy(const Session& session);
double session_model_accuracy(const Session& session);

struct ConditionStats {
  Condition condition;
  std::size_t n = 0;
  double mean_accuracy = 0.0;
  // Sample SD / sqrt(n); 0 with single_session set when n = 1.
  double standard_error = 0.0;
  bool single_session = false;
  std::optional<double> useful_fraction;
  // Sessions whose accuracy is strictly above the model's on the same items.
  std::size_t outperform_count = 0;
  double model_accuracy = 0.0;
  std::size_t correct_responses = 0;
  std::size_t total_responses = 0;
};

struct ConditionAccuracy {
  std::vector<ConditionStats> stats;  // conditions with sessions, in experiment order
  std::vector<std::string> warnings;
};

ConditionAccuracy condition_accuracy(std::span<const Session> sessions, Experiment experiment);

// Per-condition session accuracies aligned with conditions_for(experiment).
std::vector<std::vector<double>> accuracy_groups(std::span<const Session> sessions, Experiment experiment);

struct ChiSquaredBlock {
  std::string label;
  std::array<std::array<std::int64_t, 2>, 2> table{};
  ChiSquaredResult result;
};

struct AnalysisReport {
  Experiment experiment = Experiment::exp1;
  ConditionAccuracy accuracy;
  std::optional<AnovaResult> one_way;
  // Exp3 only: factor A is the tutorial (none, sr), factor B the method.
  std::optional<TwoWayAnovaResult> two_way;
  std::optional<PairwiseResult> pairwise;
  std::vector<ChiSquaredBlock> chi_squared;
  std::vector<std::string> warnings;
};

// Statistics that cannot be computed are replaced by warnings. When
// `comparison` is non-empty the report adds a chi-squared test of pooled
// outperform counts between the two session sets.
AnalysisReport analyze(std::span<const Session> sessions, Experiment experiment,
                       std::span<const Session> comparison = {});

std::string format_report(const AnalysisReport& report);

// One row per prediction response of every session.
void write_responses_csv(std::ostream& out, std::span<const Session> sessions);
nlohmann::json responses_json(std::span<const Session> sessions);

}  // namespace tutorlab

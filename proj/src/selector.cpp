#include "tutorlab/selector.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>

#include "tutorlab/errors.hpp"
#include "tutorlab/random.hpp"

namespace tutorlab {
namespace {

using nlohmann::json;

double coverage_gain(const SelectionProblem& problem, std::size_t candidate, const std::vector<bool>& covered) {
  double gain = 0.0;
  for (const auto j : problem.support(candidate)) {
    if (!covered[static_cast<std::size_t>(j)]) gain += problem.importance()[j];
  }
  return gain;
}

// In-set greedy order: the element with the largest gain over the ones
// already placed comes next.
std::vector<std::size_t> order_by_greedy_gain(std::vector<std::size_t> members, const SelectionProblem& problem) {
  std::vector<std::size_t> ordered;
  std::vector<bool> covered(problem.dimension(), false);
  while (!members.empty()) {
    std::size_t best = 0;
    double best_gain = -1.0;
    for (std::size_t k = 0; k < members.size(); ++k) {
      const double g = coverage_gain(problem, members[k], covered);
      if (g > best_gain) {
        best_gain = g;
        best = k;
      }
    }
    ordered.push_back(members[best]);
    for (const auto j : problem.support(members[best])) covered[static_cast<std::size_t>(j)] = true;
    members.erase(members.begin() + static_cast<std::ptrdiff_t>(best));
  }
  return ordered;
}

std::vector<std::string> ids_for(const SelectionProblem& problem, std::span<const std::size_t> positions) {
  std::vector<std::string> out;
  out.reserve(positions.size());
  for (const auto p : positions) out.push_back(problem.candidate_ids()[p]);
  return out;
}

double count_sequences(std::size_t n, std::size_t b, bool ordered) {
  double count = 1.0;
  for (std::size_t k = 0; k < b; ++k) {
    count *= static_cast<double>(n - k);
    if (!ordered) count /= static_cast<double>(k + 1);
  }
  return count;
}

}  // namespace

std::string_view to_string(SelectionMethod method) {
  switch (method) {
    case SelectionMethod::random: return "random";
    case SelectionMethod::sp_lime: return "sp_lime";
    case SelectionMethod::spaced_repetition: return "spaced_repetition";
  }
  return "random";
}

SelectionMethod parse_selection_method(std::string_view text) {
  if (text == "random") return SelectionMethod::random;
  if (text == "sp_lime" || text == "sp-lime") return SelectionMethod::sp_lime;
  if (text == "spaced_repetition" || text == "sr") return SelectionMethod::spaced_repetition;
  throw ValidationError("unknown selection method '" + std::string(text) + "'");
}

Eigen::VectorXd global_importance(std::span<const ImportanceRow> rows, std::size_t dimension) {
  Eigen::VectorXd total = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dimension));
  for (const auto& row : rows) {
    for (const auto& e : row.entries) {
      if (e.feature < 0 || static_cast<std::size_t>(e.feature) >= dimension) {
        throw ValidationError("global_importance: feature index out of range");
      }
      total[e.feature] += std::abs(e.weight);
    }
  }
  return total.cwiseSqrt();
}

SelectionProblem::SelectionProblem(const ImportanceMatrix& importance, std::vector<std::string> candidate_ids,
                                   std::size_t dimension, std::size_t budget)
    : ids_(std::move(candidate_ids)), budget_(budget) {
  if (budget_ > ids_.size()) {
    throw ValidationError("selection budget " + std::to_string(budget_) + " exceeds " +
                          std::to_string(ids_.size()) + " candidates");
  }
  std::set<std::string_view> seen;
  for (const auto& id : ids_) {
    if (!seen.insert(id).second) throw ValidationError("duplicate candidate id '" + id + "'");
    rows_.push_back(importance.row(id));
  }
  importance_ = global_importance(rows_, dimension);
  for (const auto& row : rows_) {
    std::vector<FeatureIndex> s;
    for (const auto& e : row.entries) {
      if (e.weight != 0.0) s.push_back(e.feature);
    }
    support_.push_back(std::move(s));
  }
}

std::vector<std::size_t> SelectionProblem::positions_of(std::span<const std::string> ids) const {
  std::vector<std::size_t> out;
  std::set<std::size_t> seen;
  for (const auto& id : ids) {
    const auto it = std::find(ids_.begin(), ids_.end(), id);
    if (it == ids_.end()) throw NotFound("'" + id + "' is not a selection candidate");
    const auto pos = static_cast<std::size_t>(it - ids_.begin());
    if (!seen.insert(pos).second) throw ValidationError("'" + id + "' appears twice in the sequence");
    out.push_back(pos);
  }
  return out;
}

std::string TutorialSelection::to_json() const {
  json j;
  j["method"] = std::string(to_string(method));
  j["seed"] = seed;
  j["budget"] = budget;
  j["sequence"] = sequence;
  j["objective_value"] = objective_value;
  return j.dump(2);
}

TutorialSelection TutorialSelection::from_json(std::string_view text) {
  try {
    const auto j = json::parse(text);
    TutorialSelection s;
    s.method = parse_selection_method(j.at("method").get<std::string>());
    s.seed = j.at("seed").get<std::uint64_t>();
    s.budget = j.at("budget").get<std::size_t>();
    s.sequence = j.at("sequence").get<std::vector<std::string>>();
    s.objective_value = j.at("objective_value").get<double>();
    return s;
  } catch (const json::exception& e) {
    throw IngestionError(std::string("malformed selection record: ") + e.what());
  }
}

void TutorialSelection::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IngestionError("cannot write " + path.string());
  out << to_json() << '\n';
}

TutorialSelection TutorialSelection::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open selection " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_json(buffer.str());
}

double coverage_objective(std::span<const std::size_t> sequence, const SelectionProblem& problem) {
  std::vector<bool> covered(problem.dimension(), false);
  double value = 0.0;
  for (const auto c : sequence) {
    for (const auto j : problem.support(c)) {
      if (!covered[static_cast<std::size_t>(j)]) {
        covered[static_cast<std::size_t>(j)] = true;
        value += problem.importance()[j];
      }
    }
  }
  return value;
}

double coverage_objective(std::span<const std::string> ids, const SelectionProblem& problem) {
  return coverage_objective(problem.positions_of(ids), problem);
}

double sr_objective(std::span<const std::size_t> sequence, const SelectionProblem& problem) {
  const std::size_t d = problem.dimension();
  std::vector<std::ptrdiff_t> first(d, -1), last(d, -1);
  for (std::size_t k = 0; k < sequence.size(); ++k) {
    for (const auto j : problem.support(sequence[k])) {
      const auto f = static_cast<std::size_t>(j);
      if (first[f] < 0) first[f] = static_cast<std::ptrdiff_t>(k);
      last[f] = static_cast<std::ptrdiff_t>(k);
    }
  }
  double value = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    if (first[j] >= 0 && last[j] - first[j] >= 3) value += problem.importance()[static_cast<Eigen::Index>(j)];
  }
  return value;
}

double sr_objective(std::span<const std::string> ids, const SelectionProblem& problem) {
  return sr_objective(problem.positions_of(ids), problem);
}

TutorialSelection greedy_coverage(const SelectionProblem& problem) {
  std::vector<bool> covered(problem.dimension(), false);
  std::vector<bool> used(problem.size(), false);
  std::vector<std::size_t> sequence;
  while (sequence.size() < problem.budget()) {
    std::optional<std::size_t> best;
    double best_gain = 0.0;
    for (std::size_t c = 0; c < problem.size(); ++c) {
      if (used[c]) continue;
      const double gain = coverage_gain(problem, c, covered);
      if (gain > best_gain) {
        best_gain = gain;
        best = c;
      }
    }
    if (!best) break;
    used[*best] = true;
    sequence.push_back(*best);
    for (const auto j : problem.support(*best)) covered[static_cast<std::size_t>(j)] = true;
  }
  TutorialSelection out;
  out.method = SelectionMethod::sp_lime;
  out.budget = problem.budget();
  out.objective_value = coverage_objective(sequence, problem);
  out.sequence = ids_for(problem, sequence);
  return out;
}

TutorialSelection greedy_sr(const SelectionProblem& problem) {
  const std::size_t d = problem.dimension();
  const auto& importance = problem.importance();
  std::vector<std::ptrdiff_t> first(d, -1);
  std::vector<bool> counted(d, false);
  std::vector<bool> used(problem.size(), false);
  std::vector<std::size_t> sequence;

  while (sequence.size() < problem.budget()) {
    const auto position = static_cast<std::ptrdiff_t>(sequence.size());
    std::optional<std::size_t> best;
    double best_gain = 0.0;
    for (std::size_t c = 0; c < problem.size(); ++c) {
      if (used[c]) continue;
      double gain = 0.0;
      for (const auto j : problem.support(c)) {
        const auto f = static_cast<std::size_t>(j);
        if (!counted[f] && first[f] >= 0 && position - first[f] >= 3) gain += importance[j];
      }
      if (gain > best_gain) {
        best_gain = gain;
        best = c;
      }
    }
    if (!best) {
      // Stalled: prefer candidates carrying important features that are not
      // yet counted, so later positions can complete their gaps.
      double best_fallback = -1.0;
      for (std::size_t c = 0; c < problem.size(); ++c) {
        if (used[c]) continue;
        double gain = 0.0;
        for (const auto j : problem.support(c)) {
          if (!counted[static_cast<std::size_t>(j)]) gain += importance[j];
        }
        if (gain > best_fallback) {
          best_fallback = gain;
          best = c;
        }
      }
    }
    if (!best) break;
    used[*best] = true;
    sequence.push_back(*best);
    for (const auto j : problem.support(*best)) {
      const auto f = static_cast<std::size_t>(j);
      if (first[f] < 0) first[f] = position;
      if (position - first[f] >= 3) counted[f] = true;
    }
  }
  TutorialSelection out;
  out.method = SelectionMethod::spaced_repetition;
  out.budget = problem.budget();
  out.objective_value = sr_objective(sequence, problem);
  out.sequence = ids_for(problem, sequence);
  return out;
}

TutorialSelection random_select(const SelectionProblem& problem, std::uint64_t seed) {
  std::vector<std::size_t> order(problem.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(mix_seed(seed, 0x7a11));
  // Partial Fisher-Yates: the first `budget` slots are a uniform sample.
  for (std::size_t i = 0; i < problem.budget(); ++i) {
    const std::size_t j = i + uniform_index(rng, order.size() - i);
    std::swap(order[i], order[j]);
  }
  order.resize(problem.budget());
  TutorialSelection out;
  out.method = SelectionMethod::random;
  out.seed = seed;
  out.budget = problem.budget();
  out.objective_value = coverage_objective(order, problem);
  out.sequence = ids_for(problem, order);
  return out;
}

TutorialSelection brute_force_select(const SelectionProblem& problem, SelectionObjective objective, double limit) {
  const std::size_t n = problem.size();
  const std::size_t b = problem.budget();
  const bool ordered = objective == SelectionObjective::spaced_repetition;
  if (count_sequences(n, b, ordered) > limit) {
    throw LimitExceeded("brute_force_select: enumeration exceeds the configured limit");
  }

  TutorialSelection out;
  out.method = ordered ? SelectionMethod::spaced_repetition : SelectionMethod::sp_lime;
  out.budget = b;
  if (b == 0) return out;

  std::vector<std::size_t> best;
  double best_value = -1.0;
  std::vector<std::size_t> combo(b);
  std::iota(combo.begin(), combo.end(), std::size_t{0});
  while (true) {
    if (ordered) {
      std::vector<std::size_t> perm = combo;
      do {
        const double v = sr_objective(perm, problem);
        // Combinations are visited in lexicographic order but their
        // permutations interleave, so compare sequences on ties.
        if (v > best_value || (v == best_value && perm < best)) {
          best_value = v;
          best = perm;
        }
      } while (std::next_permutation(perm.begin(), perm.end()));
    } else {
      const double v = coverage_objective(combo, problem);
      if (v > best_value) {
        best_value = v;
        best = combo;
      }
    }
    // Next combination in lexicographic order.
    std::size_t i = b;
    while (i > 0 && combo[i - 1] == n - b + i - 1) --i;
    if (i == 0) break;
    ++combo[i - 1];
    for (std::size_t k = i; k < b; ++k) combo[k] = combo[k - 1] + 1;
  }
  if (!ordered) best = order_by_greedy_gain(best, problem);
  out.objective_value = ordered ? sr_objective(best, problem) : coverage_objective(best, problem);
  out.sequence = ids_for(problem, best);
  return out;
}

std::vector<std::string> correctly_classified_ids(std::span<const Review> reviews, const Predictor& predictor) {
  std::vector<std::string> ids;
  for (const auto& r : reviews) {
    if (r.split == Split::train && predictor.predict(r.text).label == r.label) ids.push_back(r.id);
  }
  return ids;
}

}  // namespace tutorlab

#include "tutorlab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "tutorlab/errors.hpp"
#include "tutorlab/platform/wire.hpp"

namespace tutorlab {

using nlohmann::json;

std::vector<Session> load_sessions(const EventStore& store) {
  const auto events = store.read_all();
  std::vector<Session> out;
  std::map<std::string, std::size_t, std::less<>> index;
  for (const auto& e : events) {
    if (e.type == "created") {
      if (index.contains(e.session_id)) throw IntegrityError("session '" + e.session_id + "' created twice");
      index.emplace(e.session_id, out.size());
      out.emplace_back();
    }
    const auto it = index.find(e.session_id);
    if (it == index.end()) throw IntegrityError("event for unknown session '" + e.session_id + "'");
    out[it->second].apply(e);
  }
  return out;
}

bool is_analyzable(const Session& s) { return !s.disqualified && s.completed_predictions(); }

double session_accuracy(const Session& s) {
  if (s.responses.empty()) throw StatisticsError("session " + s.session_id + " has no responses");
  return static_cast<double>(s.correct_count()) / static_cast<double>(s.responses.size());
}

double session_model_accuracy(const Session& s) {
  if (s.responses.empty()) throw StatisticsError("session " + s.session_id + " has no responses");
  const auto n = std::count_if(s.responses.begin(), s.responses.end(),
                               [](const PredictionResponse& r) { return r.model_correct; });
  return static_cast<double>(n) / static_cast<double>(s.responses.size());
}

std::vector<std::vector<double>> accuracy_groups(std::span<const Session> sessions, Experiment experiment) {
  const auto conditions = conditions_for(experiment);
  std::vector<std::vector<double>> groups(conditions.size());
  for (const auto& s : sessions) {
    if (!is_analyzable(s)) continue;
    const auto it = std::find(conditions.begin(), conditions.end(), s.condition);
    if (it == conditions.end()) continue;
    groups[static_cast<std::size_t>(it - conditions.begin())].push_back(session_accuracy(s));
  }
  return groups;
}

ConditionAccuracy condition_accuracy(std::span<const Session> sessions, Experiment experiment) {
  ConditionAccuracy out;
  for (const auto& c : conditions_for(experiment)) {
    ConditionStats st;
    st.condition = c;
    std::vector<double> acc;
    std::size_t useful_yes = 0, useful_answers = 0;
    double model_sum = 0.0;
    for (const auto& s : sessions) {
      if (!(s.condition == c) || !is_analyzable(s)) continue;
      const double a = session_accuracy(s);
      const double m = session_model_accuracy(s);
      acc.push_back(a);
      model_sum += m;
      if (a > m) ++st.outperform_count;
      st.correct_responses += s.correct_count();
      st.total_responses += s.responses.size();
      if (s.survey && s.survey->tutorial_useful) {
        ++useful_answers;
        if (*s.survey->tutorial_useful) ++useful_yes;
      }
    }
    if (acc.empty()) {
      out.warnings.push_back("condition " + c.key() + " has no completed sessions; omitted");
      continue;
    }
    st.n = acc.size();
    st.mean_accuracy = mean(acc);
    st.model_accuracy = model_sum / static_cast<double>(st.n);
    if (st.n == 1) {
      st.single_session = true;
    } else {
      st.standard_error = std::sqrt(sample_variance(acc) / static_cast<double>(st.n));
    }
    if (useful_answers > 0) st.useful_fraction = static_cast<double>(useful_yes) / static_cast<double>(useful_answers);
    out.stats.push_back(st);
  }
  return out;
}

namespace {

std::array<std::array<std::int64_t, 2>, 2> outperform_table(std::size_t out_a, std::size_t n_a, std::size_t out_b,
                                                            std::size_t n_b) {
  return {{{static_cast<std::int64_t>(out_a), static_cast<std::int64_t>(n_a - out_a)},
           {static_cast<std::int64_t>(out_b), static_cast<std::int64_t>(n_b - out_b)}}};
}

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

std::string format_p(double p) { return p < 1e-4 ? fmt("%.3e", p) : fmt("%.4f", p); }

void append_anova(std::ostringstream& os, const std::string& name, const AnovaResult& r) {
  os << name << ": F(" << r.df_between << ", " << r.df_within << ") = " << fmt("%.4f", r.F)
     << ", p = " << format_p(r.p_value) << ", eta^2 = " << fmt("%.4f", r.eta_squared) << '\n';
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace

AnalysisReport analyze(std::span<const Session> sessions, Experiment experiment, std::span<const Session> comparison) {
  AnalysisReport r;
  r.experiment = experiment;
  r.accuracy = condition_accuracy(sessions, experiment);
  r.warnings = r.accuracy.warnings;
  const auto conditions = conditions_for(experiment);
  const auto groups = accuracy_groups(sessions, experiment);

  std::vector<std::vector<double>> present;
  for (const auto& g : groups) {
    if (!g.empty()) present.push_back(g);
  }
  try {
    r.one_way = one_way_anova(present);
  } catch (const StatisticsError& e) {
    r.warnings.push_back(std::string("one-way ANOVA not computed: ") + e.what());
  }
  try {
    r.pairwise = pairwise_comparisons(groups);
    for (const auto& w : r.pairwise->warnings) r.warnings.push_back(w);
  } catch (const StatisticsError& e) {
    r.warnings.push_back(std::string("pairwise comparisons not computed: ") + e.what());
  }
  if (experiment == Experiment::exp3) {
    // conditions_for(exp3) is ordered tutorial-major: {none, sr} x 3 methods.
    std::vector<std::vector<std::vector<double>>> cells(2, std::vector<std::vector<double>>(3));
    for (std::size_t c = 0; c < conditions.size(); ++c) cells[c / 3][c % 3] = groups[c];
    try {
      r.two_way = two_way_anova(cells);
    } catch (const StatisticsError& e) {
      r.warnings.push_back(std::string("two-way ANOVA not computed: ") + e.what());
    }
  }

  const auto& stats = r.accuracy.stats;
  for (std::size_t i = 0; i < stats.size(); ++i) {
    for (std::size_t j = i + 1; j < stats.size(); ++j) {
      ChiSquaredBlock block;
      block.label = "outperform: " + stats[i].condition.key() + " vs " + stats[j].condition.key();
      block.table = outperform_table(stats[i].outperform_count, stats[i].n, stats[j].outperform_count, stats[j].n);
      try {
        block.result = chi_squared_2x2(block.table);
        r.chi_squared.push_back(block);
      } catch (const StatisticsError& e) {
        r.warnings.push_back(block.label + " skipped: " + e.what());
      }
    }
  }
  if (!comparison.empty()) {
    const auto pooled = [](std::span<const Session> ss) {
      std::pair<std::size_t, std::size_t> out{0, 0};
      for (const auto& s : ss) {
        if (!is_analyzable(s)) continue;
        ++out.second;
        if (session_accuracy(s) > session_model_accuracy(s)) ++out.first;
      }
      return out;
    };
    const auto a = pooled(sessions);
    const auto b = pooled(comparison);
    ChiSquaredBlock block;
    block.label = "outperform: this store vs comparison store";
    block.table = outperform_table(a.first, a.second, b.first, b.second);
    try {
      block.result = chi_squared_2x2(block.table);
      r.chi_squared.push_back(block);
    } catch (const StatisticsError& e) {
      r.warnings.push_back(block.label + " skipped: " + e.what());
    }
  }
  return r;
}

std::string format_report(const AnalysisReport& r) {
  std::ostringstream os;
  os << "Experiment " << to_string(r.experiment) << "\n\n";
  os << "condition\tn\tmean\tSE\tuseful%\toutperform n\toutperform %\tmodel\n";
  for (const auto& s : r.accuracy.stats) {
    os << s.condition.key() << '\t' << s.n << '\t' << fmt("%.4f", s.mean_accuracy) << '\t'
       << fmt("%.4f", s.standard_error) << (s.single_session ? " (n=1)" : "") << '\t'
       << (s.useful_fraction ? fmt("%.1f", 100.0 * *s.useful_fraction) : std::string("-")) << '\t'
       << s.outperform_count << '\t' << fmt("%.1f", 100.0 * static_cast<double>(s.outperform_count) / static_cast<double>(s.n))
       << '\t' << fmt("%.4f", s.model_accuracy) << '\n';
  }
  os << '\n';
  if (r.one_way) append_anova(os, "One-way ANOVA (accuracy by condition)", *r.one_way);
  if (r.two_way) {
    append_anova(os, "Two-way ANOVA, tutorial", r.two_way->factor_a);
    append_anova(os, "Two-way ANOVA, method", r.two_way->factor_b);
    append_anova(os, "Two-way ANOVA, interaction", r.two_way->interaction);
  }
  if (r.pairwise) {
    const auto conditions = conditions_for(r.experiment);
    os << "\nPairwise comparisons, method=" << r.pairwise->method << '\n';
    for (const auto& p : r.pairwise->pairs) {
      os << conditions[p.first].key() << " vs " << conditions[p.second].key() << ": t = " << fmt("%.4f", p.test.t)
         << ", df = " << fmt("%.2f", p.test.df) << ", p_adj = " << format_p(p.p_adjusted) << '\n';
    }
  }
  if (!r.chi_squared.empty()) {
    os << "\nChi-squared tests\n";
    for (const auto& c : r.chi_squared) {
      os << c.label << ": [[" << c.table[0][0] << ", " << c.table[0][1] << "], [" << c.table[1][0] << ", "
         << c.table[1][1] << "]] chi2 = " << fmt("%.4f", c.result.statistic) << ", p = " << format_p(c.result.p_value)
         << '\n';
    }
  }
  if (!r.warnings.empty()) {
    os << "\nWarnings\n";
    for (const auto& w : r.warnings) os << "- " << w << '\n';
  }
  return os.str();
}

void write_responses_csv(std::ostream& out, std::span<const Session> sessions) {
  out << "session_id,participant_id,experiment,tutorial,assistance,importance_method,disqualified,position,"
         "review_id,chosen_label,correct,trust_rating,elapsed_ms,model_label,model_correct\n";
  for (const auto& s : sessions) {
    for (std::size_t i = 0; i < s.responses.size(); ++i) {
      const auto& r = s.responses[i];
      out << csv_field(s.session_id) << ',' << csv_field(s.participant_id) << ',' << to_string(s.condition.experiment)
          << ',' << to_string(s.condition.tutorial) << ',' << to_string(s.condition.assistance) << ','
          << to_string(s.condition.importance_method) << ',' << (s.disqualified ? "true" : "false") << ',' << i + 1
          << ',' << csv_field(r.review_id) << ',' << to_string(r.chosen_label) << ','
          << (r.correct ? "true" : "false") << ',' << (r.trust_rating ? std::to_string(*r.trust_rating) : "") << ','
          << r.elapsed_ms << ',' << to_string(r.model_label) << ',' << (r.model_correct ? "true" : "false") << '\n';
    }
  }
}

json responses_json(std::span<const Session> sessions) {
  json rows = json::array();
  for (const auto& s : sessions) {
    for (std::size_t i = 0; i < s.responses.size(); ++i) {
      json row = s.responses[i];
      row["session_id"] = s.session_id;
      row["participant_id"] = s.participant_id;
      row["experiment"] = to_string(s.condition.experiment);
      row["tutorial"] = to_string(s.condition.tutorial);
      row["assistance"] = to_string(s.condition.assistance);
      row["importance_method"] = to_string(s.condition.importance_method);
      row["disqualified"] = s.disqualified;
      row["position"] = i + 1;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace tutorlab

#include "tutorlab/explainer.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "tutorlab/errors.hpp"
#include "tutorlab/random.hpp"

namespace tutorlab {
namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

bool parse_bool(std::string_view s, bool& out) {
  if (s == "true" || s == "1") {
    out = true;
    return true;
  }
  if (s == "false" || s == "0") {
    out = false;
    return true;
  }
  return false;
}

// Weighted least squares through normal equations over a fixed design. The
// Gram matrix is formed once; every subset fit then works on a small
// principal submatrix, which keeps forward selection cheap.
class WeightedGram {
 public:
  WeightedGram(const Eigen::MatrixXd& design, const Eigen::VectorXd& y, const Eigen::VectorXd& w) {
    const Eigen::MatrixXd weighted = design.array().colwise() * w.array();
    gram_ = design.transpose() * weighted;
    cross_ = weighted.transpose() * y;
    yy_ = (y.array().square() * w.array()).sum();
  }

  struct Fit {
    bool ok = false;
    double sse = 0.0;
    Eigen::VectorXd beta;
  };

  Fit fit(const std::vector<Eigen::Index>& columns) const {
    const auto k = static_cast<Eigen::Index>(columns.size());
    Eigen::MatrixXd g(k, k);
    Eigen::VectorXd c(k);
    for (Eigen::Index r = 0; r < k; ++r) {
      c[r] = cross_[columns[r]];
      for (Eigen::Index s = 0; s < k; ++s) g(r, s) = gram_(columns[r], columns[s]);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(g);
    lu.setThreshold(1e-10);
    Fit out;
    if (lu.rank() < k) return out;
    out.ok = true;
    out.beta = lu.solve(c);
    out.sse = yy_ - c.dot(out.beta);
    return out;
  }

 private:
  Eigen::MatrixXd gram_;
  Eigen::VectorXd cross_;
  double yy_ = 0.0;
};

}  // namespace

std::string_view to_string(ImportanceMethod method) {
  switch (method) {
    case ImportanceMethod::svm_coef: return "svm_coef";
    case ImportanceMethod::lime: return "lime";
    case ImportanceMethod::external_attention: return "external_attention";
    case ImportanceMethod::external_lime: return "external_lime";
  }
  return "svm_coef";
}

ImportanceMethod parse_importance_method(std::string_view text) {
  for (const auto m : {ImportanceMethod::svm_coef, ImportanceMethod::lime, ImportanceMethod::external_attention,
                       ImportanceMethod::external_lime}) {
    if (to_string(m) == text) return m;
  }
  throw ValidationError("unknown importance method '" + std::string(text) + "'");
}

double ImportanceRow::weight_of(FeatureIndex feature) const {
  const auto it = std::lower_bound(entries.begin(), entries.end(), feature,
                                   [](const ImportanceEntry& e, FeatureIndex f) { return e.feature < f; });
  return (it != entries.end() && it->feature == feature) ? it->weight : 0.0;
}

ImportanceRow truncate_top(std::vector<ImportanceEntry> entries, std::size_t k) {
  std::sort(entries.begin(), entries.end(), [](const ImportanceEntry& a, const ImportanceEntry& b) {
    const double ma = std::abs(a.weight), mb = std::abs(b.weight);
    if (ma != mb) return ma > mb;
    return a.feature < b.feature;
  });
  if (entries.size() > k) entries.resize(k);
  std::sort(entries.begin(), entries.end(),
            [](const ImportanceEntry& a, const ImportanceEntry& b) { return a.feature < b.feature; });
  return ImportanceRow{std::move(entries)};
}

void ImportanceMatrix::add_row(std::string example_id, ImportanceRow row) {
  if (position_.contains(example_id)) throw ValidationError("duplicate importance row for '" + example_id + "'");
  if (row.size() > kTopFeatures) {
    throw ValidationError("importance row for '" + example_id + "' has more than 10 entries");
  }
  std::sort(row.entries.begin(), row.entries.end(),
            [](const ImportanceEntry& a, const ImportanceEntry& b) { return a.feature < b.feature; });
  for (std::size_t i = 0; i < row.entries.size(); ++i) {
    if (i > 0 && row.entries[i].feature == row.entries[i - 1].feature) {
      throw ValidationError("importance row for '" + example_id + "' repeats a feature");
    }
    if (!std::isfinite(row.entries[i].weight)) {
      throw ValidationError("importance row for '" + example_id + "' has a non-finite weight");
    }
    if (!signed_ && row.entries[i].weight < 0.0) {
      throw ValidationError("negative weight in unsigned importance row for '" + example_id + "'");
    }
  }
  position_.emplace(example_id, ids_.size());
  ids_.push_back(std::move(example_id));
  rows_.push_back(std::move(row));
}

const ImportanceRow* ImportanceMatrix::find(std::string_view id) const {
  const auto it = position_.find(id);
  return it == position_.end() ? nullptr : &rows_[it->second];
}

const ImportanceRow& ImportanceMatrix::row(std::string_view id) const {
  if (const auto* r = find(id)) return *r;
  throw NotFound("no importance row for '" + std::string(id) + "'");
}

void ImportanceMatrix::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IngestionError("cannot write " + path.string());
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    out << ids_[i] << '\t' << to_string(method_) << '\t' << (signed_ ? "true" : "false");
    for (const auto& e : rows_[i].entries) out << '\t' << e.feature << ':' << format_double(e.weight);
    out << '\n';
  }
}

ImportanceMatrix ingest_importance(const std::filesystem::path& path, bool is_signed, const IngestContext& context,
                                   std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open importance file " + path.string());
  std::set<std::string_view> known;
  if (context.known_ids) known.insert(context.known_ids->begin(), context.known_ids->end());

  std::optional<ImportanceMatrix> matrix;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = path.filename().string() + " line " + std::to_string(line_no);
    const auto fields = split_tabs(line);
    if (fields.size() < 3) throw IngestionError(where + ": expected id, method and signed fields");
    const std::string& id = fields[0];
    ImportanceMethod method{};
    try {
      method = parse_importance_method(fields[1]);
    } catch (const ValidationError& e) {
      throw IngestionError(where + ": " + e.what());
    }
    bool declared_signed = false;
    if (!parse_bool(fields[2], declared_signed)) throw IngestionError(where + ": bad signed field");
    if (declared_signed != is_signed) {
      throw IngestionError(where + ": row declares signed=" + fields[2] + " but the matrix is loaded as " +
                           (is_signed ? "signed" : "unsigned"));
    }
    if (!matrix) matrix.emplace(method, is_signed);
    if (matrix->method() != method) throw IngestionError(where + ": mixed methods in one file");
    if (context.known_ids && !known.contains(id)) throw IngestionError(where + ": unknown example id '" + id + "'");

    std::vector<ImportanceEntry> entries;
    for (std::size_t f = 3; f < fields.size(); ++f) {
      const auto colon = fields[f].find(':');
      if (colon == std::string::npos) throw IngestionError(where + ": bad pair '" + fields[f] + "'");
      char* end = nullptr;
      const std::string index_text = fields[f].substr(0, colon);
      const long long index = std::strtoll(index_text.c_str(), &end, 10);
      if (index_text.empty() || *end != '\0' || index < 0) throw IngestionError(where + ": bad feature index");
      const std::string weight_text = fields[f].substr(colon + 1);
      const double weight = std::strtod(weight_text.c_str(), &end);
      if (weight_text.empty() || *end != '\0') throw IngestionError(where + ": bad weight");
      if (context.dimension != 0 && static_cast<std::size_t>(index) >= context.dimension) {
        throw IngestionError(where + ": feature index " + index_text + " out of range");
      }
      if (!is_signed && weight < 0.0) throw IngestionError(where + ": negative weight in unsigned matrix");
      entries.push_back({static_cast<FeatureIndex>(index), weight});
    }
    if (entries.size() > kTopFeatures && warnings) {
      warnings->push_back(where + ": " + std::to_string(entries.size()) + " entries truncated to 10");
    }
    try {
      matrix->add_row(id, truncate_top(std::move(entries)));
    } catch (const ValidationError& e) {
      throw IngestionError(where + ": " + e.what());
    }
  }
  if (!matrix) {
    matrix.emplace(is_signed ? ImportanceMethod::external_lime : ImportanceMethod::external_attention, is_signed);
  }
  return std::move(*matrix);
}

ImportanceRow coefficient_importance(const LinearModel& model, const Review& review, const Vocabulary& vocab) {
  const auto features = vectorize(review, vocab);
  std::vector<ImportanceEntry> candidates;
  for (const auto& e : features.entries) {
    const double w = model.weights[e.index];
    if (w != 0.0) candidates.push_back({e.index, w});
  }
  return truncate_top(std::move(candidates));
}

ImportanceRow lime_explain(const Predictor& predictor, const Review& review, const Vocabulary& vocab,
                           const LimeOptions& options) {
  // Distinct in-vocabulary tokens in feature order are the interpretable
  // components; out-of-vocabulary tokens are never masked.
  std::map<FeatureIndex, std::string> distinct;
  for (const auto& token : review.tokens) {
    if (const auto index = vocab.index_of(token)) distinct.emplace(*index, token);
  }
  if (distinct.empty()) throw ValidationError("lime_explain: review '" + review.id + "' has no in-vocabulary token");
  if (options.n_samples == 0) throw ValidationError("lime_explain: n_samples must be positive");

  std::vector<FeatureIndex> features;
  std::map<std::string, Eigen::Index, std::less<>> column_of;
  for (const auto& [index, token] : distinct) {
    column_of.emplace(token, static_cast<Eigen::Index>(features.size()));
    features.push_back(index);
  }
  const auto m = static_cast<Eigen::Index>(features.size());
  const auto n = static_cast<Eigen::Index>(options.n_samples);

  Rng rng(mix_seed(options.seed, stable_hash(review.id)));
  Eigen::MatrixXd design = Eigen::MatrixXd::Zero(n, m + 1);
  Eigen::VectorXd scores(n);
  Eigen::VectorXd kernel(n);
  std::vector<std::string> kept_tokens;
  for (Eigen::Index s = 0; s < n; ++s) {
    design(s, 0) = 1.0;
    Eigen::Index dropped = 0;
    for (Eigen::Index j = 0; j < m; ++j) {
      const bool keep = coin_flip(rng, options.keep_probability);
      design(s, j + 1) = keep ? 1.0 : 0.0;
      if (!keep) ++dropped;
    }
    kept_tokens.clear();
    for (const auto& token : review.tokens) {
      const auto it = column_of.find(token);
      if (it == column_of.end() || design(s, it->second + 1) != 0.0) kept_tokens.push_back(token);
    }
    std::string text;
    for (const auto& t : kept_tokens) {
      if (!text.empty()) text.push_back(' ');
      text += t;
    }
    try {
      scores[s] = predictor.predict(text).score;
    } catch (const std::exception& e) {
      throw ModelError("lime_explain: predictor failed on perturbation " + std::to_string(s) + ": " + e.what());
    }
    const double distance = static_cast<double>(dropped) / static_cast<double>(m);
    kernel[s] = std::exp(-distance * distance / (options.kernel_width * options.kernel_width));
  }

  const std::size_t target = std::min<std::size_t>(options.n_features, static_cast<std::size_t>(m));
  std::vector<ImportanceEntry> entries;
  if ((scores.array() == scores[0]).all()) {
    for (std::size_t j = 0; j < target; ++j) entries.push_back({features[j], 0.0});
    return ImportanceRow{std::move(entries)};
  }

  const WeightedGram gram(design, scores, kernel);
  std::vector<Eigen::Index> chosen{0};
  std::vector<bool> used(static_cast<std::size_t>(m), false);
  WeightedGram::Fit final_fit = gram.fit(chosen);
  while (chosen.size() - 1 < target) {
    std::optional<Eigen::Index> best;
    WeightedGram::Fit best_fit;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      chosen.push_back(j + 1);
      auto fit = gram.fit(chosen);
      chosen.pop_back();
      if (!fit.ok) continue;
      if (!best || fit.sse < best_fit.sse) {
        best = j;
        best_fit = std::move(fit);
      }
    }
    if (!best) break;
    used[static_cast<std::size_t>(*best)] = true;
    chosen.push_back(*best + 1);
    final_fit = std::move(best_fit);
  }
  for (std::size_t c = 1; c < chosen.size(); ++c) {
    entries.push_back({features[static_cast<std::size_t>(chosen[c] - 1)], final_fit.beta[static_cast<Eigen::Index>(c)]});
  }
  std::sort(entries.begin(), entries.end(),
            [](const ImportanceEntry& a, const ImportanceEntry& b) { return a.feature < b.feature; });
  return ImportanceRow{std::move(entries)};
}

ImportanceMatrix coefficient_matrix(const LinearModel& model, std::span<const Review> reviews,
                                    const Vocabulary& vocab) {
  ImportanceMatrix matrix(ImportanceMethod::svm_coef, true);
  for (const auto& r : reviews) matrix.add_row(r.id, coefficient_importance(model, r, vocab));
  return matrix;
}

ImportanceMatrix lime_matrix(const Predictor& predictor, std::span<const Review> reviews, const Vocabulary& vocab,
                             const LimeOptions& options) {
  ImportanceMatrix matrix(ImportanceMethod::lime, true);
  for (const auto& r : reviews) {
    const bool has_feature = std::any_of(r.tokens.begin(), r.tokens.end(),
                                         [&](const std::string& t) { return vocab.index_of(t).has_value(); });
    matrix.add_row(r.id, has_feature ? lime_explain(predictor, r, vocab, options) : ImportanceRow{});
  }
  return matrix;
}

std::string_view to_string(Polarity polarity) {
  switch (polarity) {
    case Polarity::genuine: return "genuine";
    case Polarity::deceptive: return "deceptive";
    case Polarity::magnitude: return "unsigned";
  }
  return "unsigned";
}

Polarity parse_polarity(std::string_view text) {
  if (text == "genuine") return Polarity::genuine;
  if (text == "deceptive") return Polarity::deceptive;
  if (text == "unsigned") return Polarity::magnitude;
  throw ValidationError("unknown polarity '" + std::string(text) + "'");
}

std::size_t HighlightSet::feature_count() const {
  std::set<FeatureIndex> distinct;
  for (const auto& s : spans) distinct.insert(s.feature);
  return distinct.size();
}

double HighlightSet::signed_mass() const {
  double mass = 0.0;
  for (const auto& s : spans) {
    if (s.polarity == Polarity::deceptive) mass += s.intensity;
    if (s.polarity == Polarity::genuine) mass -= s.intensity;
  }
  return mass;
}

HighlightSet build_highlights(const ImportanceRow& row, const Review& review, const Vocabulary& vocab,
                              bool is_signed) {
  HighlightSet set;
  std::vector<std::pair<std::size_t, ImportanceEntry>> hits;
  double max_magnitude = 0.0;
  for (std::size_t pos = 0; pos < review.tokens.size(); ++pos) {
    const auto index = vocab.index_of(review.tokens[pos]);
    if (!index) continue;
    const double w = row.weight_of(*index);
    if (w == 0.0) continue;
    hits.push_back({pos, {*index, w}});
    max_magnitude = std::max(max_magnitude, std::abs(w));
  }
  for (const auto& [pos, entry] : hits) {
    HighlightSpan span;
    span.begin = pos;
    span.end = pos + 1;
    span.feature = entry.feature;
    span.token = review.tokens[pos];
    span.polarity = !is_signed ? Polarity::magnitude : (entry.weight > 0.0 ? Polarity::deceptive : Polarity::genuine);
    span.intensity = std::abs(entry.weight) / max_magnitude;
    set.spans.push_back(std::move(span));
  }
  return set;
}

}  // namespace tutorlab

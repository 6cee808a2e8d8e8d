#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tutorlab/classifier.hpp"
#include "tutorlab/corpus.hpp"

namespace tutorlab {

// Number of words highlighted per document.
inline constexpr std::size_t kTopFeatures = 10;

enum class ImportanceMethod { svm_coef, lime, external_attention, external_lime };

std::string_view to_string(ImportanceMethod method);
ImportanceMethod parse_importance_method(std::string_view text);

struct ImportanceEntry {
  FeatureIndex feature = 0;
  double weight = 0.0;
  friend bool operator==(const ImportanceEntry&, const ImportanceEntry&) = default;
};

// Sparse per-document importance, kept sorted by feature index.
struct ImportanceRow {
  std::vector<ImportanceEntry> entries;

  bool empty() const { return entries.empty(); }
  std::size_t size() const { return entries.size(); }
  double weight_of(FeatureIndex feature) const;
  friend bool operator==(const ImportanceRow&, const ImportanceRow&) = default;
};

// Keeps the k entries with the largest |weight| (ties to the smaller feature
// index) and returns them sorted by feature index.
ImportanceRow truncate_top(std::vector<ImportanceEntry> entries, std::size_t k = kTopFeatures);

// Importance rows keyed by example id, in insertion order.
class ImportanceMatrix {
 public:
  ImportanceMatrix() = default;
  ImportanceMatrix(ImportanceMethod method, bool is_signed) : method_(method), signed_(is_signed) {}

  // Throws ValidationError on duplicate ids, more than kTopFeatures entries,
  // or a negative weight in an unsigned matrix.
  void add_row(std::string example_id, ImportanceRow row);

  ImportanceMethod method() const { return method_; }
  bool is_signed() const { return signed_; }
  std::size_t n_examples() const { return ids_.size(); }
  const std::vector<std::string>& example_ids() const { return ids_; }
  const std::vector<ImportanceRow>& rows() const { return rows_; }
  bool contains(std::string_view id) const { return find(id) != nullptr; }
  const ImportanceRow* find(std::string_view id) const;
  // Throws NotFound.
  const ImportanceRow& row(std::string_view id) const;

  // One line per example: id, method, signed, then feature:weight pairs,
  // tab separated; weights printed with 17 significant digits.
  void save(const std::filesystem::path& path) const;

  friend bool operator==(const ImportanceMatrix& a, const ImportanceMatrix& b) {
    return a.method_ == b.method_ && a.signed_ == b.signed_ && a.ids_ == b.ids_ && a.rows_ == b.rows_;
  }

 private:
  ImportanceMethod method_ = ImportanceMethod::svm_coef;
  bool signed_ = true;
  std::vector<std::string> ids_;
  std::vector<ImportanceRow> rows_;
  std::map<std::string, std::size_t, std::less<>> position_;
};

// Optional referential checks for ingestion.
struct IngestContext {
  std::size_t dimension = 0;  // 0 disables the feature-range check
  const std::vector<std::string>* known_ids = nullptr;
};

// Loads an importance file. Rows with more than kTopFeatures entries are
// truncated (a warning is appended); negative weights when is_signed is false
// are an error.
ImportanceMatrix ingest_importance(const std::filesystem::path& path, bool is_signed,
                                   const IngestContext& context = {},
                                   std::vector<std::string>* warnings = nullptr);

// Signed coefficients of the kTopFeatures present features with the largest
// |coefficient|; zero coefficients are never retained.
ImportanceRow coefficient_importance(const LinearModel& model, const Review& review, const Vocabulary& vocab);

struct LimeOptions {
  std::size_t n_samples = 1000;
  double keep_probability = 0.5;
  double kernel_width = 0.25;
  std::size_t n_features = kTopFeatures;
  std::uint64_t seed = 0;
};

// Local surrogate: masks distinct in-vocabulary tokens, queries the
// predictor's score, fits weighted least squares on the keep indicators with
// kernel exp(-D^2 / width^2) where D is the dropped fraction, forward-selects
// n_features and returns their coefficients.
ImportanceRow lime_explain(const Predictor& predictor, const Review& review, const Vocabulary& vocab,
                           const LimeOptions& options = {});

ImportanceMatrix coefficient_matrix(const LinearModel& model, std::span<const Review> reviews,
                                    const Vocabulary& vocab);
ImportanceMatrix lime_matrix(const Predictor& predictor, std::span<const Review> reviews,
                             const Vocabulary& vocab, const LimeOptions& options = {});

enum class Polarity { genuine, deceptive, magnitude };
std::string_view to_string(Polarity polarity);
Polarity parse_polarity(std::string_view text);

// One highlighted token occurrence: positions [begin, end) in Review::tokens.
struct HighlightSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  FeatureIndex feature = 0;
  std::string token;
  Polarity polarity = Polarity::magnitude;
  double intensity = 0.0;
  friend bool operator==(const HighlightSpan&, const HighlightSpan&) = default;
};

struct HighlightSet {
  std::vector<HighlightSpan> spans;

  bool empty() const { return spans.empty(); }
  std::size_t feature_count() const;
  // Sum of intensities, positive for deceptive spans and negative for
  // genuine ones; unsigned spans contribute nothing.
  double signed_mass() const;
  friend bool operator==(const HighlightSet&, const HighlightSet&) = default;
};

// Intensity is |w| / max |w| over the row. Every occurrence of a highlighted
// token is spanned. With is_signed false every span is Polarity::magnitude.
HighlightSet build_highlights(const ImportanceRow& row, const Review& review, const Vocabulary& vocab,
                              bool is_signed);

}  // namespace tutorlab

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tutorlab {

enum class Label { genuine, deceptive };
enum class Split { train, test };

std::string_view to_string(Label label);
std::string_view to_string(Split split);
// Throws ValidationError for anything other than "genuine" / "deceptive".
Label parse_label(std::string_view text);

// +1 for deceptive, -1 for genuine. Deceptive is the positive class
// everywhere in the library.
inline double label_sign(Label label) { return label == Label::deceptive ? 1.0 : -1.0; }

struct Review {
  std::string id;
  std::string text;
  std::vector<std::string> tokens;
  Label label = Label::genuine;
  Split split = Split::train;
};

// Lowercased runs of ASCII letters. Every other byte (punctuation, digits,
// whitespace, non-ASCII) separates tokens.
std::vector<std::string> tokenize(std::string_view text);

// Reads a manifest with header `id,path,label` (paths relative to the
// manifest directory) and assigns a stratified, seeded 80/20 split.
// Errors name the offending row.
std::vector<Review> load_corpus(const std::filesystem::path& manifest_path, std::uint64_t seed);

// Stratified by label: within each label the reviews are shuffled with the
// seed and the first round(train_fraction * n) become train.
void assign_split(std::vector<Review>& reviews, std::uint64_t seed, double train_fraction = 0.8);

std::vector<Review> filter_split(std::span<const Review> reviews, Split split);

using FeatureIndex = std::int32_t;

class Vocabulary {
 public:
  Vocabulary() = default;
  // Tokens are sorted and deduplicated; index i is the i-th sorted token.
  explicit Vocabulary(std::vector<std::string> tokens);

  std::size_t size() const { return tokens_.size(); }
  bool empty() const { return tokens_.empty(); }
  std::optional<FeatureIndex> index_of(std::string_view token) const;
  const std::string& token(FeatureIndex index) const { return tokens_.at(static_cast<std::size_t>(index)); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  // One `token<TAB>index` line per entry.
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

  friend bool operator==(const Vocabulary&, const Vocabulary&) = default;

 private:
  std::vector<std::string> tokens_;
  std::map<std::string, FeatureIndex, std::less<>> index_;
};

// Keeps tokens whose document frequency over the training reviews is at
// least min_df. Test-split reviews in the input are ignored; throws
// ValidationError when no training review remains.
Vocabulary build_vocabulary(std::span<const Review> reviews, int min_df = 2);

struct FeatureEntry {
  FeatureIndex index = 0;
  double value = 0.0;
  friend bool operator==(const FeatureEntry&, const FeatureEntry&) = default;
};

// Sparse term-count row. Indices strictly increasing, values positive.
struct FeatureVector {
  std::vector<FeatureEntry> entries;

  double total() const;
  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

FeatureVector vectorize(std::span<const std::string> tokens, const Vocabulary& vocab);
inline FeatureVector vectorize(const Review& review, const Vocabulary& vocab) {
  return vectorize(review.tokens, vocab);
}

}  // namespace tutorlab

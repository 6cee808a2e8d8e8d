#include "tutorlab/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "tutorlab/errors.hpp"
#include "tutorlab/random.hpp"

namespace tutorlab {
namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

std::string_view to_string(Label label) {
  return label == Label::deceptive ? "deceptive" : "genuine";
}

std::string_view to_string(Split split) { return split == Split::train ? "train" : "test"; }

Label parse_label(std::string_view text) {
  if (text == "genuine") return Label::genuine;
  if (text == "deceptive") return Label::deceptive;
  throw ValidationError("unknown label '" + std::string(text) + "'");
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (const char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (c < 0x80 && std::isalpha(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::vector<Review> load_corpus(const std::filesystem::path& manifest_path, std::uint64_t seed) {
  std::ifstream in(manifest_path);
  if (!in) throw IngestionError("cannot open manifest " + manifest_path.string());
  const auto base_dir = manifest_path.parent_path();

  std::vector<Review> reviews;
  std::unordered_set<std::string> seen_ids;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    for (auto& f : fields) f = trim(std::move(f));
    const std::string where = manifest_path.filename().string() + " row " + std::to_string(line_no);
    if (!header_seen) {
      if (fields != std::vector<std::string>{"id", "path", "label"}) {
        throw IngestionError(where + ": expected header 'id,path,label'");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 3) throw IngestionError(where + ": expected 3 fields");
    Review review;
    review.id = fields[0];
    if (review.id.empty()) throw IngestionError(where + ": empty id");
    if (!seen_ids.insert(review.id).second) {
      throw IngestionError(where + ": duplicate id '" + review.id + "'");
    }
    try {
      review.label = parse_label(fields[2]);
    } catch (const ValidationError& e) {
      throw IngestionError(where + ": " + e.what());
    }
    std::filesystem::path text_path = fields[1];
    if (text_path.is_relative()) text_path = base_dir / text_path;
    try {
      review.text = read_file(text_path);
    } catch (const IngestionError&) {
      throw IngestionError(where + ": missing file " + text_path.string());
    }
    review.tokens = tokenize(review.text);
    reviews.push_back(std::move(review));
  }
  assign_split(reviews, seed);
  return reviews;
}

void assign_split(std::vector<Review>& reviews, std::uint64_t seed, double train_fraction) {
  for (const Label label : {Label::genuine, Label::deceptive}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < reviews.size(); ++i) {
      if (reviews[i].label == label) members.push_back(i);
    }
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(label)));
    shuffle_in_place(std::span<std::size_t>(members), rng);
    const auto n_train =
        static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(members.size())));
    for (std::size_t k = 0; k < members.size(); ++k) {
      reviews[members[k]].split = k < n_train ? Split::train : Split::test;
    }
  }
}

std::vector<Review> filter_split(std::span<const Review> reviews, Split split) {
  std::vector<Review> out;
  for (const auto& r : reviews) {
    if (r.split == split) out.push_back(r);
  }
  return out;
}

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  std::sort(tokens_.begin(), tokens_.end());
  tokens_.erase(std::unique(tokens_.begin(), tokens_.end()), tokens_.end());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    index_.emplace(tokens_[i], static_cast<FeatureIndex>(i));
  }
}

std::optional<FeatureIndex> Vocabulary::index_of(std::string_view token) const {
  const auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IngestionError("cannot write " + path.string());
  for (std::size_t i = 0; i < tokens_.size(); ++i) out << tokens_[i] << '\t' << i << '\n';
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open vocabulary " + path.string());
  std::vector<std::pair<std::size_t, std::string>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw IngestionError(path.string() + " line " + std::to_string(line_no) + ": missing tab");
    }
    std::size_t index = 0;
    try {
      index = std::stoul(line.substr(tab + 1));
    } catch (const std::exception&) {
      throw IngestionError(path.string() + " line " + std::to_string(line_no) + ": bad index");
    }
    rows.emplace_back(index, line.substr(0, tab));
  }
  std::sort(rows.begin(), rows.end());
  std::vector<std::string> tokens;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].first != i) throw IngestionError(path.string() + ": indices are not contiguous from 0");
    tokens.push_back(rows[i].second);
  }
  Vocabulary vocab(tokens);
  if (vocab.tokens() != tokens) {
    throw IngestionError(path.string() + ": indices are not in sorted token order");
  }
  return vocab;
}

Vocabulary build_vocabulary(std::span<const Review> reviews, int min_df) {
  std::map<std::string, int, std::less<>> document_frequency;
  std::size_t n_train = 0;
  for (const auto& review : reviews) {
    if (review.split != Split::train) continue;
    ++n_train;
    const std::set<std::string_view> distinct(review.tokens.begin(), review.tokens.end());
    for (const auto token : distinct) ++document_frequency[std::string(token)];
  }
  if (n_train == 0) throw ValidationError("build_vocabulary: no training reviews");
  std::vector<std::string> kept;
  for (const auto& [token, df] : document_frequency) {
    if (df >= min_df) kept.push_back(token);
  }
  return Vocabulary(std::move(kept));
}

double FeatureVector::total() const {
  double sum = 0.0;
  for (const auto& e : entries) sum += e.value;
  return sum;
}

FeatureVector vectorize(std::span<const std::string> tokens, const Vocabulary& vocab) {
  std::map<FeatureIndex, double> counts;
  for (const auto& token : tokens) {
    if (const auto index = vocab.index_of(token)) counts[*index] += 1.0;
  }
  FeatureVector fv;
  fv.entries.reserve(counts.size());
  for (const auto& [index, count] : counts) fv.entries.push_back({index, count});
  return fv;
}

}  // namespace tutorlab

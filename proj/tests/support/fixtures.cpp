#include "fixtures.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

#include <unistd.h>

#include "tutorlab/synthetic_corpus.hpp"

namespace tutorlab::testing {

Review make_review(std::string id, std::string text, Label label, Split split) {
  Review r;
  r.id = std::move(id);
  r.tokens = tokenize(text);
  r.text = std::move(text);
  r.label = label;
  r.split = split;
  return r;
}

TempDir::TempDir(const std::string& tag) {
  static std::uint64_t counter = 0;
  const auto base = std::filesystem::temp_directory_path();
  do {
    path_ = base / ("tutorlab-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  } while (std::filesystem::exists(path_));
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream(path, std::ios::binary) << content;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

ImportanceMatrix dense_matrix(const std::vector<std::vector<double>>& rows, bool is_signed) {
  ImportanceMatrix m(ImportanceMethod::svm_coef, is_signed);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    ImportanceRow row;
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      if (rows[i][j] != 0.0) row.entries.push_back({static_cast<FeatureIndex>(j), rows[i][j]});
    }
    m.add_row("ex" + std::to_string(i + 1), row);
  }
  return m;
}

std::vector<std::vector<double>> random_dense(Rng& rng, std::size_t n, std::size_t d) {
  std::vector<std::vector<double>> rows(n, std::vector<double>(d, 0.0));
  for (auto& row : rows) {
    const std::size_t k = 1 + uniform_index(rng, std::min<std::size_t>(d, 4));
    for (std::size_t t = 0; t < k; ++t) row[uniform_index(rng, d)] = 0.5 + 4.5 * uniform_unit(rng);
  }
  return rows;
}

const TrainedCorpus& trained_corpus() {
  static const TrainedCorpus corpus = [] {
    TrainedCorpus c;
    SyntheticCorpusOptions options;
    options.seed = 11;
    c.reviews = synthetic_corpus(options);
    PipelineOptions p;
    p.seed = 11;
    const auto trained = train_pipeline(c.reviews, p);
    c.vocab = trained.vocab;
    c.model = trained.model;
    c.predictor = std::make_shared<LinearSvmPredictor>(c.model, c.vocab);
    c.test_accuracy = trained.test_accuracy;
    return c;
  }();
  return corpus;
}

MaterialsOptions exp3_external_options(const TrainedCorpus& corpus) {
  const auto coef = coefficient_matrix(*corpus.model, corpus.reviews, *corpus.vocab);
  ImportanceMatrix attention(ImportanceMethod::external_attention, false);
  ImportanceMatrix lime(ImportanceMethod::external_lime, true);
  for (std::size_t i = 0; i < coef.n_examples(); ++i) {
    ImportanceRow magnitude = coef.rows()[i];
    for (auto& e : magnitude.entries) e.weight = std::abs(e.weight);
    attention.add_row(coef.example_ids()[i], magnitude);
    lime.add_row(coef.example_ids()[i], coef.rows()[i]);
  }
  MaterialsOptions options;
  options.attention = std::move(attention);
  options.external_lime = std::move(lime);
  return options;
}

std::shared_ptr<const StudyMaterials> study_materials(Experiment experiment) {
  static std::mutex mutex;
  static std::map<Experiment, std::shared_ptr<const StudyMaterials>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[experiment];
  if (!slot) {
    const auto& c = trained_corpus();
    const auto options = experiment == Experiment::exp3 ? exp3_external_options(c) : MaterialsOptions{};
    slot = std::make_shared<StudyMaterials>(
        build_study_materials(experiment, c.reviews, c.model, c.vocab, GuidelineDoc::defaults(), options));
  }
  return slot;
}

}  // namespace tutorlab::testing

#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "tutorlab/classifier.hpp"
#include "tutorlab/corpus.hpp"
#include "tutorlab/explainer.hpp"
#include "tutorlab/pipeline.hpp"
#include "tutorlab/platform/platform.hpp"
#include "tutorlab/random.hpp"

namespace tutorlab::testing {

Review make_review(std::string id, std::string text, Label label, Split split = Split::train);

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

void write_text(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);

// Dense importance matrix given row by row; ids are ex1, ex2, ...
ImportanceMatrix dense_matrix(const std::vector<std::vector<double>>& rows, bool is_signed = true);

// Rows of n examples over d features, each with 1..min(d, 4) nonzero entries
// in (0, 5], built from rng.
std::vector<std::vector<double>> random_dense(Rng& rng, std::size_t n, std::size_t d);

// A trained model over a seeded synthetic corpus; built once per process.
struct TrainedCorpus {
  std::vector<Review> reviews;
  std::shared_ptr<const Vocabulary> vocab;
  std::shared_ptr<const LinearModel> model;
  std::shared_ptr<const LinearSvmPredictor> predictor;
  double test_accuracy = 0.0;
};
const TrainedCorpus& trained_corpus();

// Coefficient rows reused as stand-ins for the two external matrices: the
// attention stand-in keeps |w|, the external LIME stand-in keeps w.
MaterialsOptions exp3_external_options(const TrainedCorpus& corpus);

std::shared_ptr<const StudyMaterials> study_materials(Experiment experiment);

}  // namespace tutorlab::testing

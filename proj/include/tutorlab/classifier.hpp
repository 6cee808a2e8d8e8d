#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tutorlab/corpus.hpp"

namespace tutorlab {

// Linear decision function over bag-of-words counts. A positive decision
// value means deceptive.
struct LinearModel {
  Eigen::VectorXd weights;
  double bias = 0.0;
  double C = 1.0;
  std::uint64_t seed = 0;

  std::size_t dimension() const { return static_cast<std::size_t>(weights.size()); }
  double decision_value(const FeatureVector& x) const;

  // Header line `d=<d> bias=<b> C=<c> seed=<s>`, then `index<TAB>weight`
  // for each nonzero weight. Doubles are written with 17 significant digits.
  void save(const std::filesystem::path& path) const;
  static LinearModel load(const std::filesystem::path& path);
};

struct Prediction {
  Label label = Label::genuine;
  double score = 0.0;
};

inline Label label_from_score(double score) { return score > 0.0 ? Label::deceptive : Label::genuine; }

// Anything that maps raw review text to a label and a real-valued score.
// Implementations must be deterministic and safe for concurrent const use.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual Prediction predict(std::string_view text) const = 0;
};

class LinearSvmPredictor final : public Predictor {
 public:
  LinearSvmPredictor(std::shared_ptr<const LinearModel> model, std::shared_ptr<const Vocabulary> vocab);

  Prediction predict(std::string_view text) const override;
  Prediction predict_tokens(std::span<const std::string> tokens) const;

  const LinearModel& model() const { return *model_; }
  const Vocabulary& vocabulary() const { return *vocab_; }

 private:
  std::shared_ptr<const LinearModel> model_;
  std::shared_ptr<const Vocabulary> vocab_;
};

struct SvmOptions {
  double C = 1.0;
  std::uint64_t seed = 0;
  int max_epochs = 100;
  int min_epochs = 3;
  // Stop once the relative change of the averaged-iterate objective between
  // consecutive epochs drops below this.
  double tolerance = 1e-4;
};

struct TrainingTrace {
  // Objective of the model that would be returned after each epoch; entry 0
  // is the all-zero starting model. Non-increasing.
  std::vector<double> objective;
  // Raw objective of the averaged iterate at the end of each epoch.
  std::vector<double> averaged_objective;
  double eta0 = 0.0;
  bool converged = false;
};

struct TrainedSvm {
  LinearModel model;
  TrainingTrace trace;
};

// Minimizes ||w||^2 / (2 C n) + mean hinge loss with averaged stochastic
// gradient descent. Throws ModelError when only one class is present.
TrainedSvm train_svm(std::span<const FeatureVector> features, std::span<const Label> labels,
                     std::size_t dimension, const SvmOptions& options);
TrainedSvm train_svm(std::span<const Review> train_reviews, const Vocabulary& vocab,
                     const SvmOptions& options);

double svm_objective(const LinearModel& model, std::span<const FeatureVector> features,
                     std::span<const Label> labels);

inline const std::vector<double> kDefaultCGrid = {0.01, 0.1, 1.0, 10.0, 100.0};

struct CrossValidationResult {
  double chosen_C = 0.0;
  // Mean validation accuracy per grid entry, aligned with the input grid.
  std::vector<double> mean_accuracy;
  std::vector<std::string> warnings;
};

// k-fold CV over the grid; the best mean fold accuracy wins and ties go to
// the smaller C. Folds whose training part holds a single class are skipped.
CrossValidationResult cross_validate(std::span<const Review> train_reviews, const Vocabulary& vocab,
                                     std::span<const double> C_grid, int k, std::uint64_t seed,
                                     const SvmOptions& base_options = {});

Prediction predict(const LinearModel& model, const Review& review, const Vocabulary& vocab);

// Fraction of reviews whose predicted label matches the true one.
double evaluate_accuracy(const Predictor& predictor, std::span<const Review> reviews);

}  // namespace tutorlab

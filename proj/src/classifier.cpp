#include "tutorlab/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "tutorlab/errors.hpp"
#include "tutorlab/random.hpp"

namespace tutorlab {
namespace {

double sparse_dot(const Eigen::VectorXd& dense, const FeatureVector& x) {
  double s = 0.0;
  for (const auto& e : x.entries) s += dense[e.index] * e.value;
  return s;
}

void sparse_axpy(Eigen::VectorXd& dense, double alpha, const FeatureVector& x) {
  for (const auto& e : x.entries) dense[e.index] += alpha * e.value;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Averaged SGD state. The plain iterate is w / w_divisor + w_bias, the
// averaged one (a + w_fraction * w) / a_divisor + a_bias; the divisors let
// the L2 shrinkage and the running average cost O(nnz) per step.
class AveragedSgd {
 public:
  AveragedSgd(std::size_t dimension, double lambda)
      : lambda_(lambda), w_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dimension))),
        a_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dimension))) {}

  void step(const FeatureVector& x, double y, double eta, double mu) {
    if (w_divisor_ > 1e5 || a_divisor_ > 1e5) renormalize();
    const double s = sparse_dot(w_, x) / w_divisor_ + w_bias_;
    w_divisor_ /= (1.0 - eta * lambda_);
    const double dloss = (y * s < 1.0) ? y : 0.0;
    const double etd = eta * dloss * w_divisor_;
    if (etd != 0.0) sparse_axpy(w_, etd, x);
    w_bias_ += eta * dloss * kBiasRate;
    if (mu >= 1.0) {
      a_.setZero();
      a_divisor_ = w_divisor_;
      w_fraction_ = 1.0;
    } else if (mu > 0.0) {
      if (etd != 0.0) sparse_axpy(a_, -w_fraction_ * etd, x);
      a_divisor_ /= (1.0 - mu);
      w_fraction_ += mu * a_divisor_ / w_divisor_;
    }
    a_bias_ += mu * (w_bias_ - a_bias_);
  }

  double plain_decision(const FeatureVector& x) const { return sparse_dot(w_, x) / w_divisor_ + w_bias_; }

  Eigen::VectorXd averaged_weights() const { return (a_ + w_fraction_ * w_) / a_divisor_; }
  double averaged_bias() const { return a_bias_; }
  Eigen::VectorXd plain_weights() const { return w_ / w_divisor_; }
  double plain_bias() const { return w_bias_; }

 private:
  static constexpr double kBiasRate = 0.01;

  void renormalize() {
    a_ = (a_ + w_fraction_ * w_) / a_divisor_;
    w_ /= w_divisor_;
    w_divisor_ = a_divisor_ = 1.0;
    w_fraction_ = 0.0;
  }

  double lambda_;
  Eigen::VectorXd w_;
  double w_divisor_ = 1.0;
  double w_bias_ = 0.0;
  Eigen::VectorXd a_;
  double a_divisor_ = 1.0;
  double w_fraction_ = 0.0;
  double a_bias_ = 0.0;
};

double objective_of(const Eigen::VectorXd& w, double b, double lambda, std::span<const FeatureVector> x,
                    std::span<const Label> y) {
  double loss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double margin = label_sign(y[i]) * (sparse_dot(w, x[i]) + b);
    loss += std::max(0.0, 1.0 - margin);
  }
  return 0.5 * lambda * w.squaredNorm() + loss / static_cast<double>(x.size());
}

double learning_rate(double eta0, double lambda, double t) {
  return eta0 / std::pow(1.0 + lambda * eta0 * t, 0.75);
}

// Picks the initial rate by trying powers of two for one pass over a prefix
// of the data and keeping the cheapest; deterministic given the order.
double choose_eta0(std::size_t dimension, double lambda, std::span<const FeatureVector> x,
                   std::span<const Label> y, std::span<const std::size_t> order) {
  const std::size_t sample = std::min<std::size_t>(order.size(), 1000);
  double best_eta = std::min(1.0, 0.25 / lambda);
  double best_cost = std::numeric_limits<double>::infinity();
  for (int k = -12; k <= 4; ++k) {
    const double eta0 = std::ldexp(1.0, k);
    if (eta0 * lambda >= 0.5) continue;
    AveragedSgd sgd(dimension, lambda);
    for (std::size_t t = 0; t < sample; ++t) {
      const std::size_t i = order[t];
      sgd.step(x[i], label_sign(y[i]), learning_rate(eta0, lambda, static_cast<double>(t)), 1.0);
    }
    double loss = 0.0;
    for (std::size_t t = 0; t < sample; ++t) {
      const std::size_t i = order[t];
      loss += std::max(0.0, 1.0 - label_sign(y[i]) * sgd.plain_decision(x[i]));
    }
    const double cost = loss / static_cast<double>(sample) + 0.5 * lambda * sgd.plain_weights().squaredNorm();
    if (cost < best_cost) {
      best_cost = cost;
      best_eta = eta0;
    }
  }
  return best_eta;
}

}  // namespace

double LinearModel::decision_value(const FeatureVector& x) const {
  double s = bias;
  for (const auto& e : x.entries) {
    if (static_cast<std::size_t>(e.index) < dimension()) s += weights[e.index] * e.value;
  }
  return s;
}

void LinearModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IngestionError("cannot write " + path.string());
  out << "d=" << dimension() << " bias=" << format_double(bias) << " C=" << format_double(C)
      << " seed=" << seed << '\n';
  for (Eigen::Index j = 0; j < weights.size(); ++j) {
    if (weights[j] != 0.0) out << j << '\t' << format_double(weights[j]) << '\n';
  }
}

LinearModel LinearModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open model " + path.string());
  std::string header;
  std::getline(in, header);
  std::size_t d = 0;
  LinearModel model;
  unsigned long long seed = 0;
  if (std::sscanf(header.c_str(), "d=%zu bias=%lf C=%lf seed=%llu", &d, &model.bias, &model.C, &seed) != 4) {
    throw IngestionError(path.string() + ": malformed model header");
  }
  model.seed = seed;
  model.weights = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    long long index = -1;
    double weight = 0.0;
    if (std::sscanf(line.c_str(), "%lld\t%lf", &index, &weight) != 2 || index < 0 ||
        static_cast<std::size_t>(index) >= d) {
      throw IngestionError(path.string() + " line " + std::to_string(line_no) + ": bad weight row");
    }
    model.weights[index] = weight;
  }
  return model;
}

LinearSvmPredictor::LinearSvmPredictor(std::shared_ptr<const LinearModel> model,
                                       std::shared_ptr<const Vocabulary> vocab)
    : model_(std::move(model)), vocab_(std::move(vocab)) {
  if (!model_ || !vocab_) throw ValidationError("LinearSvmPredictor: null model or vocabulary");
  if (model_->dimension() != vocab_->size()) {
    throw ValidationError("LinearSvmPredictor: model dimension does not match vocabulary size");
  }
}

Prediction LinearSvmPredictor::predict(std::string_view text) const {
  return predict_tokens(tokenize(text));
}

Prediction LinearSvmPredictor::predict_tokens(std::span<const std::string> tokens) const {
  const double score = model_->decision_value(vectorize(tokens, *vocab_));
  return {label_from_score(score), score};
}

double svm_objective(const LinearModel& model, std::span<const FeatureVector> features,
                     std::span<const Label> labels) {
  if (features.empty()) throw ValidationError("svm_objective: empty data");
  const double lambda = 1.0 / (model.C * static_cast<double>(features.size()));
  return objective_of(model.weights, model.bias, lambda, features, labels);
}

TrainedSvm train_svm(std::span<const FeatureVector> features, std::span<const Label> labels,
                     std::size_t dimension, const SvmOptions& options) {
  if (features.size() != labels.size()) throw ValidationError("train_svm: features/labels size mismatch");
  if (features.empty()) throw ValidationError("train_svm: empty training set");
  if (!(options.C > 0.0)) throw ValidationError("train_svm: C must be positive");
  const auto n_deceptive = std::count(labels.begin(), labels.end(), Label::deceptive);
  if (n_deceptive == 0 || n_deceptive == static_cast<std::ptrdiff_t>(labels.size())) {
    throw ModelError("train_svm: training set contains a single class");
  }

  const std::size_t n = features.size();
  const double lambda = 1.0 / (options.C * static_cast<double>(n));
  Rng rng(mix_seed(options.seed, 0x5f3));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  shuffle_in_place(std::span<std::size_t>(order), rng);

  TrainedSvm result;
  result.model.C = options.C;
  result.model.seed = options.seed;
  result.model.weights = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dimension));
  result.model.bias = 0.0;
  double incumbent = objective_of(result.model.weights, 0.0, lambda, features, labels);
  result.trace.objective.push_back(incumbent);
  result.trace.eta0 = choose_eta0(dimension, lambda, features, labels, order);

  AveragedSgd sgd(dimension, lambda);
  double t = 0.0;
  const double averaging_start = static_cast<double>(n);
  double previous = std::numeric_limits<double>::quiet_NaN();
  for (int epoch = 1; epoch <= options.max_epochs; ++epoch) {
    shuffle_in_place(std::span<std::size_t>(order), rng);
    for (const std::size_t i : order) {
      const double eta = learning_rate(result.trace.eta0, lambda, t);
      const double mu = t <= averaging_start ? 1.0 : 1.0 / (1.0 + (t - averaging_start));
      sgd.step(features[i], label_sign(labels[i]), eta, mu);
      t += 1.0;
    }
    Eigen::VectorXd averaged = sgd.averaged_weights();
    const double bias = sgd.averaged_bias();
    const double value = objective_of(averaged, bias, lambda, features, labels);
    result.trace.averaged_objective.push_back(value);
    if (value < incumbent) {
      incumbent = value;
      result.model.weights = std::move(averaged);
      result.model.bias = bias;
    }
    result.trace.objective.push_back(incumbent);
    if (epoch >= options.min_epochs && std::isfinite(previous) &&
        std::abs(previous - value) <= options.tolerance * std::max(std::abs(previous), 1e-12)) {
      result.trace.converged = true;
      break;
    }
    previous = value;
  }
  return result;
}

TrainedSvm train_svm(std::span<const Review> train_reviews, const Vocabulary& vocab, const SvmOptions& options) {
  std::vector<FeatureVector> x;
  std::vector<Label> y;
  x.reserve(train_reviews.size());
  for (const auto& r : train_reviews) {
    x.push_back(vectorize(r, vocab));
    y.push_back(r.label);
  }
  return train_svm(x, y, vocab.size(), options);
}

CrossValidationResult cross_validate(std::span<const Review> train_reviews, const Vocabulary& vocab,
                                     std::span<const double> C_grid, int k, std::uint64_t seed,
                                     const SvmOptions& base_options) {
  if (k < 2) throw ValidationError("cross_validate: k must be at least 2");
  if (C_grid.empty()) throw ValidationError("cross_validate: empty C grid");
  const std::size_t n = train_reviews.size();

  std::vector<FeatureVector> x;
  std::vector<Label> y;
  for (const auto& r : train_reviews) {
    x.push_back(vectorize(r, vocab));
    y.push_back(r.label);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(mix_seed(seed, 0xcf));
  shuffle_in_place(std::span<std::size_t>(order), rng);
  std::vector<int> fold_of(n);
  for (std::size_t pos = 0; pos < n; ++pos) fold_of[order[pos]] = static_cast<int>(pos % static_cast<std::size_t>(k));

  CrossValidationResult result;
  std::vector<int> usable_folds;
  for (int fold = 0; fold < k; ++fold) {
    bool has_genuine = false, has_deceptive = false, has_validation = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (fold_of[i] == fold) {
        has_validation = true;
      } else {
        (y[i] == Label::deceptive ? has_deceptive : has_genuine) = true;
      }
    }
    if (!has_validation || !has_genuine || !has_deceptive) {
      result.warnings.push_back("fold " + std::to_string(fold) + " skipped: degenerate class balance");
    } else {
      usable_folds.push_back(fold);
    }
  }
  if (usable_folds.empty()) throw ModelError("cross_validate: every fold was skipped");

  for (const double C : C_grid) {
    double accuracy_sum = 0.0;
    for (const int fold : usable_folds) {
      std::vector<FeatureVector> fx;
      std::vector<Label> fy;
      for (std::size_t i = 0; i < n; ++i) {
        if (fold_of[i] != fold) {
          fx.push_back(x[i]);
          fy.push_back(y[i]);
        }
      }
      SvmOptions options = base_options;
      options.C = C;
      options.seed = mix_seed(seed, static_cast<std::uint64_t>(fold));
      const auto trained = train_svm(fx, fy, vocab.size(), options);
      std::size_t correct = 0, total = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (fold_of[i] != fold) continue;
        ++total;
        if (label_from_score(trained.model.decision_value(x[i])) == y[i]) ++correct;
      }
      accuracy_sum += static_cast<double>(correct) / static_cast<double>(total);
    }
    result.mean_accuracy.push_back(accuracy_sum / static_cast<double>(usable_folds.size()));
  }

  std::size_t best = 0;
  for (std::size_t g = 1; g < C_grid.size(); ++g) {
    const double a = result.mean_accuracy[g];
    const double b = result.mean_accuracy[best];
    if (a > b || (a == b && C_grid[g] < C_grid[best])) best = g;
  }
  result.chosen_C = C_grid[best];
  return result;
}

Prediction predict(const LinearModel& model, const Review& review, const Vocabulary& vocab) {
  const double score = model.decision_value(vectorize(review, vocab));
  return {label_from_score(score), score};
}

double evaluate_accuracy(const Predictor& predictor, std::span<const Review> reviews) {
  if (reviews.empty()) throw ValidationError("evaluate_accuracy: empty review list");
  std::size_t correct = 0;
  for (const auto& r : reviews) {
    if (predictor.predict(r.text).label == r.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(reviews.size());
}

}  // namespace tutorlab

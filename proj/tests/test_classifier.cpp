#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "tutorlab/errors.hpp"

using namespace tutorlab;
using namespace tutorlab::testing;

namespace {

class OraclePredictor final : public Predictor {
 public:
  explicit OraclePredictor(std::map<std::string, Label> truth) : truth_(std::move(truth)) {}
  Prediction predict(std::string_view text) const override {
    const Label l = truth_.at(std::string(text));
    return {l, label_sign(l)};
  }

 private:
  std::map<std::string, Label> truth_;
};

class ConstantPredictor final : public Predictor {
 public:
  explicit ConstantPredictor(Label label) : label_(label) {}
  Prediction predict(std::string_view) const override { return {label_, label_sign(label_)}; }

 private:
  Label label_;
};

std::vector<Review> separable_pair() {
  return {make_review("g", "floor", Label::genuine), make_review("d", "chicago", Label::deceptive)};
}

}  // namespace

TEST(TrainSvm, SeparableOneTokenDocsAreClassifiedCorrectly) {
  const auto docs = separable_pair();
  const auto vocab = build_vocabulary(docs, 1);
  const auto trained = train_svm(docs, vocab, {});
  for (const auto& r : docs) EXPECT_EQ(predict(trained.model, r, vocab).label, r.label) << r.id;
}

TEST(TrainSvm, SingleClassIsAnError) {
  const std::vector<Review> docs = {make_review("a", "x y", Label::genuine), make_review("b", "y z", Label::genuine)};
  const auto vocab = build_vocabulary(docs, 1);
  EXPECT_THROW(train_svm(docs, vocab, {}), ModelError);
}

TEST(TrainSvm, NonPositiveCIsAnError) {
  const auto docs = separable_pair();
  const auto vocab = build_vocabulary(docs, 1);
  SvmOptions options;
  options.C = 0.0;
  EXPECT_THROW(train_svm(docs, vocab, options), ValidationError);
}

TEST(TrainSvm, ObjectiveTraceIsNonIncreasingAndBelowZeroModel) {
  const auto& c = trained_corpus();
  const auto train = filter_split(c.reviews, Split::train);
  SvmOptions options;
  options.C = 1.0;
  options.seed = 3;
  const auto trained = train_svm(train, *c.vocab, options);
  const auto& obj = trained.trace.objective;
  ASSERT_GE(obj.size(), 2u);
  for (std::size_t i = 1; i < obj.size(); ++i) EXPECT_LE(obj[i], obj[i - 1]) << "epoch " << i;

  std::vector<FeatureVector> xs;
  std::vector<Label> ys;
  for (const auto& r : train) {
    xs.push_back(vectorize(r, *c.vocab));
    ys.push_back(r.label);
  }
  LinearModel zero;
  zero.weights = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(c.vocab->size()));
  zero.C = options.C;
  EXPECT_DOUBLE_EQ(obj.front(), svm_objective(zero, xs, ys));
  EXPECT_NEAR(obj.back(), svm_objective(trained.model, xs, ys), 1e-9 * std::abs(obj.back()));
  EXPECT_LT(svm_objective(trained.model, xs, ys), svm_objective(zero, xs, ys));
}

TEST(TrainSvm, DeterministicGivenSeed) {
  const auto& c = trained_corpus();
  const auto train = filter_split(c.reviews, Split::train);
  SvmOptions options;
  options.seed = 9;
  const auto a = train_svm(train, *c.vocab, options);
  const auto b = train_svm(train, *c.vocab, options);
  EXPECT_EQ(a.model.weights, b.model.weights);
  EXPECT_EQ(a.model.bias, b.model.bias);
}

TEST(TrainSvm, ObjectiveHandComputed) {
  // Two documents, d = 2, w = (1, -1), b = 0.5, C = 2:
  // ||w||^2 / (2 C n) = 2 / 8 = 0.25.
  // doc1 deceptive x=(1,0): margin 1.5 -> hinge 0; doc2 genuine x=(0,2): f = -1.5, margin 1.5 -> 0.
  LinearModel m;
  m.weights = Eigen::Vector2d(1.0, -1.0);
  m.bias = 0.5;
  m.C = 2.0;
  const std::vector<FeatureVector> xs = {{{{0, 1.0}}}, {{{1, 2.0}}}};
  const std::vector<Label> ys = {Label::deceptive, Label::genuine};
  EXPECT_DOUBLE_EQ(svm_objective(m, xs, ys), 0.25);
  // Flip the second label: margin -1.5 -> hinge 2.5, mean 1.25.
  const std::vector<Label> flipped = {Label::deceptive, Label::deceptive};
  EXPECT_DOUBLE_EQ(svm_objective(m, xs, flipped), 0.25 + 1.25);
}

TEST(TrainSvm, TrainingAccuracyAtLeastTestAccuracy) {
  const auto& c = trained_corpus();
  const double train_acc = evaluate_accuracy(*c.predictor, filter_split(c.reviews, Split::train));
  if (train_acc < c.test_accuracy) {
    GTEST_LOG_(WARNING) << "training accuracy " << train_acc << " below test accuracy " << c.test_accuracy;
  }
  EXPECT_GT(c.test_accuracy, 0.75);
}

TEST(CrossValidate, SingletonGridReturnsItsValue) {
  const auto& c = trained_corpus();
  const auto train = filter_split(c.reviews, Split::train);
  const std::vector<double> grid = {0.3};
  EXPECT_EQ(cross_validate(train, *c.vocab, grid, 5, 1).chosen_C, 0.3);
}

TEST(CrossValidate, DuplicateGridReturnsTheValue) {
  const auto& c = trained_corpus();
  const auto train = filter_split(c.reviews, Split::train);
  const std::vector<double> grid = {1.0, 1.0};
  EXPECT_EQ(cross_validate(train, *c.vocab, grid, 5, 1).chosen_C, 1.0);
}

TEST(CrossValidate, RerunIsStable) {
  const auto& c = trained_corpus();
  const auto train = filter_split(c.reviews, Split::train);
  const auto a = cross_validate(train, *c.vocab, kDefaultCGrid, 5, 4);
  const auto b = cross_validate(train, *c.vocab, kDefaultCGrid, 5, 4);
  EXPECT_EQ(a.chosen_C, b.chosen_C);
  EXPECT_EQ(a.mean_accuracy, b.mean_accuracy);
  ASSERT_EQ(a.mean_accuracy.size(), kDefaultCGrid.size());
  const auto best = *std::max_element(a.mean_accuracy.begin(), a.mean_accuracy.end());
  const auto first_best = std::find(a.mean_accuracy.begin(), a.mean_accuracy.end(), best) - a.mean_accuracy.begin();
  EXPECT_EQ(a.chosen_C, kDefaultCGrid[static_cast<std::size_t>(first_best)]);
}

TEST(CrossValidate, RejectsBadArguments) {
  const auto& c = trained_corpus();
  const auto train = filter_split(c.reviews, Split::train);
  EXPECT_THROW(cross_validate(train, *c.vocab, std::vector<double>{}, 5, 0), ValidationError);
  EXPECT_THROW(cross_validate(train, *c.vocab, kDefaultCGrid, 1, 0), ValidationError);
}

TEST(CrossValidate, SingleClassFoldsAreSkippedThenError) {
  // Two reviews, k = 2: each training fold holds one review and one class.
  const auto docs = separable_pair();
  const auto vocab = build_vocabulary(docs, 1);
  EXPECT_THROW(cross_validate(docs, vocab, kDefaultCGrid, 2, 0), ModelError);
}

TEST(Predict, EmptyFeatureDocumentUsesBiasSign) {
  const Vocabulary vocab({"a"});
  LinearModel m;
  m.weights = Eigen::VectorXd::Constant(1, 3.0);
  m.bias = -0.25;
  const auto r = make_review("x", "zzz", Label::genuine);
  const auto p = predict(m, r, vocab);
  EXPECT_EQ(p.label, Label::genuine);
  EXPECT_EQ(p.score, -0.25);
  m.bias = 0.25;
  EXPECT_EQ(predict(m, r, vocab).label, Label::deceptive);
}

TEST(Predict, ZeroScoreIsGenuine) { EXPECT_EQ(label_from_score(0.0), Label::genuine); }

TEST(Predict, LabelAgreesWithScoreSignForEveryTestReview) {
  const auto& c = trained_corpus();
  for (const auto& r : filter_split(c.reviews, Split::test)) {
    const auto p = c.predictor->predict(r.text);
    EXPECT_EQ(p.label, label_from_score(p.score)) << r.id;
    EXPECT_DOUBLE_EQ(p.score, c.model->decision_value(vectorize(r, *c.vocab)));
  }
}

TEST(Predict, PositiveRescalingKeepsLabels) {
  const auto& c = trained_corpus();
  auto scaled = std::make_shared<LinearModel>(*c.model);
  scaled->weights *= 3.7;
  scaled->bias *= 3.7;
  const LinearSvmPredictor p(scaled, c.vocab);
  for (const auto& r : filter_split(c.reviews, Split::test)) {
    EXPECT_EQ(p.predict(r.text).label, c.predictor->predict(r.text).label) << r.id;
  }
}

TEST(Predictor, RejectsDimensionMismatch) {
  auto model = std::make_shared<LinearModel>();
  model->weights = Eigen::VectorXd::Zero(3);
  auto vocab = std::make_shared<Vocabulary>(std::vector<std::string>{"a"});
  EXPECT_THROW(LinearSvmPredictor(model, vocab), ValidationError);
}

TEST(EvaluateAccuracy, OracleScoresOne) {
  const auto& c = trained_corpus();
  const auto test = filter_split(c.reviews, Split::test);
  std::map<std::string, Label> truth;
  for (const auto& r : test) truth[r.text] = r.label;
  EXPECT_EQ(evaluate_accuracy(OraclePredictor(truth), test), 1.0);
}

TEST(EvaluateAccuracy, ConstantPredictorOnBalancedSetScoresHalf) {
  const auto& c = trained_corpus();
  EXPECT_EQ(evaluate_accuracy(ConstantPredictor(Label::deceptive), filter_split(c.reviews, Split::test)), 0.5);
}

TEST(EvaluateAccuracy, EmptyListIsAnError) {
  EXPECT_THROW(evaluate_accuracy(ConstantPredictor(Label::genuine), std::vector<Review>{}), ValidationError);
}

TEST(ModelFile, RoundTripsBitExactly) {
  TempDir dir("model");
  const auto& c = trained_corpus();
  c.model->save(dir / "m.txt");
  const auto loaded = LinearModel::load(dir / "m.txt");
  EXPECT_EQ(loaded.weights, c.model->weights);
  EXPECT_EQ(loaded.bias, c.model->bias);
  EXPECT_EQ(loaded.C, c.model->C);
  EXPECT_EQ(loaded.seed, c.model->seed);
  const auto header = read_text(dir / "m.txt").substr(0, 2);
  EXPECT_EQ(header, "d=");
}

TEST(ModelFile, RejectsOutOfRangeIndex) {
  TempDir dir("model");
  write_text(dir / "m.txt", "d=2 bias=0 C=1 seed=0\n5\t1.0\n");
  EXPECT_THROW(LinearModel::load(dir / "m.txt"), IngestionError);
}

TEST(Pipeline, SavesAndLoadsModelDirectory) {
  TempDir dir("pipeline");
  const auto& c = trained_corpus();
  TrainedPipeline p;
  p.vocab = c.vocab;
  p.model = c.model;
  save_pipeline(p, dir / "model");
  EXPECT_EQ(Vocabulary::load(dir / "model/vocab.tsv"), *c.vocab);
  EXPECT_EQ(LinearModel::load(dir / "model/model.txt").weights, c.model->weights);
}

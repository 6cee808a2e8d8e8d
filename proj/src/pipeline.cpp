#include "tutorlab/pipeline.hpp"

#include "tutorlab/errors.hpp"

namespace tutorlab {

TrainedPipeline train_pipeline(std::span<const Review> reviews, const PipelineOptions& options) {
  const auto train = filter_split(reviews, Split::train);
  const auto test = filter_split(reviews, Split::test);
  if (test.empty()) throw ValidationError("corpus has no test reviews");

  TrainedPipeline out;
  auto vocab = std::make_shared<Vocabulary>(build_vocabulary(reviews, options.min_df));
  SvmOptions svm;
  svm.seed = options.seed;
  out.cv = cross_validate(train, *vocab, options.c_grid, options.folds, options.seed, svm);
  svm.C = out.cv.chosen_C;
  auto trained = train_svm(train, *vocab, svm);
  out.trace = std::move(trained.trace);
  auto model = std::make_shared<LinearModel>(std::move(trained.model));
  out.test_accuracy = evaluate_accuracy(LinearSvmPredictor(model, vocab), test);
  out.vocab = std::move(vocab);
  out.model = std::move(model);
  return out;
}

void save_pipeline(const TrainedPipeline& pipeline, const std::filesystem::path& directory) {
  std::filesystem::create_directories(directory);
  pipeline.vocab->save(directory / "vocab.tsv");
  pipeline.model->save(directory / "model.txt");
}

LoadedModel load_model(const std::filesystem::path& manifest, const std::filesystem::path& model_directory) {
  LoadedModel out;
  auto model = std::make_shared<LinearModel>(LinearModel::load(model_directory / "model.txt"));
  auto vocab = std::make_shared<Vocabulary>(Vocabulary::load(model_directory / "vocab.tsv"));
  if (model->dimension() != vocab->size()) {
    throw ValidationError("model dimension " + std::to_string(model->dimension()) + " does not match vocabulary size " +
                          std::to_string(vocab->size()));
  }
  out.reviews = load_corpus(manifest, model->seed);
  out.model = std::move(model);
  out.vocab = std::move(vocab);
  return out;
}

}  // namespace tutorlab

#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include "tutorlab/classifier.hpp"
#include "tutorlab/corpus.hpp"

namespace tutorlab {

struct PipelineOptions {
  std::uint64_t seed = 0;
  std::vector<double> c_grid = kDefaultCGrid;
  int folds = 5;
  std::size_t min_df = 2;
};

struct TrainedPipeline {
  std::shared_ptr<const Vocabulary> vocab;
  std::shared_ptr<const LinearModel> model;
  CrossValidationResult cv;
  TrainingTrace trace;
  double test_accuracy = 0.0;
};

// Vocabulary from the training split, C by k-fold CV, final fit on the whole
// training split, accuracy on the test split.
TrainedPipeline train_pipeline(std::span<const Review> reviews, const PipelineOptions& options = {});

// Model directory layout: vocab.tsv and model.txt.
void save_pipeline(const TrainedPipeline& pipeline, const std::filesystem::path& directory);

struct LoadedModel {
  std::vector<Review> reviews;  // split re-derived from the model's seed
  std::shared_ptr<const Vocabulary> vocab;
  std::shared_ptr<const LinearModel> model;
};

LoadedModel load_model(const std::filesystem::path& manifest, const std::filesystem::path& model_directory);

}  // namespace tutorlab

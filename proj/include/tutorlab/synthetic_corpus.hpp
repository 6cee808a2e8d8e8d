#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "tutorlab/corpus.hpp"

namespace tutorlab {

// Seeded stand-in for a labeled hotel-review corpus. Each class draws from
// its own cue words at `cue_rate` and from the other class's cue words at
// `cross_rate`; the rest are shared filler words, plus one unique nonce token
// per review that never survives the vocabulary's document-frequency cut.
struct SyntheticCorpusOptions {
  std::size_t per_class = 800;
  std::size_t min_tokens = 60;
  std::size_t max_tokens = 140;
  double cue_rate = 0.075;
  double cross_rate = 0.03;
  std::uint64_t seed = 0;
};

// Reviews with ids r0001... and an 80/20 stratified split from assign_split.
std::vector<Review> synthetic_corpus(const SyntheticCorpusOptions& options = {});

// Writes one text file per review plus manifest.csv (id,path,label) and
// returns the manifest path.
std::filesystem::path write_corpus(const std::vector<Review>& reviews, const std::filesystem::path& directory);

}  // namespace tutorlab

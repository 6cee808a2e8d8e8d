#include "tutorlab/synthetic_corpus.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <string_view>

#include "tutorlab/errors.hpp"
#include "tutorlab/random.hpp"

namespace tutorlab {
namespace {

constexpr std::array<std::string_view, 36> kDeceptiveCues = {
    "chicago",   "my",        "husband",   "wife",      "vacation",  "luxury",    "experience", "amazing",
    "definitely", "recommend", "family",    "anniversary", "perfect", "elegant",   "wonderful",  "staying",
    "business",  "trip",      "weekend",   "finally",   "excited",   "relaxing",  "hotel",      "spa",
    "exceptional", "loved",   "i",         "me",        "we",        "beautiful", "stunning",   "best",
    "unforgettable", "dream", "superb",    "truly"};

constexpr std::array<std::string_view, 36> kGenuineCues = {
    "floor",   "bathroom", "location", "small",    "street",  "walk",   "block",    "elevator",
    "desk",    "parking",  "breakfast", "shower",  "window",  "view",   "noise",    "river",
    "avenue",  "minutes",  "price",    "clean",    "bed",     "carpet", "lobby",    "checked",
    "booked",  "towels",   "tv",       "coffee",   "doorman", "valet",  "corner",   "museum",
    "train",   "station",  "downtown", "square"};

constexpr std::array<std::string_view, 96> kFiller = {
    "the",     "a",       "and",     "was",      "to",       "of",      "in",      "it",       "for",     "with",
    "is",      "on",      "at",      "this",     "that",     "room",    "stay",    "staff",    "very",    "were",
    "had",     "be",      "they",    "there",    "our",      "from",    "as",      "but",      "all",     "so",
    "would",   "again",   "night",   "nights",   "service",  "friendly", "nice",   "good",     "great",   "time",
    "also",    "just",    "one",     "two",      "when",     "about",   "up",      "out",      "us",      "get",
    "back",    "really",  "could",   "area",     "which",    "place",   "well",    "here",     "even",    "day",
    "arrived", "asked",   "front",   "door",     "around",   "after",   "before",  "then",     "little",  "more",
    "some",    "food",    "bar",     "restaurant", "drinks", "quiet",   "comfortable", "helpful", "rooms", "city",
    "guests",  "called",  "told",    "went",     "made",     "check",   "said",    "next",     "only",    "other",
    "an",      "by",      "if",      "what",     "did",      "not"};

std::string nonce_token(std::size_t index) {
  // Letters only so tokenize() keeps it whole.
  std::string out = "zq";
  for (std::size_t v = index + 1; v > 0; v /= 26) out += static_cast<char>('a' + v % 26);
  return out;
}

}  // namespace

std::vector<Review> synthetic_corpus(const SyntheticCorpusOptions& o) {
  if (o.per_class == 0 || o.min_tokens == 0 || o.max_tokens < o.min_tokens) {
    throw ValidationError("invalid synthetic corpus options");
  }
  if (o.cue_rate < 0 || o.cross_rate < 0 || o.cue_rate + o.cross_rate > 1) {
    throw ValidationError("cue rates must be non-negative and sum to at most 1");
  }
  Rng rng(mix_seed(o.seed, 0x5e7c0));
  std::vector<Review> reviews;
  reviews.reserve(2 * o.per_class);
  for (std::size_t i = 0; i < 2 * o.per_class; ++i) {
    // Interleave classes so ids carry no label information.
    const Label label = (i % 2 == 0) ? Label::deceptive : Label::genuine;
    const auto& own = label == Label::deceptive ? kDeceptiveCues : kGenuineCues;
    const auto& other = label == Label::deceptive ? kGenuineCues : kDeceptiveCues;
    const std::size_t length = o.min_tokens + uniform_index(rng, o.max_tokens - o.min_tokens + 1);
    const std::size_t nonce_at = uniform_index(rng, length);

    std::string text;
    std::size_t sentence = 0;
    for (std::size_t t = 0; t < length; ++t) {
      std::string word;
      if (t == nonce_at) {
        word = nonce_token(i);
      } else {
        const double u = uniform_unit(rng);
        if (u < o.cue_rate) {
          word = own[uniform_index(rng, own.size())];
        } else if (u < o.cue_rate + o.cross_rate) {
          word = other[uniform_index(rng, other.size())];
        } else {
          word = kFiller[uniform_index(rng, kFiller.size())];
        }
      }
      if (sentence == 0 && !word.empty()) word[0] = static_cast<char>(word[0] - 'a' + 'A');
      text += word;
      ++sentence;
      if (t + 1 == length || (sentence >= 8 && uniform_unit(rng) < 0.15)) {
        text += ". ";
        sentence = 0;
      } else {
        text += ' ';
      }
    }
    while (!text.empty() && text.back() == ' ') text.pop_back();

    char id[16];
    std::snprintf(id, sizeof id, "r%04zu", i + 1);
    Review r;
    r.id = id;
    r.text = std::move(text);
    r.tokens = tokenize(r.text);
    r.label = label;
    reviews.push_back(std::move(r));
  }
  assign_split(reviews, o.seed);
  return reviews;
}

std::filesystem::path write_corpus(const std::vector<Review>& reviews, const std::filesystem::path& directory) {
  std::filesystem::create_directories(directory / "reviews");
  const auto manifest = directory / "manifest.csv";
  std::ofstream out(manifest);
  if (!out) throw IngestionError("cannot write " + manifest.string());
  out << "id,path,label\n";
  for (const auto& r : reviews) {
    const auto rel = std::filesystem::path("reviews") / (r.id + ".txt");
    std::ofstream f(directory / rel);
    if (!f) throw IngestionError("cannot write " + (directory / rel).string());
    f << r.text << '\n';
    out << r.id << ',' << rel.generic_string() << ',' << to_string(r.label) << '\n';
  }
  return manifest;
}

}  // namespace tutorlab

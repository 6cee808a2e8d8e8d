#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "fixtures.hpp"
#include "tutorlab/errors.hpp"
#include "tutorlab/synthetic_corpus.hpp"

using namespace tutorlab;
using namespace tutorlab::testing;

TEST(Tokenize, LowercasesAlphabeticRuns) {
  EXPECT_EQ(tokenize("We loved Chicago!"), (std::vector<std::string>{"we", "loved", "chicago"}));
}

TEST(Tokenize, EmptyTextGivesNoTokens) { EXPECT_TRUE(tokenize("").empty()); }

TEST(Tokenize, PunctuationAndDigitsSeparate) {
  EXPECT_EQ(tokenize("floor-to-ceiling"), (std::vector<std::string>{"floor", "to", "ceiling"}));
  EXPECT_EQ(tokenize("room 1204,view"), (std::vector<std::string>{"room", "view"}));
}

TEST(Tokenize, NonAsciiBytesSeparate) {
  EXPECT_EQ(tokenize("caf\xc3\xa9 bar"), (std::vector<std::string>{"caf", "bar"}));
}

class ManifestTest : public ::testing::Test {
 protected:
  TempDir dir{"corpus"};

  std::filesystem::path write_manifest(const std::vector<std::tuple<std::string, std::string, std::string>>& rows) {
    std::string text = "id,path,label\n";
    for (const auto& [id, label, body] : rows) {
      write_text(dir / ("docs/" + id + ".txt"), body);
      text += id + ",docs/" + id + ".txt," + label + "\n";
    }
    write_text(dir / "manifest.csv", text);
    return dir / "manifest.csv";
  }
};

TEST_F(ManifestTest, EmptyManifestGivesEmptyList) {
  write_text(dir / "manifest.csv", "id,path,label\n");
  EXPECT_TRUE(load_corpus(dir / "manifest.csv", 0).empty());
}

TEST_F(ManifestTest, TenRowsSameSeedGiveIdenticalSplit) {
  std::vector<std::tuple<std::string, std::string, std::string>> rows;
  for (int i = 0; i < 10; ++i) {
    rows.emplace_back("d" + std::to_string(i), i % 2 ? "genuine" : "deceptive", "text number " + std::to_string(i));
  }
  const auto manifest = write_manifest(rows);
  const auto a = load_corpus(manifest, 7);
  const auto b = load_corpus(manifest, 7);
  ASSERT_EQ(a.size(), 10u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].id, b[i].id);
    EXPECT_EQ(a[i].split, b[i].split);
  }
  // 5 per label, 4 train + 1 test each.
  for (const Label label : {Label::genuine, Label::deceptive}) {
    const auto n_train = std::count_if(a.begin(), a.end(),
                                       [&](const Review& r) { return r.label == label && r.split == Split::train; });
    EXPECT_EQ(n_train, 4);
  }
}

TEST_F(ManifestTest, ReviewTextAndTokensAreLoaded) {
  const auto manifest = write_manifest({{"a", "deceptive", "My husband LOVED it."}});
  const auto reviews = load_corpus(manifest, 0);
  ASSERT_EQ(reviews.size(), 1u);
  EXPECT_EQ(reviews[0].tokens, (std::vector<std::string>{"my", "husband", "loved", "it"}));
  EXPECT_EQ(reviews[0].label, Label::deceptive);
}

TEST_F(ManifestTest, UnknownLabelNamesTheRow) {
  const auto manifest = write_manifest({{"a", "genuine", "x"}, {"b", "fake", "y"}});
  try {
    load_corpus(manifest, 0);
    FAIL() << "expected IngestionError";
  } catch (const IngestionError& e) {
    EXPECT_NE(std::string(e.what()).find("row 3"), std::string::npos) << e.what();
  }
}

TEST_F(ManifestTest, DuplicateIdIsAnError) {
  write_text(dir / "x.txt", "x");
  write_text(dir / "manifest.csv", "id,path,label\na,x.txt,genuine\na,x.txt,deceptive\n");
  EXPECT_THROW(load_corpus(dir / "manifest.csv", 0), IngestionError);
}

TEST_F(ManifestTest, MissingFileIsAnError) {
  write_text(dir / "manifest.csv", "id,path,label\na,nowhere.txt,genuine\n");
  EXPECT_THROW(load_corpus(dir / "manifest.csv", 0), IngestionError);
}

TEST_F(ManifestTest, MissingManifestIsAnError) { EXPECT_THROW(load_corpus(dir / "absent.csv", 0), IngestionError); }

TEST_F(ManifestTest, WrongHeaderIsAnError) {
  write_text(dir / "manifest.csv", "name,file,label\n");
  EXPECT_THROW(load_corpus(dir / "manifest.csv", 0), IngestionError);
}

TEST(Split, StratifiedOnBalancedCorpus) {
  SyntheticCorpusOptions options;
  options.seed = 3;
  const auto reviews = synthetic_corpus(options);
  ASSERT_EQ(reviews.size(), 1600u);
  std::size_t counts[2][2] = {{0, 0}, {0, 0}};
  for (const auto& r : reviews) ++counts[static_cast<int>(r.label)][static_cast<int>(r.split)];
  EXPECT_EQ(counts[0][0], 640u);
  EXPECT_EQ(counts[1][0], 640u);
  EXPECT_EQ(counts[0][1], 160u);
  EXPECT_EQ(counts[1][1], 160u);
}

TEST(Split, DifferentSeedsGiveDifferentSplits) {
  std::vector<Review> a, b;
  for (int i = 0; i < 100; ++i) {
    a.push_back(make_review("r" + std::to_string(i), "x", i % 2 ? Label::genuine : Label::deceptive));
  }
  b = a;
  assign_split(a, 1);
  assign_split(b, 2);
  bool differ = false;
  for (std::size_t i = 0; i < a.size(); ++i) differ = differ || a[i].split != b[i].split;
  EXPECT_TRUE(differ);
}

TEST(VocabularyBuild, MinDfOneEnumeratesSortedTokens) {
  const std::vector<Review> docs = {make_review("1", "a b", Label::genuine),
                                    make_review("2", "b c", Label::deceptive)};
  const auto v = build_vocabulary(docs, 1);
  ASSERT_EQ(v.size(), 3u);
  EXPECT_EQ(v.index_of("a"), 0);
  EXPECT_EQ(v.index_of("b"), 1);
  EXPECT_EQ(v.index_of("c"), 2);
}

TEST(VocabularyBuild, MinDfTwoKeepsSharedToken) {
  const std::vector<Review> docs = {make_review("1", "a b", Label::genuine),
                                    make_review("2", "b c", Label::deceptive)};
  const auto v = build_vocabulary(docs, 2);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v.index_of("b"), 0);
}

TEST(VocabularyBuild, IgnoresTestSplit) {
  const std::vector<Review> docs = {make_review("1", "a b", Label::genuine),
                                    make_review("2", "zebra zebra", Label::deceptive, Split::test),
                                    make_review("3", "zebra", Label::deceptive, Split::test)};
  const auto v = build_vocabulary(docs, 1);
  EXPECT_FALSE(v.index_of("zebra").has_value());
}

TEST(VocabularyBuild, EmptyTrainingSetIsAnError) {
  const std::vector<Review> docs = {make_review("1", "a", Label::genuine, Split::test)};
  EXPECT_THROW(build_vocabulary(docs), ValidationError);
  EXPECT_THROW(build_vocabulary(std::vector<Review>{}), ValidationError);
}

TEST(VocabularyBuild, RerunReproducesDimension) {
  const auto& c = trained_corpus();
  const auto again = build_vocabulary(c.reviews);
  EXPECT_EQ(again, *c.vocab);
}

TEST(VocabularyBuild, NoTokenOutsideTrainingSplit) {
  const auto& c = trained_corpus();
  std::set<std::string> train_tokens;
  for (const auto& r : c.reviews) {
    if (r.split == Split::train) train_tokens.insert(r.tokens.begin(), r.tokens.end());
  }
  for (const auto& t : c.vocab->tokens()) EXPECT_TRUE(train_tokens.contains(t)) << t;
}

TEST(VocabularyFile, RoundTrips) {
  TempDir dir("vocab");
  const Vocabulary v({"zeta", "alpha", "mid"});
  v.save(dir / "v.tsv");
  EXPECT_EQ(read_text(dir / "v.tsv"), "alpha\t0\nmid\t1\nzeta\t2\n");
  EXPECT_EQ(Vocabulary::load(dir / "v.tsv"), v);
}

TEST(VocabularyFile, RejectsGaps) {
  TempDir dir("vocab");
  write_text(dir / "v.tsv", "alpha\t0\nmid\t2\n");
  EXPECT_THROW(Vocabulary::load(dir / "v.tsv"), IngestionError);
}

TEST(Vectorize, CountsInVocabularyTokens) {
  const Vocabulary v({"b", "c"});
  const auto x = vectorize(std::vector<std::string>{"b", "b", "c"}, v);
  ASSERT_EQ(x.entries.size(), 2u);
  EXPECT_EQ(x.entries[0].index, 0);
  EXPECT_EQ(x.entries[0].value, 2.0);
  EXPECT_EQ(x.entries[1].index, 1);
  EXPECT_EQ(x.entries[1].value, 1.0);
}

TEST(Vectorize, AllOutOfVocabularyIsEmpty) {
  const Vocabulary v({"b", "c"});
  EXPECT_TRUE(vectorize(std::vector<std::string>{"x", "y"}, v).entries.empty());
}

TEST(Vectorize, TotalEqualsInVocabularyTokenCountForEveryReview) {
  const auto& c = trained_corpus();
  for (const auto& r : c.reviews) {
    const auto x = vectorize(r, *c.vocab);
    const auto in_vocab = std::count_if(r.tokens.begin(), r.tokens.end(),
                                        [&](const std::string& t) { return c.vocab->index_of(t).has_value(); });
    ASSERT_EQ(x.total(), static_cast<double>(in_vocab)) << r.id;
    for (std::size_t i = 0; i < x.entries.size(); ++i) {
      ASSERT_GT(x.entries[i].value, 0.0);
      ASSERT_LT(static_cast<std::size_t>(x.entries[i].index), c.vocab->size());
      if (i > 0) {
        ASSERT_LT(x.entries[i - 1].index, x.entries[i].index);
      }
    }
  }
}

TEST(Vectorize, DeterministicForEqualInput) {
  const auto& c = trained_corpus();
  const auto& r = c.reviews.front();
  const auto a = vectorize(tokenize(r.text), *c.vocab);
  const auto b = vectorize(tokenize(r.text), *c.vocab);
  ASSERT_EQ(a.entries.size(), b.entries.size());
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    EXPECT_EQ(a.entries[i].index, b.entries[i].index);
    EXPECT_EQ(a.entries[i].value, b.entries[i].value);
  }
}

TEST(SyntheticCorpus, WrittenManifestLoadsBack) {
  TempDir dir("synth");
  SyntheticCorpusOptions options;
  options.per_class = 20;
  options.seed = 5;
  const auto reviews = synthetic_corpus(options);
  const auto manifest = write_corpus(reviews, dir.path());
  const auto loaded = load_corpus(manifest, 5);
  ASSERT_EQ(loaded.size(), reviews.size());
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    EXPECT_EQ(loaded[i].id, reviews[i].id);
    EXPECT_EQ(loaded[i].tokens, reviews[i].tokens);
    EXPECT_EQ(loaded[i].label, reviews[i].label);
    EXPECT_EQ(loaded[i].split, reviews[i].split);
  }
}

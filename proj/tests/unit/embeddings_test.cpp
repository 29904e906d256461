#include "propsearch/embeddings.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "propsearch/errors.hpp"
#include "support/fixtures.hpp"

namespace propsearch {
namespace {

EmbeddingModel load(const std::string& text, std::optional<std::size_t> max_words = std::nullopt) {
  std::istringstream in(text);
  return load_model(in, max_words, "test");
}

std::vector<float> to_vec(std::optional<VectorView> v) { return {v->begin(), v->end()}; }

TEST(LoadModelTest, Word2VecHeader) {
  auto m = load("2 3\na 1 0 0\nb 0 2 0");
  EXPECT_EQ(m.dim(), 3u);
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m.words()[0], "a");
  EXPECT_EQ(m.words()[1], "b");
  EXPECT_EQ(to_vec(lookup(m, "b")), (std::vector<float>{0, 2, 0}));
}

TEST(LoadModelTest, HeaderlessGloveWithTruncation) {
  auto m = load("a 1 0\nb 0 1\nc 1 1", 2);
  EXPECT_EQ(m.dim(), 2u);
  EXPECT_EQ(m.words(), (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(m.vocab_cap(), std::optional<std::size_t>(2));
}

TEST(LoadModelTest, RaggedRowNamesLine) {
  try {
    load("2 3\na 1 0 0\nb 0 2");
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_EQ(e.kind(), "format_error");
  }
}

TEST(LoadModelTest, HeaderDimensionMismatchIsFormatError) {
  EXPECT_THROW(load("1 3\na 1 0"), FormatError);
}

TEST(LoadModelTest, NonNumericComponent) {
  try {
    load("a 1 x\n");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.line(), 1u);
  }
  EXPECT_THROW(load("a 1 nan\n"), FormatError);
  EXPECT_THROW(load("a 1 inf\n"), FormatError);
  EXPECT_THROW(load("a 1  2\n"), FormatError);  // double space = empty field
}

TEST(LoadModelTest, EmptySourceIsEmptyModelError) {
  EXPECT_THROW(load(""), EmptyModelError);
  EXPECT_THROW(load("0 300\n"), EmptyModelError);
}

TEST(LoadModelTest, ScientificNotationAndSigns) {
  auto m = load("w 1e-3 -2.5E+2 +4\n");
  EXPECT_EQ(to_vec(lookup(m, "w")), (std::vector<float>{1e-3f, -250.0f, 4.0f}));
}

TEST(LoadModelTest, ToleratesTrailingSpaceAndCarriageReturn) {
  // fastText .vec files end rows with "<space>\n".
  auto m = load("2 2 \r\nx 1 2 \r\ny 3 4 \n");
  EXPECT_EQ(m.size(), 2u);
  EXPECT_EQ(to_vec(lookup(m, "y")), (std::vector<float>{3, 4}));
}

TEST(LoadModelTest, DuplicatesKeepFirstOccurrence) {
  auto m = load("a 1 0\nb 0 1\na 5 5\n");
  EXPECT_EQ(m.size(), 2u);
  EXPECT_EQ(m.duplicates_skipped(), 1u);
  EXPECT_EQ(to_vec(lookup(m, "a")), (std::vector<float>{1, 0}));
}

TEST(LoadModelTest, TruncationCountsDistinctWords) {
  auto m = load("a 1\na 2\nb 3\nc 4\n", 2);
  EXPECT_EQ(m.words(), (std::vector<std::string>{"a", "b"}));
}

TEST(LoadModelTest, Utf8Words) {
  auto m = load("café 1 2\n日本 3 4\n");
  EXPECT_TRUE(lookup(m, "café"));
  EXPECT_TRUE(lookup(m, "日本"));
}

TEST(LookupTest, CaseSensitiveAndNoFallback) {
  auto m = load("2 3\na 1 0 0\nb 0 2 0");
  EXPECT_EQ(to_vec(lookup(m, "a")), (std::vector<float>{1, 0, 0}));
  EXPECT_FALSE(lookup(m, "zzz"));
  EXPECT_FALSE(lookup(m, "A"));
}

TEST(PhraseVectorTest, SumsInVocabularyTokens) {
  auto m = load("a 1 0 0\nb 0 2 0\n");
  const std::vector<std::string> ab{"a", "b"};
  const std::vector<std::string> a_oov{"a", "zzz"};
  const std::vector<std::string> all_oov{"zzz", "qqq"};
  EXPECT_EQ(*phrase_vector(m, ab), (WordVector{1, 2, 0}));
  EXPECT_EQ(*phrase_vector(m, a_oov), (WordVector{1, 0, 0}));
  EXPECT_FALSE(phrase_vector(m, all_oov));
  EXPECT_FALSE(phrase_vector(m, std::vector<std::string>{}));
}

TEST(CosineTest, Examples) {
  const std::vector<float> a{1, 1, 0}, b{2, 2, 0};
  EXPECT_NEAR(cosine(a, b), 1.0, 1e-12);
  const std::vector<float> x{1, 0}, y{0, 1}, zero{0, 0}, v{3, 4};
  EXPECT_EQ(cosine(x, y), 0.0);
  EXPECT_EQ(cosine(zero, v), 0.0);
  EXPECT_EQ(cosine(v, zero), 0.0);
}

TEST(CosineTest, LengthMismatchIsDimensionError) {
  const std::vector<float> a{1, 0}, b{1, 0, 0};
  EXPECT_THROW(cosine(a, b), DimensionError);
}

TEST(EmbeddingModelTest, RejectsBadTables) {
  EXPECT_THROW(EmbeddingModel("m", 2, {"a"}, {1.0f}), DimensionError);
  EXPECT_THROW(EmbeddingModel("m", 0, {}, {}), DimensionError);
  EXPECT_THROW(EmbeddingModel("m", 1, {""}, {1.0f}), FormatError);
  EXPECT_THROW(EmbeddingModel("m", 1, {"a"}, {NAN}), FormatError);
}

// Property-style checks over random models.
class EmbeddingPropertiesTest : public ::testing::Test {
 protected:
  std::mt19937_64 rng{12345};

  EmbeddingModel random_model(std::size_t words, std::size_t dim) {
    std::uniform_real_distribution<float> comp(-3.0f, 3.0f);
    std::vector<std::pair<std::string, std::vector<float>>> rows;
    for (std::size_t i = 0; i < words; ++i) {
      std::vector<float> v(dim);
      for (auto& c : v) c = comp(rng);
      rows.emplace_back("w" + std::to_string(i), std::move(v));
    }
    return testing::make_model(rows);
  }
};

TEST_F(EmbeddingPropertiesTest, WriteThenLoadRoundTrips) {
  for (int trial = 0; trial < 20; ++trial) {
    auto m = random_model(1 + trial * 3, 1 + trial % 7);
    std::stringstream buf;
    write_model(m, buf);
    auto back = load_model(buf);
    ASSERT_EQ(back.words(), m.words());
    for (std::size_t i = 0; i < m.size(); ++i) {
      ASSERT_TRUE(std::equal(m.row(i).begin(), m.row(i).end(), back.row(i).begin()));
    }
  }
}

TEST_F(EmbeddingPropertiesTest, SingleTokenPhraseEqualsLookup) {
  auto m = random_model(30, 9);
  for (const auto& w : m.words()) {
    const std::vector<std::string> one{w};
    EXPECT_EQ(*phrase_vector(m, one), to_vec(lookup(m, w)));
  }
}

TEST_F(EmbeddingPropertiesTest, PhraseVectorIsPermutationInvariant) {
  auto m = random_model(25, 11);
  std::uniform_int_distribution<std::size_t> pick(0, 29);  // some OOV
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> tokens;
    for (int k = 0; k < 6; ++k) tokens.push_back("w" + std::to_string(pick(rng)));
    auto base = phrase_vector(m, tokens);
    std::shuffle(tokens.begin(), tokens.end(), rng);
    auto shuffled = phrase_vector(m, tokens);
    ASSERT_EQ(base.has_value(), shuffled.has_value());
    if (base) {
      ASSERT_EQ(*base, *shuffled);
    }
  }
}

TEST_F(EmbeddingPropertiesTest, CosineBounds) {
  std::uniform_real_distribution<float> comp(-100.0f, 100.0f);
  std::uniform_int_distribution<std::size_t> dim(1, 300);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<float> a(dim(rng)), b(a.size());
    for (auto& c : a) c = comp(rng);
    for (auto& c : b) c = comp(rng);
    EXPECT_LE(std::abs(cosine(a, b)), 1.0 + 1e-9);
    EXPECT_GE(cosine(a, a), 1.0 - 1e-9);
  }
}

TEST_F(EmbeddingPropertiesTest, TruncationKeepsPrefix) {
  auto m = random_model(40, 4);
  std::stringstream buf;
  write_model(m, buf);
  const std::string text = buf.str();
  for (std::size_t k : {1u, 7u, 39u, 40u, 100u}) {
    std::istringstream in(text);
    auto cut = load_model(in, k);
    const std::size_t expect = std::min<std::size_t>(k, 40);
    ASSERT_EQ(cut.size(), expect);
    EXPECT_TRUE(std::equal(cut.words().begin(), cut.words().end(), m.words().begin()));
  }
}

}  // namespace
}  // namespace propsearch

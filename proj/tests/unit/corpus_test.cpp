#include "cadenza/corpus.h"

#include <gtest/gtest.h>

#include <sstream>

#include "cadenza/errors.h"
#include "fixtures.h"
#include "oracles.h"

namespace cadenza {
namespace {

using testing::ShippedCorpus;

std::vector<DegreeSymbol> Seq(const std::string& text) { return text.empty() ? std::vector<DegreeSymbol>{} : ParseDegreeSequence(text); }

ErrorCode ParseFailure(const std::string& progressions, const std::string& rhythms, bool check_counts = false) {
  try {
    ParseCorpus(progressions, rhythms, check_counts);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error";
  return ErrorCode::kIo;
}

TEST(CorpusTest, ShippedCountsAndDigest) {
  const CorpusDb& db = ShippedCorpus();
  EXPECT_EQ(db.progressions.size(), static_cast<std::size_t>(kProgressionCount));
  EXPECT_EQ(db.rhythms.size(), static_cast<std::size_t>(kRhythmCount));
  for (std::size_t c = 0; c < kAllCategories.size(); ++c) {
    auto n = std::count_if(db.progressions.begin(), db.progressions.end(),
                           [&](const ProgressionEntry& e) { return e.category == kAllCategories[c]; });
    EXPECT_EQ(n, kCategoryCounts[c]) << CategoryName(kAllCategories[c]);
  }
  EXPECT_NE(db.source_digest, 0u);
  for (int id = 1; id <= kRhythmCount; ++id) EXPECT_EQ(db.Rhythm(id).Total(), Beats(4)) << id;
}

TEST(CorpusTest, SerializeParseRoundTrip) {
  const CorpusDb& db = ShippedCorpus();
  CorpusDb again = ParseCorpus(SerializeProgressions(db.progressions), SerializeRhythms(db.rhythms));
  EXPECT_EQ(again.progressions, db.progressions);
  EXPECT_EQ(again.rhythms, db.rhythms);
}

TEST(CorpusTest, RepeatSyntax) {
  CorpusDb db = ParseCorpus("x | classic | major | I IV V I\n", "1 | pop | (1/2 rest) (1/2 note) * 4\n", false);
  ASSERT_EQ(db.rhythms.size(), 1u);
  EXPECT_EQ(db.rhythms[0].events.size(), 8u);
  EXPECT_EQ(db.rhythms[0].NoteOnsets(), (std::vector<Beats>{Beats(1, 2), Beats(3, 2), Beats(5, 2), Beats(7, 2)}));
}

TEST(CorpusTest, Errors) {
  EXPECT_EQ(ParseFailure("x | classic | major | I IV V I\n", "1 | pop | (1 note) * 3\n"), ErrorCode::kDurationMismatch);
  EXPECT_EQ(ParseFailure("x | nonsense | major | I\n", "1 | pop | (4 note)\n"), ErrorCode::kParseError);
  EXPECT_EQ(ParseFailure("x | classic | major | I IV V I\n", "1 | pop | (4 note)\n", true), ErrorCode::kCountMismatch);
  EXPECT_THROW(ShippedCorpus().Rhythm(17), Error);
  EXPECT_THROW(ShippedCorpus().Progression("zz"), Error);
}

// Ratios computed with Python's difflib.SequenceMatcher(autojunk=False) on
// the same token lists.
struct RatioCase {
  std::string a, b;
  Ratio want;
};

class SimilarityTableTest : public ::testing::TestWithParam<RatioCase> {};

TEST_P(SimilarityTableTest, MatchesDifflib) {
  const auto& c = GetParam();
  EXPECT_EQ(SimilarityRatio(Seq(c.a), Seq(c.b)), c.want) << c.a << " | " << c.b;
}

INSTANTIATE_TEST_SUITE_P(Difflib, SimilarityTableTest,
                         ::testing::Values(RatioCase{"I IV V I", "I IV V I", Ratio(1)},
                                           RatioCase{"I IV", "I IV V I", Ratio(2, 3)},
                                           RatioCase{"I IV", "vi IV V I", Ratio(1, 3)},
                                           RatioCase{"I IV V I", "I V IV I", Ratio(3, 4)},
                                           RatioCase{"I vi IV V", "vi IV V I", Ratio(3, 4)},
                                           RatioCase{"I", "V", Ratio(0)},
                                           RatioCase{"", "I IV", Ratio(0)},
                                           RatioCase{"I IV I IV", "IV I IV I", Ratio(3, 4)},
                                           RatioCase{"Imaj7 ii7 V7 Imaj7", "Imaj7 ii7 V7 IVmaj7", Ratio(3, 4)},
                                           RatioCase{"I IV V vi IV V I", "vi IV V I", Ratio(8, 11)},
                                           RatioCase{"V I V I V", "I V", Ratio(4, 7)}));

TEST(SimilarityTest, LeftmostTieBreak) {
  // Both "I" (a=0, b=3) and "IV" (a=1, b=1) are longest; the earlier one in a
  // wins, which leaves nothing to match on either side.
  auto blocks = MatchingBlocks(Seq("I IV"), Seq("vi IV V I"));
  ASSERT_EQ(blocks.size(), 1u);
  EXPECT_EQ(blocks[0], (MatchingBlock{0, 3, 1}));
}

TEST(SimilarityTest, TokensCompareOnFullSymbol) {
  EXPECT_EQ(SimilarityRatio(Seq("V"), Seq("V7")), Ratio(0));
  EXPECT_EQ(SimilarityRatio(Seq("II"), Seq("ii")), Ratio(0));
  EXPECT_EQ(SimilarityRatio({}, {}), Ratio(1));
}

TEST(SimilarityTest, AgreesWithBruteForce) {
  const std::vector<std::vector<std::string>> seqs = {
      {}, {"I"}, {"I", "IV"}, {"IV", "I", "IV"}, {"V", "vi", "V", "I"}, {"I", "I", "I"}, {"vi", "IV", "I", "V", "vi"}};
  for (const auto& a : seqs) {
    for (const auto& b : seqs) {
      std::vector<DegreeSymbol> da, db;
      for (const auto& t : a) da.push_back(ParseDegree(t));
      for (const auto& t : b) db.push_back(ParseDegree(t));
      EXPECT_EQ(SimilarityRatio(da, db), testing::BruteForceRatio(a, b));
    }
  }
}

TEST(RankingTest, WorkedExampleOrder) {
  auto ranked = RankProgressions(Seq("I IV"), ShippedCorpus(), Mode::kMajor);
  ASSERT_FALSE(ranked.empty());
  EXPECT_EQ(ranked[0].entry->id, "c01");
  EXPECT_EQ(ranked[0].ratio, Ratio(2, 3));
  for (std::size_t i = 1; i < ranked.size(); ++i) EXPECT_GE(ranked[i - 1].ratio, ranked[i].ratio);
  for (const auto& r : ranked) EXPECT_TRUE(r.entry->AvailableIn(Mode::kMajor));
}

TEST(RhythmFitTest, EveryPatternFitsItself) {
  const CorpusDb& db = ShippedCorpus();
  for (const auto& pattern : db.rhythms) {
    RhythmFit fit = FitRhythm(MeasureFromPattern(pattern, 62), db);
    EXPECT_EQ(fit.pattern->id, pattern.id);
    EXPECT_EQ(fit.distance, 0);
  }
}

TEST(RhythmFitTest, HammingDistanceOnSlots) {
  const CorpusDb& db = ShippedCorpus();
  // Two half notes against four quarters: two onsets become sustains.
  Measure m = MeasureFromPattern(db.Rhythm(4), 62);
  SlotGrid a = Rasterize(m), b = Rasterize(db.Rhythm(2));
  int differ = 0;
  for (std::size_t i = 0; i < a.size(); ++i) differ += a[i] != b[i];
  EXPECT_EQ(differ, 2);
  EXPECT_EQ(FitRhythm(m, db).pattern->id, 4);
}

}  // namespace
}  // namespace cadenza

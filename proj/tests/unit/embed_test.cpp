#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>

#include "ctp/embed.hpp"
#include "ctp/error.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace ctp;
using testing_support::make_trial;

namespace {

bool all_zero(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

bool block_equal(const Vector& a, const Vector& b, std::size_t block, std::size_t h) {
  return std::equal(a.begin() + static_cast<long>(block * h), a.begin() + static_cast<long>((block + 1) * h),
                    b.begin() + static_cast<long>(block * h));
}

}  // namespace

TEST(HashingEmbed, EmptyTextIsZero) {
  const auto v = hashing_embed("", 16, 0);
  ASSERT_EQ(v.size(), 16u);
  EXPECT_TRUE(all_zero(v));
  HashingEncoder enc(8, 1);
  const std::vector<std::string> texts = {""};
  EXPECT_TRUE(all_zero(enc.encode_batch(texts)[0]));
}

TEST(HashingEmbed, DeterministicAndUnitNorm) {
  const auto a = hashing_embed("aspirin trial", 8, 1);
  const auto b = hashing_embed("aspirin trial", 8, 1);
  EXPECT_EQ(a, b);
  EXPECT_NEAR(oracle::l2_norm(a), 1.0, 1e-9);
  const auto long_text = hashing_embed("Adults with moderate to severe plaque psoriasis for six months", 64, 9);
  EXPECT_NEAR(oracle::l2_norm(long_text), 1.0, 1e-9);
}

TEST(HashingEmbed, SeedChangesTheProjection) {
  EXPECT_NE(hashing_embed("aspirin trial for stroke", 64, 1), hashing_embed("aspirin trial for stroke", 64, 2));
}

TEST(HashingEmbed, WordOrderMattersThroughBigrams) {
  // Same unigrams, different bigrams.
  EXPECT_NE(hashing_embed("placebo controlled double blind", 256, 3),
            hashing_embed("double blind placebo controlled", 256, 3));
}

TEST(HashingEmbed, TokensAreLowercasedAlnumRuns) {
  EXPECT_EQ(hashing_tokens("IL-5, Anti-IgE!"), (std::vector<std::string>{"il", "5", "anti", "ige"}));
  EXPECT_EQ(hashing_embed("Aspirin TRIAL", 32, 4), hashing_embed("aspirin, trial.", 32, 4));
}

TEST(HashingEncoder, IdEncodesParameters) {
  EXPECT_NE(HashingEncoder(8, 1).id(), HashingEncoder(8, 2).id());
  EXPECT_NE(HashingEncoder(8, 1).id(), HashingEncoder(16, 1).id());
}

TEST(EmbedDescription, DimensionIsElevenBlocks) {
  HashingEncoder enc(768, 0);
  EXPECT_EQ(embed_description(make_trial("NCT1", Phase::PhaseII, "2020-01-01"), enc).values.size(), 8448u);
}

TEST(EmbedDescription, EmptyAttributesGiveZeroVector) {
  TrialRecord t;
  t.nct_id = "NCT1";
  HashingEncoder enc(4, 0);
  const auto v = embed_description(t, enc);
  ASSERT_EQ(v.values.size(), 44u);
  // Drug class always renders a display name, so only that block is non-zero.
  for (auto a : kAttributes) {
    const std::span<const double> block(v.values.data() + index_of(a) * 4, 4);
    EXPECT_EQ(all_zero(block), a != Attribute::DrugClass) << attribute_key(a);
  }
}

TEST(EmbedDescription, SwappingBriefAndCriteriaTouchesOnlyThoseBlocks) {
  HashingEncoder enc(16, 5);
  auto t = make_trial("NCT1", Phase::PhaseII, "2020-01-01");
  const auto before = embed_description(t, enc).values;
  std::swap(t.attributes.brief, t.attributes.criteria);
  const auto after = embed_description(t, enc).values;
  for (std::size_t b = 0; b < kAttributeCount; ++b) {
    const bool touched = b == index_of(Attribute::Brief) || b == index_of(Attribute::Criteria);
    EXPECT_EQ(block_equal(before, after, b, 16), !touched) << b;
  }
}

TEST(EmbedRecords, MatchesPerRecordEmbeddingAndFillsCache) {
  HashingEncoder enc(8, 2);
  std::vector<TrialRecord> rs = {make_trial("NCT1", Phase::PhaseII, "2020-01-01"),
                                 make_trial("NCT2", Phase::PhaseIII, "2020-01-01")};
  EmbeddingCache cache;
  const auto vs = embed_records(rs, enc, &cache);
  ASSERT_EQ(vs.size(), 2u);
  for (std::size_t i = 0; i < rs.size(); ++i) {
    EXPECT_EQ(vs[i].values, embed_description(rs[i], enc).values);
    EXPECT_EQ(vs[i].source_nct_id, rs[i].nct_id);
  }
  // Shared attribute texts are stored once.
  EXPECT_LT(cache.size(), 22u);
  EXPECT_TRUE(cache.find(enc.id(), "Asthma"));
  EXPECT_FALSE(cache.find("other-encoder", "Asthma"));
}

TEST(DropAttribute, RemovesOneBlock) {
  const Vector v = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20, 21};
  const auto d0 = drop_attribute(v, 0);
  ASSERT_EQ(d0.size(), 20u);
  EXPECT_EQ(d0.front(), 2);
  const auto d8 = drop_attribute(v, 8);
  ASSERT_EQ(d8.size(), 20u);
  for (std::size_t i = 0; i < 16; ++i) EXPECT_EQ(d8[i], v[i]);
  for (std::size_t i = 16; i < 20; ++i) EXPECT_EQ(d8[i], v[i + 2]);
  EXPECT_THROW(drop_attribute(v, 11), IndexOutOfRange);
}

TEST(MatrixFile, RoundTripAndCorruption) {
  testing_support::TempDir dir;
  FeatureMatrix m;
  m.dim = 3;
  m.metadata = R"({"encoder":"hashing:h=3"})";
  m.append("NCT1", std::vector<double>{1.5, -0.0, 3e-300});
  m.append("NCT2", std::vector<double>{0.1, 0.2, 0.3});
  save_matrix(m, dir / "m.bin");
  const auto back = load_matrix(dir / "m.bin");
  EXPECT_EQ(back.ids, m.ids);
  EXPECT_EQ(back.values, m.values);
  EXPECT_EQ(back.metadata, m.metadata);

  const auto bytes = testing_support::slurp(dir / "m.bin");
  {
    std::ofstream out(dir / "short.bin", std::ios::binary);
    out << bytes.substr(0, bytes.size() - 5);
  }
  EXPECT_THROW(load_matrix(dir / "short.bin"), CorruptFile);
  auto future = bytes;
  future[4] = 9;
  {
    std::ofstream out(dir / "future.bin", std::ios::binary);
    out << future;
  }
  EXPECT_THROW(load_matrix(dir / "future.bin"), FormatVersionMismatch);
}

#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include "ctp/corpus.hpp"
#include "ctp/error.hpp"
#include "ctp/text.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace ctp;
using testing_support::make_trial;

namespace {

TrialRecord table9_trial() {
  std::istringstream in(testing_support::slurp(testing_support::fixture("table9_trial.jsonl")));
  return parse_trial_records(in).records.at(0);
}

LabeledTrial entry(const std::string& nct, const std::string& date, LabelValue v,
                   Phase phase = Phase::PhaseII) {
  const Rule r = v == LabelValue::Yes ? Rule::Rule1_Succeeded : Rule::Rule2_AtUltimatePhase;
  return {make_trial(nct, phase, date), {v, r, std::nullopt}};
}

std::string nct(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "NCT%04d", i);
  return buf;
}

std::size_t count(const std::vector<LabeledTrial>& v, LabelValue value) {
  return static_cast<std::size_t>(
      std::count_if(v.begin(), v.end(), [&](const auto& e) { return e.label.value == value; }));
}

}  // namespace

TEST(Description, Table9Layout) {
  const auto d = synthesize_description(table9_trial());
  EXPECT_EQ(d.text.rfind("TRIAL NAME: Phase II - X2202; \nBRIEF: ", 0), 0u);
  EXPECT_NE(d.text.find("DRUG USED: BVS857;"), std::string::npos);
  EXPECT_NE(d.text.find("DRUG CLASS: New Molecular Entity (NME); \n"), std::string::npos);
  EXPECT_EQ(d.source_nct_id, "NCT90002202");
  EXPECT_EQ(d.char_count, oracle::code_points(d.text));
}

TEST(Description, ExactTemplate) {
  const auto t = make_trial("NCT1", Phase::PhaseII, "2020-01-01");
  const std::string expected =
      "TRIAL NAME: Study NCT1; \nBRIEF: Brief summary for NCT1.; \nDRUG USED: drugamab; \n"
      "DRUG CLASS: Biologic; \nINDICATION: Asthma; \nTARGET: IL-5; \nTHERAPY: Monotherapy; \n"
      "LEAD SPONSOR: Acme Pharma; \nCRITERIA: Adults aged 18 to 65.; \n"
      "PRIMARY OUTCOME: FEV1 at week 12; \nSECONDARY OUTCOME: Exacerbation rate";
  EXPECT_EQ(synthesize_description(t).text, expected);
}

TEST(Description, EmptyOptionalFieldsKeepTheirSlots) {
  auto t = make_trial("NCT1", Phase::PhaseII, "2020-01-01");
  t.attributes.target.clear();
  t.attributes.therapy.clear();
  t.attributes.secondary_outcome.clear();
  const auto d = synthesize_description(t);
  EXPECT_NE(d.text.find("TARGET: ; \nTHERAPY: ; \n"), std::string::npos);
  EXPECT_TRUE(d.text.ends_with("SECONDARY OUTCOME: "));
  const auto fields = extract_fields(d.text);
  ASSERT_TRUE(fields);
  EXPECT_EQ((*fields)[index_of(Attribute::Target)], "");
}

TEST(Description, OversizeCriteriaIsTruncatedFirst) {
  auto t = make_trial("NCT1", Phase::PhaseII, "2020-01-01");
  t.attributes.criteria = std::string(50000, 'c');
  const auto d = synthesize_description(t, 16000);
  EXPECT_LE(oracle::code_points(d.text), 16000u);
  EXPECT_EQ(d.char_count, oracle::code_points(d.text));
  const auto fields = extract_fields(d.text);
  ASSERT_TRUE(fields);
  const auto& crit = (*fields)[index_of(Attribute::Criteria)];
  EXPECT_TRUE(crit.ends_with(kTruncationMarker));
  EXPECT_LT(crit.size(), 50000u);
  for (auto a : kAttributes) {
    if (a == Attribute::Criteria || a == Attribute::DrugClass) continue;
    EXPECT_EQ((*fields)[index_of(a)], t.attributes.text(a)) << attribute_key(a);
  }
}

TEST(Description, BudgetIsFilledExactly) {
  auto t = make_trial("NCT1", Phase::PhaseII, "2020-01-01");
  t.attributes.criteria = std::string(500, 'c');
  EXPECT_EQ(synthesize_description(t, 300).char_count, 300u);
}

TEST(Description, BriefIsCutAfterCriteriaIsExhausted) {
  auto t = make_trial("NCT1", Phase::PhaseII, "2020-01-01");
  t.attributes.criteria = std::string(1000, 'c');
  t.attributes.brief = std::string(1000, 'b');
  const auto d = synthesize_description(t, 400);
  EXPECT_LE(d.char_count, 400u);
  const auto fields = extract_fields(d.text);
  ASSERT_TRUE(fields);
  EXPECT_TRUE((*fields)[index_of(Attribute::Brief)].ends_with(kTruncationMarker));
  EXPECT_LE(oracle::code_points((*fields)[index_of(Attribute::Criteria)]), 1u);
}

TEST(Description, TruncationRespectsCodePoints) {
  auto t = make_trial("NCT1", Phase::PhaseII, "2020-01-01");
  std::string crit;
  for (int i = 0; i < 2000; ++i) crit += "é";
  t.attributes.criteria = crit;
  const auto d = synthesize_description(t, 1000);
  EXPECT_EQ(d.char_count, 1000u);
  EXPECT_EQ(text::utf8_length(d.text), 1000u);
}

TEST(Description, OmitBlanksOneSlot) {
  const auto t = make_trial("NCT1", Phase::PhaseII, "2020-01-01");
  const auto d = synthesize_description(t, kDefaultCharBudget, Attribute::Criteria);
  EXPECT_NE(d.text.find("CRITERIA: ; \n"), std::string::npos);
}

TEST(SplitSizes, FloorThenRemainder) {
  EXPECT_EQ(split_sizes(20, {}), (std::array<std::size_t, 3>{13, 3, 4}));
  for (std::size_t n = 0; n < 300; ++n) {
    EXPECT_EQ(split_sizes(n, {0.65, 0.15, 0.20}), oracle::split_sizes_percent(n, {65, 15, 20})) << n;
    EXPECT_EQ(split_sizes(n, {0.7, 0.1, 0.2}), oracle::split_sizes_percent(n, {70, 10, 20})) << n;
  }
}

TEST(ChronologicalSplit, TwentyDistinctDates) {
  std::vector<LabeledTrial> c;
  for (int i = 0; i < 20; ++i) {
    const auto date = Date::from_days_since_epoch(18000 + 7 * (19 - i)).to_string();
    c.push_back(entry(nct(i), date, i % 2 ? LabelValue::Yes : LabelValue::No));
  }
  const auto s = chronological_split(c);
  EXPECT_EQ(s.train.size(), 13u);
  EXPECT_EQ(s.validation.size(), 3u);
  EXPECT_EQ(s.test.size(), 4u);
  EXPECT_LT(*s.train.back().trial.last_modified, *s.validation.front().trial.last_modified);
  EXPECT_LT(*s.validation.back().trial.last_modified, *s.test.front().trial.last_modified);
  EXPECT_EQ(s.train_end, s.train.back().trial.last_modified);
}

TEST(ChronologicalSplit, SharedDateFallsBackToNctOrder) {
  std::vector<LabeledTrial> c;
  for (int i : {5, 3, 9, 1, 7, 0, 8, 2, 6, 4}) c.push_back(entry(nct(i), "2021-06-01", LabelValue::Yes));
  const auto s = chronological_split(c, {0.6, 0.2, 0.2});
  std::vector<std::string> order;
  for (const auto* part : {&s.train, &s.validation, &s.test})
    for (const auto& e : *part) order.push_back(e.trial.nct_id);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(order[static_cast<std::size_t>(i)], nct(i));
}

TEST(ChronologicalSplit, MonthlyCutoff) {
  // Twenty months ending July 2022 feed train and validation; five months
  // from August 2022 make up the test share.
  std::vector<LabeledTrial> c;
  int k = 0;
  for (int y = 2020; y <= 2022; ++y)
    for (int m = 1; m <= 12; ++m) {
      const auto d = Date::make(y, m, 15);
      if (*d < *Date::make(2020, 12, 1) || *d > *Date::make(2022, 12, 31)) continue;
      c.push_back(entry(nct(k++), d->to_string(), LabelValue::Yes));
    }
  ASSERT_EQ(c.size(), 25u);
  const auto s = chronological_split(c, {0.6, 0.2, 0.2});
  for (const auto& e : s.train) EXPECT_LT(*e.trial.last_modified, *Date::make(2022, 8, 1));
  for (const auto& e : s.validation) EXPECT_LT(*e.trial.last_modified, *Date::make(2022, 8, 1));
  for (const auto& e : s.test) EXPECT_GE(*e.trial.last_modified, *Date::make(2022, 8, 1));
}

TEST(ChronologicalSplit, RejectsBadInput) {
  EXPECT_THROW(chronological_split({}), EmptyCorpus);
  std::vector<LabeledTrial> c = {entry("NCT1", "2020-01-01", LabelValue::Yes)};
  EXPECT_THROW(chronological_split(c, {0.5, 0.5, 0.5}), InvalidArgument);
  EXPECT_THROW(chronological_split(c, {1.2, -0.1, -0.1}), InvalidArgument);
}

TEST(Balance, AlreadyBalancedIsUnchanged) {
  std::vector<LabeledTrial> c;
  for (int i = 0; i < 20; ++i)
    c.push_back(entry(nct(i), "2020-01-01", i % 2 ? LabelValue::Yes : LabelValue::No));
  const auto b = balance(c, 3);
  ASSERT_EQ(b.size(), 20u);
  for (std::size_t i = 0; i < 20; ++i) EXPECT_EQ(b[i].trial.nct_id, c[i].trial.nct_id);
}

TEST(Balance, DownsamplesMajorityDeterministically) {
  std::vector<LabeledTrial> c;
  for (int i = 0; i < 40; ++i)
    c.push_back(entry(nct(i), "2020-01-01", i < 30 ? LabelValue::Yes : LabelValue::No));
  const auto a = balance(c, 7);
  const auto b = balance(c, 7);
  EXPECT_EQ(count(a, LabelValue::Yes), 10u);
  EXPECT_EQ(count(a, LabelValue::No), 10u);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].trial.nct_id, b[i].trial.nct_id);
  EXPECT_TRUE(std::is_sorted(a.begin(), a.end(),
                             [](const auto& x, const auto& y) { return x.trial.nct_id < y.trial.nct_id; }));
  const auto other = balance(c, 8);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) differs |= a[i].trial.nct_id != other[i].trial.nct_id;
  EXPECT_TRUE(differs);
}

TEST(Balance, SingleClassThrows) {
  std::vector<LabeledTrial> c = {entry("NCT1", "2020-01-01", LabelValue::Yes)};
  EXPECT_THROW(balance(c, 1), SingleClassCorpus);
}

TEST(FilterPhase, KeepsOnlyRequestedPhase) {
  std::vector<LabeledTrial> c = {entry("NCT1", "2020-01-01", LabelValue::Yes, Phase::PhaseI),
                                 entry("NCT2", "2020-01-01", LabelValue::Yes, Phase::PhaseII),
                                 entry("NCT3", "2020-01-01", LabelValue::No, Phase::PhaseIII),
                                 entry("NCT4", "2020-01-01", LabelValue::No, Phase::PhaseII),
                                 entry("NCT5", "2020-01-01", LabelValue::Yes, Phase::PhaseIII)};
  EXPECT_EQ(filter_phase(c, Phase::PhaseII).size(), 2u);
  const auto p3 = filter_phase(c, Phase::PhaseIII);
  ASSERT_EQ(p3.size(), 2u);
  EXPECT_EQ(p3[0].trial.nct_id, "NCT3");
  EXPECT_TRUE(filter_phase({}, Phase::PhaseI).empty());
}

TEST(ChatExample, PlainAndReasoningAnswers) {
  const auto d = synthesize_description(make_trial("NCT1", Phase::PhaseII, "2020-01-01"));
  const Label yes{LabelValue::Yes, Rule::Rule1_Succeeded, "ignored"};
  const Label strategic{LabelValue::No, Rule::Rule3_Terminated, "Strategic"};
  const Label plain_no{LabelValue::No, Rule::Rule2_AtUltimatePhase, std::nullopt};
  EXPECT_EQ(build_chat_example(d, yes, false).assistant, "Yes");
  EXPECT_EQ(build_chat_example(d, yes, true).assistant, "Yes");
  EXPECT_EQ(build_chat_example(d, strategic, true).assistant, "No. Strategic");
  EXPECT_EQ(build_chat_example(d, strategic, false).assistant, "No");
  EXPECT_EQ(build_chat_example(d, plain_no, true).assistant, "No");
  const auto ex = build_chat_example(d, yes, false);
  EXPECT_EQ(ex.system, kSystemPrompt);
  EXPECT_EQ(ex.user, d.text);
}

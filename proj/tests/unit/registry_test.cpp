#include <gtest/gtest.h>

#include <sstream>

#include "ctp/registry.hpp"
#include "test_support.hpp"

using namespace ctp;
using testing_support::make_trial;

TEST(Phase, ParsesCommonSpellings) {
  EXPECT_EQ(parse_phase("II"), Phase::PhaseII);
  EXPECT_EQ(parse_phase("phase 2"), Phase::PhaseII);
  EXPECT_EQ(parse_phase("Phase III"), Phase::PhaseIII);
  EXPECT_EQ(parse_phase("1"), Phase::PhaseI);
  EXPECT_EQ(parse_phase("approved"), Phase::Approved);
  EXPECT_EQ(parse_phase("Phase 1/Phase 2"), Phase::PhaseII);
  EXPECT_FALSE(parse_phase("Phase IV"));
  EXPECT_FALSE(parse_phase(""));
}

TEST(Phase, IsOrdered) {
  EXPECT_LT(Phase::PhaseI, Phase::PhaseII);
  EXPECT_LT(Phase::PhaseII, Phase::PhaseIII);
  EXPECT_LT(Phase::PhaseIII, Phase::Approved);
}

TEST(DrugClass, UnknownForUnrecognizedText) {
  EXPECT_EQ(parse_drug_class("NME"), DrugClass::NME);
  EXPECT_EQ(parse_drug_class("biosimilar"), DrugClass::Biosimilar);
  EXPECT_EQ(parse_drug_class("gene therapy"), DrugClass::Unknown);
  EXPECT_EQ(parse_drug_class(""), DrugClass::Unknown);
}

TEST(Attribute, KeysRoundTrip) {
  for (auto a : kAttributes) EXPECT_EQ(parse_attribute(attribute_key(a)), a);
  EXPECT_EQ(attribute_label(Attribute::LeadSponsor), "LEAD SPONSOR");
  EXPECT_EQ(index_of(Attribute::Criteria), 8u);
}

TEST(Validation, CompleteRecordIsUsable) {
  EXPECT_TRUE(validate_record(make_trial("NCT1", Phase::PhaseII, "2020-01-01")).usable());
}

TEST(Validation, EmptyCriteriaIsLowQuality) {
  auto t = make_trial("NCT1", Phase::PhaseII, "2020-01-01");
  t.attributes.criteria = "   ";
  const auto r = validate_record(t);
  EXPECT_FALSE(r.usable());
  ASSERT_EQ(r.issues.size(), 1u);
  EXPECT_EQ(r.issues[0].field, "criteria");
  EXPECT_EQ(r.issues[0].kind, ValidationIssue::Kind::Empty);
}

TEST(Validation, MissingPhaseOrDateIsLowQuality) {
  auto t = make_trial("NCT1", Phase::PhaseII, "2020-01-01");
  t.phase.reset();
  EXPECT_FALSE(validate_record(t).usable());
  t = make_trial("NCT1", Phase::PhaseII, "2020-01-01");
  t.last_modified.reset();
  EXPECT_FALSE(validate_record(t).usable());
}

TEST(Validation, OptionalFieldsMayBeBlank) {
  auto t = make_trial("NCT1", Phase::PhaseII, "2020-01-01");
  t.attributes.target.clear();
  t.attributes.secondary_outcome.clear();
  EXPECT_TRUE(validate_record(t).usable());
}

TEST(Validation, ApprovedIsNotATrialPhase) {
  EXPECT_FALSE(validate_record(make_trial("NCT1", Phase::Approved, "2020-01-01")).usable());
}

TEST(TrialParsing, SerializeRoundTrip) {
  auto t = make_trial("NCT00000042", Phase::PhaseIII, "2019-07-04", "DI-7");
  t.status = RecruitmentStatus::terminated();
  t.termination_reason = "Business decision";
  t.attributes.criteria = "Ages ≥ 18; naïve to treatment";
  const auto back = parse_trial_line(serialize_trial(t));
  ASSERT_TRUE(back);
  EXPECT_EQ(*back, t);
}

TEST(TrialParsing, Table9FixtureParses) {
  std::istringstream in(testing_support::slurp(testing_support::fixture("table9_trial.jsonl")));
  const auto res = parse_trial_records(in);
  ASSERT_TRUE(res.errors.empty());
  ASSERT_EQ(res.records.size(), 1u);
  const auto& t = res.records[0];
  EXPECT_EQ(t.phase, Phase::PhaseII);
  EXPECT_EQ(t.attributes.drug_class, DrugClass::NME);
  EXPECT_EQ(t.attributes.drug_used, "BVS857");
  EXPECT_TRUE(validate_record(t).usable());
}

TEST(TrialParsing, BadLinesBecomeErrors) {
  std::istringstream in(
      "{\"nct_id\":\"NCT1\",\"phase\":\"II\"}\n"
      "not json\n"
      "\n"
      "[1,2]\n");
  const auto res = parse_trial_records(in);
  EXPECT_EQ(res.records.size(), 1u);
  ASSERT_EQ(res.errors.size(), 2u);
  EXPECT_EQ(res.errors[0].line, 2u);
  EXPECT_EQ(res.errors[1].line, 4u);
}

TEST(TrialParsing, DuplicateKeepsLatestDate) {
  const auto older = make_trial("NCT1", Phase::PhaseI, "2018-01-01");
  auto newer = make_trial("NCT1", Phase::PhaseII, "2021-01-01");
  std::istringstream in(serialize_trial(newer) + "\n" + serialize_trial(older) + "\n");
  const auto res = parse_trial_records(in);
  ASSERT_EQ(res.records.size(), 1u);
  EXPECT_EQ(res.records[0].phase, Phase::PhaseII);
  ASSERT_EQ(res.errors.size(), 1u);
  EXPECT_EQ(res.errors[0].kind, ParseError::Kind::DuplicateId);
  EXPECT_EQ(res.errors[0].id, "NCT1");
}

TEST(TrialParsing, DuplicateWithEqualDateKeepsFirst) {
  auto a = make_trial("NCT1", Phase::PhaseI, "2020-01-01");
  auto b = make_trial("NCT1", Phase::PhaseIII, "2020-01-01");
  std::istringstream in(serialize_trial(a) + "\n" + serialize_trial(b) + "\n");
  const auto res = parse_trial_records(in);
  ASSERT_EQ(res.records.size(), 1u);
  EXPECT_EQ(res.records[0].phase, Phase::PhaseI);
}

TEST(TrialParsing, MetaLineIsSkipped) {
  std::istringstream in("{\"_meta\":{\"tool\":\"ctp\"}}\n" +
                        serialize_trial(make_trial("NCT1", Phase::PhaseI, "2020-01-01")) + "\n");
  const auto res = parse_trial_records(in);
  EXPECT_EQ(res.records.size(), 1u);
  EXPECT_TRUE(res.errors.empty());
}

TEST(TrackerParsing, SortsAndDeduplicatesNctIds) {
  const auto r = parse_tracker_line(
      R"({"drug_indication_id":"D1","nct_ids":["NCT3","NCT1","NCT3"],"ultimate_phase":"Approved"})");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->nct_ids, (std::vector<std::string>{"NCT1", "NCT3"}));
  EXPECT_EQ(r->ultimate_phase, Phase::Approved);
  EXPECT_EQ(parse_tracker_line(serialize_tracker(*r)), r);
}

TEST(TrackerParsing, RejectsBadPhase) {
  std::string why;
  EXPECT_FALSE(parse_tracker_line(R"({"drug_indication_id":"D1","nct_ids":[],"ultimate_phase":"V"})",
                                  &why));
  EXPECT_FALSE(why.empty());
}

TEST(Date, ParsesAndOrders) {
  const auto a = Date::parse("2020-02-29");
  ASSERT_TRUE(a);
  EXPECT_EQ(a->to_string(), "2020-02-29");
  EXPECT_FALSE(Date::parse("2021-02-29"));
  EXPECT_FALSE(Date::parse("2021-13-01"));
  EXPECT_EQ(Date::parse("2021-03-01T10:00:00Z"), Date::make(2021, 3, 1));
  EXPECT_LT(*Date::make(2020, 12, 31), *Date::make(2021, 1, 1));
  EXPECT_EQ(Date::make(1970, 1, 1)->days_since_epoch(), 0);
  EXPECT_EQ(Date::from_days_since_epoch(a->days_since_epoch()), *a);
}

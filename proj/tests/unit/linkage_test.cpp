#include <gtest/gtest.h>

#include <sstream>

#include "ctp/error.hpp"
#include "ctp/io.hpp"
#include "ctp/linkage.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace ctp;
using testing_support::make_trial;

namespace {

RecruitmentStatus status_of(oracle::Status s) {
  switch (s) {
    case oracle::Status::Completed: return RecruitmentStatus::completed();
    case oracle::Status::Terminated: return RecruitmentStatus::terminated();
    case oracle::Status::Recruiting: return RecruitmentStatus::parse("Recruiting");
  }
  return {};
}

DrugProgressRecord tracker(const std::string& di, std::vector<std::string> ncts, Phase ultimate) {
  return {di, std::move(ncts), ultimate};
}

}  // namespace

TEST(AssignLabel, MatchesHandWrittenTruthTable) {
  for (const auto& row : oracle::label_truth_table()) {
    auto t = make_trial("NCT1", row.phase, "2020-01-01");
    t.status = status_of(row.status);
    const auto p = tracker("D1", {"NCT1"}, row.ultimate);
    const auto got = assign_label(t, &p);
    ASSERT_EQ(got.has_value(), row.value.has_value())
        << phase_token(row.phase) << " vs " << phase_token(row.ultimate);
    if (got) {
      EXPECT_EQ(got->value, *row.value);
      EXPECT_EQ(got->rule, *row.rule);
    }
  }
}

TEST(AssignLabel, TerminatedWithoutTrackerIsStillNo) {
  auto t = make_trial("NCT1", Phase::PhaseII, "2020-01-01");
  t.status = RecruitmentStatus::terminated();
  t.termination_reason = "Lack of efficacy";
  const auto l = assign_label(t, nullptr);
  ASSERT_TRUE(l);
  EXPECT_EQ(l->value, LabelValue::No);
  EXPECT_EQ(l->rule, Rule::Rule3_Terminated);
  EXPECT_EQ(l->reason, "Lack of efficacy");
}

TEST(AssignLabel, UnlinkedCompletedTrialIsUnlabeled) {
  EXPECT_FALSE(assign_label(make_trial("NCT1", Phase::PhaseII, "2020-01-01"), nullptr));
}

TEST(Link, PrefersNctThenFallsBackToDrugIndication) {
  std::vector<TrialRecord> trials = {make_trial("NCT1", Phase::PhaseII, "2020-01-01", "D2"),
                                     make_trial("NCT2", Phase::PhaseII, "2020-01-01", "D2"),
                                     make_trial("NCT3", Phase::PhaseII, "2020-01-01", "D9")};
  std::vector<DrugProgressRecord> t = {tracker("D1", {"NCT1"}, Phase::PhaseIII),
                                       tracker("D2", {}, Phase::PhaseII)};
  const auto links = link(trials, t);
  ASSERT_EQ(links.size(), 2u);
  EXPECT_EQ(links.at("NCT1").progress.drug_indication_id, "D1");
  EXPECT_EQ(links.at("NCT1").path, LinkPath::NctId);
  EXPECT_EQ(links.at("NCT2").progress.drug_indication_id, "D2");
  EXPECT_EQ(links.at("NCT2").path, LinkPath::DrugIndicationId);
  EXPECT_FALSE(links.count("NCT3"));
}

TEST(Link, TwoRecordsClaimingOneTrialIsAmbiguous) {
  std::vector<TrialRecord> trials = {make_trial("NCT1", Phase::PhaseII, "2020-01-01")};
  std::vector<DrugProgressRecord> t = {tracker("D1", {"NCT1"}, Phase::PhaseIII),
                                       tracker("D2", {"NCT1"}, Phase::PhaseII)};
  EXPECT_THROW(link(trials, t), AmbiguousLink);
}

TEST(LabelCorpus, RulesFixtureMatchesExpectedFile) {
  std::istringstream ti(testing_support::slurp(testing_support::fixture("rules_trials.jsonl")));
  std::istringstream ri(testing_support::slurp(testing_support::fixture("rules_tracker.jsonl")));
  const auto trials = parse_trial_records(ti);
  const auto trk = parse_drug_tracker(ri);
  ASSERT_TRUE(trials.errors.empty());
  ASSERT_TRUE(trk.errors.empty());
  const auto corpus = label_corpus(trials.records, trk.records);

  std::ostringstream out;
  io::write_labeled_corpus(out, corpus);
  EXPECT_EQ(out.str(), testing_support::slurp(testing_support::fixture("rules_labeled.expected.jsonl")));

  const auto& s = corpus.link_stats;
  EXPECT_EQ(s.usable, 4u);
  EXPECT_EQ(s.linked_by_nct, 2u);
  EXPECT_EQ(s.linked_by_drug_indication, 1u);
  EXPECT_EQ(s.unlinked, 1u);
  EXPECT_EQ(s.rule1 + s.rule2 + s.rule3, 3u);
}

TEST(LabelCorpus, LowQualityIsCountedAndDropped) {
  auto bad = make_trial("NCT2", Phase::PhaseII, "2020-01-01");
  bad.attributes.brief.clear();
  std::vector<TrialRecord> trials = {make_trial("NCT1", Phase::PhaseII, "2020-01-01"), bad};
  std::vector<DrugProgressRecord> t = {tracker("D1", {"NCT1", "NCT2"}, Phase::PhaseIII)};
  const auto c = label_corpus(trials, t);
  EXPECT_EQ(c.link_stats.low_quality, 1u);
  EXPECT_EQ(c.link_stats.usable, 1u);
  ASSERT_EQ(c.entries.size(), 1u);
  EXPECT_EQ(c.entries[0].trial.nct_id, "NCT1");
  EXPECT_TRUE(c.unlabeled.empty());
}

TEST(LabelCorpus, PhaseAboveUltimateIsCounted) {
  std::vector<TrialRecord> trials = {make_trial("NCT1", Phase::PhaseIII, "2020-01-01")};
  std::vector<DrugProgressRecord> t = {tracker("D1", {"NCT1"}, Phase::PhaseII)};
  const auto c = label_corpus(trials, t);
  EXPECT_TRUE(c.entries.empty());
  EXPECT_EQ(c.unlabeled.size(), 1u);
  EXPECT_EQ(c.link_stats.phase_inconsistent, 1u);
}

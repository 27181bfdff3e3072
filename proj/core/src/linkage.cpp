#include "ctp/linkage.hpp"

#include <algorithm>

#include "ctp/error.hpp"
#include "ctp/log.hpp"

namespace ctp {

std::string_view label_token(LabelValue v) noexcept { return v == LabelValue::Yes ? "Yes" : "No"; }

std::optional<LabelValue> parse_label_value(std::string_view s) {
  if (s == "Yes") return LabelValue::Yes;
  if (s == "No") return LabelValue::No;
  return std::nullopt;
}

std::string_view rule_token(Rule r) noexcept {
  switch (r) {
    case Rule::Rule1_Succeeded: return "Rule1_Succeeded";
    case Rule::Rule2_AtUltimatePhase: return "Rule2_AtUltimatePhase";
    case Rule::Rule3_Terminated: return "Rule3_Terminated";
  }
  return "";
}

std::optional<Rule> parse_rule(std::string_view s) {
  for (auto r : {Rule::Rule1_Succeeded, Rule::Rule2_AtUltimatePhase, Rule::Rule3_Terminated}) {
    if (rule_token(r) == s) return r;
  }
  return std::nullopt;
}

std::map<std::string, Link> link(std::span<const TrialRecord> trials,
                                 std::span<const DrugProgressRecord> tracker) {
  std::map<std::string_view, const DrugProgressRecord*> by_nct;
  std::map<std::string_view, const DrugProgressRecord*> by_di;
  for (const auto& rec : tracker) {
    for (const auto& nct : rec.nct_ids) {
      auto [it, inserted] = by_nct.emplace(nct, &rec);
      if (!inserted && it->second->drug_indication_id != rec.drug_indication_id) {
        throw AmbiguousLink(nct + " is claimed by " + it->second->drug_indication_id + " and " +
                            rec.drug_indication_id);
      }
    }
    by_di.emplace(rec.drug_indication_id, &rec);
  }

  std::map<std::string, Link> out;
  for (const auto& t : trials) {
    if (auto it = by_nct.find(t.nct_id); it != by_nct.end()) {
      out.emplace(t.nct_id, Link{*it->second, LinkPath::NctId});
    } else if (t.drug_indication_id) {
      if (auto jt = by_di.find(*t.drug_indication_id); jt != by_di.end()) {
        out.emplace(t.nct_id, Link{*jt->second, LinkPath::DrugIndicationId});
      }
    }
  }
  return out;
}

std::optional<Label> assign_label(const TrialRecord& trial, const DrugProgressRecord* progress) {
  if (trial.status && trial.status->is_terminated()) {
    return Label{LabelValue::No, Rule::Rule3_Terminated, trial.termination_reason};
  }
  if (!progress || !trial.phase) return std::nullopt;
  const Phase phase = *trial.phase;
  if (phase < progress->ultimate_phase) {
    return Label{LabelValue::Yes, Rule::Rule1_Succeeded, std::nullopt};
  }
  if (phase == progress->ultimate_phase) {
    return Label{LabelValue::No, Rule::Rule2_AtUltimatePhase, std::nullopt};
  }
  log::debug("trial " + trial.nct_id + " is in " + std::string(phase_name(phase)) +
             " but " + progress->drug_indication_id + " only reached " +
             std::string(phase_name(progress->ultimate_phase)));
  return std::nullopt;
}

LabeledCorpus label_corpus(std::span<const TrialRecord> trials,
                           std::span<const DrugProgressRecord> tracker) {
  LabeledCorpus corpus;
  auto& stats = corpus.link_stats;

  std::vector<TrialRecord> usable;
  for (const auto& t : trials) {
    if (validate_record(t).usable()) {
      usable.push_back(t);
    } else {
      ++stats.low_quality;
    }
  }
  stats.usable = usable.size();

  const auto links = link(usable, tracker);
  for (auto& t : usable) {
    const DrugProgressRecord* progress = nullptr;
    if (auto it = links.find(t.nct_id); it != links.end()) {
      progress = &it->second.progress;
      ++(it->second.path == LinkPath::NctId ? stats.linked_by_nct
                                            : stats.linked_by_drug_indication);
    } else {
      ++stats.unlinked;
    }

    auto label = assign_label(t, progress);
    if (!label) {
      if (progress && !t.status->is_terminated()) ++stats.phase_inconsistent;
      corpus.unlabeled.push_back(std::move(t));
      continue;
    }
    switch (label->rule) {
      case Rule::Rule1_Succeeded: ++stats.rule1; break;
      case Rule::Rule2_AtUltimatePhase: ++stats.rule2; break;
      case Rule::Rule3_Terminated: ++stats.rule3; break;
    }
    corpus.entries.push_back({std::move(t), std::move(*label)});
  }

  if (stats.phase_inconsistent > 0) {
    log::warn(std::to_string(stats.phase_inconsistent) +
              " linked trial(s) sit beyond their drug-indication's ultimate phase; left unlabeled");
  }

  std::sort(corpus.entries.begin(), corpus.entries.end(),
            [](const auto& a, const auto& b) { return a.trial.nct_id < b.trial.nct_id; });
  std::sort(corpus.unlabeled.begin(), corpus.unlabeled.end(),
            [](const auto& a, const auto& b) { return a.nct_id < b.nct_id; });
  return corpus;
}

}  // namespace ctp

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ctp/registry.hpp"

namespace ctp {

enum class LabelValue { No = 0, Yes = 1 };

/// Which labeling rule produced a label.
///  Rule1_Succeeded:       drug-indication reached a later phase than the trial.
///  Rule2_AtUltimatePhase: the trial sits at the drug-indication's ultimate phase.
///  Rule3_Terminated:      the trial was terminated; overrides the tracker.
enum class Rule { Rule1_Succeeded, Rule2_AtUltimatePhase, Rule3_Terminated };

std::string_view label_token(LabelValue v) noexcept;  // "Yes" / "No"
std::optional<LabelValue> parse_label_value(std::string_view s);
std::string_view rule_token(Rule r) noexcept;
std::optional<Rule> parse_rule(std::string_view s);

struct Label {
  LabelValue value = LabelValue::No;
  Rule rule = Rule::Rule2_AtUltimatePhase;
  /// Termination reason, carried for terminated trials only.
  std::optional<std::string> reason;

  friend bool operator==(const Label&, const Label&) = default;
};

struct LabeledTrial {
  TrialRecord trial;
  Label label;
};

enum class LinkPath { NctId, DrugIndicationId };

struct Link {
  DrugProgressRecord progress;
  LinkPath path = LinkPath::NctId;
};

struct LinkStats {
  std::size_t usable = 0;
  std::size_t low_quality = 0;
  std::size_t linked_by_nct = 0;
  std::size_t linked_by_drug_indication = 0;
  std::size_t unlinked = 0;
  std::size_t rule1 = 0;
  std::size_t rule2 = 0;
  std::size_t rule3 = 0;
  /// Linked, not terminated, but trial phase above the tracker's ultimate phase.
  std::size_t phase_inconsistent = 0;

  friend bool operator==(const LinkStats&, const LinkStats&) = default;
};

struct LabeledCorpus {
  std::vector<LabeledTrial> entries;     // sorted by nct_id
  std::vector<TrialRecord> unlabeled;    // sorted by nct_id
  LinkStats link_stats;
};

/// Maps nct_id to its tracker record. A trial links to a tracker record if
/// the record lists its nct_id, otherwise through a matching
/// drug_indication_id. Throws AmbiguousLink when two tracker records list the
/// same nct_id.
std::map<std::string, Link> link(std::span<const TrialRecord> trials,
                                 std::span<const DrugProgressRecord> tracker);

/// Applies the rules in precedence order: terminated -> No/Rule3; trial phase
/// below the ultimate phase -> Yes/Rule1; equal -> No/Rule2; otherwise no label.
/// `trial` must carry phase and status (i.e. be Usable).
std::optional<Label> assign_label(const TrialRecord& trial,
                                  const DrugProgressRecord* progress);

inline std::optional<Label> assign_label(const TrialRecord& trial,
                                         const std::optional<DrugProgressRecord>& progress) {
  return assign_label(trial, progress ? &*progress : nullptr);
}

/// Validates, links and labels. LowQuality trials are counted and dropped;
/// every Usable trial lands in exactly one of entries / unlabeled.
LabeledCorpus label_corpus(std::span<const TrialRecord> trials,
                           std::span<const DrugProgressRecord> tracker);

}  // namespace ctp

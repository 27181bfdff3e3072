#pragma once

// Seeded generator for registry + tracker corpora whose rule-derived labels
// are known by construction. Used by tests, benchmarks and demos.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ctp/date.hpp"
#include "ctp/linkage.hpp"
#include "ctp/registry.hpp"

namespace ctp {

struct PlantedSignal {
  Attribute attribute = Attribute::Criteria;
  std::string token = "ZETAFAIL";
  /// Probability that a trial of `label_class` carries the token.
  double strength = 0.9;
  LabelValue label_class = LabelValue::No;
};

struct SyntheticSpec {
  std::size_t n_trials = 1000;
  /// Weights for Phase I / II / III. Must sum to 1.
  std::array<double, 3> phase_mix = {0.25, 0.45, 0.30};
  /// Share of Yes among labeled trials.
  double yes_fraction = 0.5;
  /// Among No labels, the share produced by termination rather than by
  /// sitting at the ultimate phase.
  double terminated_fraction = 0.3;
  /// Usable trials that deliberately end up without a label.
  double unlabeled_fraction = 0.0;
  /// Trials with a blank required field.
  double low_quality_fraction = 0.0;
  /// Linked trials that are found only through drug_indication_id.
  double fallback_link_fraction = 0.2;
  std::optional<PlantedSignal> signal;
  std::uint64_t seed = 0;
  Date first_date = *Date::make(2010, 1, 1);
  Date last_date = *Date::make(2023, 12, 31);
};

struct SyntheticCorpus {
  std::vector<TrialRecord> trials;          // sorted by nct_id
  std::vector<DrugProgressRecord> tracker;  // sorted by drug_indication_id
};

/// Throws InvalidSpec describing the first violated constraint.
void validate_spec(const SyntheticSpec& spec);

/// Labeled counts are exact: round(labeled * yes_fraction) Yes trials, where
/// labeled = n - round(n * low_quality) - round(n * unlabeled). Phase, date
/// and every attribute except a planted signal are drawn independently of the
/// label. Throws InvalidSpec.
SyntheticCorpus generate_synthetic(const SyntheticSpec& spec);

/// Canonical one-line form, used for config digests.
std::string describe_spec(const SyntheticSpec& spec);

}  // namespace ctp

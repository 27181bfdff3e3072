#include "ctp/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <span>
#include <sstream>

#include "ctp/error.hpp"
#include "ctp/rng.hpp"
#include "ctp/text.hpp"

namespace ctp {

namespace {

// Vocabulary pools. Attribute text is assembled from these so that every
// attribute is label-independent unless a signal is planted.

constexpr std::array kDrugStems = {"zor", "vel", "tam", "ribo", "lunu", "cari", "dex",
                                   "oma", "pexi", "sura", "nivo", "tira", "belo", "quin"};
constexpr std::array kDrugSuffixes = {"tinib", "mab", "parib", "stat", "lisib", "cept",
                                      "vir", "zumab", "ciclib", "dronate"};
constexpr std::array kIndications = {
    "Non-Small Cell Lung Cancer", "Type 2 Diabetes Mellitus", "Rheumatoid Arthritis",
    "Chronic Kidney Disease",     "Major Depressive Disorder", "Plaque Psoriasis",
    "Heart Failure",              "Multiple Myeloma",          "Alzheimer Disease",
    "Ulcerative Colitis",         "Hepatitis B",               "Migraine"};
constexpr std::array kTargets = {"EGFR", "PD-1", "TNF-alpha", "GLP-1 receptor", "PARP",
                                 "JAK1", "CGRP", "IL-17A",    "SGLT2",          "CD38",
                                 "BACE1", "HBV polymerase"};
constexpr std::array kSponsors = {"Aldermoor Pharma", "Brightwell Biosciences", "Caldera Therapeutics",
                                  "Dunmore Labs",     "Eastgate Medical",       "Fenwick Oncology",
                                  "Greystone Bio",    "Harlow University Hospital"};
constexpr std::array kBriefOpeners = {
    "This study evaluates", "The purpose of this trial is to assess",
    "This randomized study compares", "This open-label study investigates"};
constexpr std::array kBriefTopics = {"safety and tolerability", "efficacy", "pharmacokinetics",
                                     "dose response", "long-term safety"};
constexpr std::array kInclusion = {
    "adults aged 18 to 75 years", "confirmed diagnosis by standard criteria",
    "adequate organ function", "ECOG performance status 0 or 1",
    "stable background therapy for 3 months", "measurable disease at baseline"};
constexpr std::array kExclusion = {
    "pregnancy or breastfeeding", "prior exposure to the study drug",
    "active infection requiring treatment", "severe hepatic impairment",
    "participation in another trial within 30 days", "uncontrolled hypertension"};
constexpr std::array kPrimaryOutcomes = {
    "Change from baseline in disease activity score at week 12",
    "Overall response rate at week 24", "Incidence of treatment-emergent adverse events",
    "Progression-free survival", "Change in HbA1c at week 26",
    "Maximum tolerated dose"};
constexpr std::array kSecondaryOutcomes = {
    "Overall survival", "Time to response", "Plasma concentration of study drug",
    "Quality of life questionnaire score", "Duration of response", "Rate of hospitalization"};
constexpr std::array kTerminationReasons = {
    "Sponsor decision", "Lack of efficacy at interim analysis", "Slow enrollment",
    "Safety concerns", "Business reasons", "Futility"};

template <typename Pool>
std::string pick(Rng& rng, const Pool& pool) {
  return std::string(pool[rng.uniform_index(pool.size())]);
}

// k distinct entries of `pool`, in pool order.
template <typename Pool>
std::vector<std::string> pick_distinct(Rng& rng, const Pool& pool, std::size_t k) {
  std::vector<std::size_t> idx(pool.size());
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = 0; i < k; ++i) {
    std::swap(idx[i], idx[i + rng.uniform_index(idx.size() - i)]);
  }
  std::sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
  std::vector<std::string> out;
  for (std::size_t i = 0; i < k; ++i) out.emplace_back(pool[idx[i]]);
  return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += sep;
    out += parts[i];
  }
  return out;
}

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.uniform_index(i)]);
}

std::size_t round_count(std::size_t n, double fraction) {
  return static_cast<std::size_t>(std::llround(static_cast<double>(n) * fraction));
}

// Inserts `token` as a separate word at a uniformly chosen word boundary.
void insert_token(std::string& field, const std::string& token, Rng& rng) {
  std::vector<std::string> words;
  for (auto w : text::split(field, ' ')) {
    if (!w.empty()) words.emplace_back(w);
  }
  const std::size_t at = rng.uniform_index(words.size() + 1);
  words.insert(words.begin() + static_cast<std::ptrdiff_t>(at), token);
  field = join(words, " ");
}

enum class Role { Yes, AtUltimate, Terminated, Unlabeled, LowQuality };

AttributeSet make_attributes(Rng& rng, Phase phase) {
  AttributeSet a;
  const std::string drug = pick(rng, kDrugStems) + pick(rng, kDrugStems) + pick(rng, kDrugSuffixes);
  const std::string indication = pick(rng, kIndications);
  a.name = "A " + std::string(phase_name(phase)) + " Study of " + drug + " in " + indication;
  a.brief = pick(rng, kBriefOpeners) + " the " + pick(rng, kBriefTopics) + " of " + drug +
            " in patients with " + indication + ".";
  a.drug_used = drug;
  a.drug_class = kAllDrugClasses[rng.uniform_index(kAllDrugClasses.size())];
  a.indication = indication;
  a.target = pick(rng, kTargets);
  a.therapy = rng.bernoulli(0.5) ? "Monotherapy" : "Combination with standard of care";
  a.lead_sponsor = pick(rng, kSponsors);
  a.criteria = "Inclusion: " + join(pick_distinct(rng, kInclusion, 1), ", ") +
               ". Exclusion: " + join(pick_distinct(rng, kExclusion, 1), ", ") + ".";
  a.primary_outcome = pick(rng, kPrimaryOutcomes);
  a.secondary_outcome = join(pick_distinct(rng, kSecondaryOutcomes, 2), "; ");
  return a;
}

Phase draw_phase(Rng& rng, const std::array<double, 3>& mix) {
  const double u = rng.uniform01();
  if (u < mix[0]) return Phase::PhaseI;
  if (u < mix[0] + mix[1]) return Phase::PhaseII;
  return Phase::PhaseIII;
}

// Ultimate phase for a trial in `phase` that should get role `role`, or
// nullopt for a trial left without any tracker record.
std::optional<Phase> ultimate_for(Role role, Phase phase, Rng& rng) {
  const int p = static_cast<int>(phase);
  switch (role) {
    case Role::Yes: {
      const int hi = static_cast<int>(Phase::Approved);
      return static_cast<Phase>(p + 1 + static_cast<int>(rng.uniform_index(static_cast<std::size_t>(hi - p))));
    }
    case Role::AtUltimate:
      return phase;
    case Role::Terminated:
    case Role::LowQuality: {
      // Any ultimate phase at or above the trial's own; termination wins.
      const int hi = static_cast<int>(Phase::Approved);
      return static_cast<Phase>(p + static_cast<int>(rng.uniform_index(static_cast<std::size_t>(hi - p + 1))));
    }
    case Role::Unlabeled:
      // Phase-inconsistent when possible, unlinked otherwise.
      if (phase != Phase::PhaseI && rng.bernoulli(0.5)) {
        return static_cast<Phase>(1 + static_cast<int>(rng.uniform_index(static_cast<std::size_t>(p - 1))));
      }
      return std::nullopt;
  }
  return std::nullopt;
}

std::string fmt_id(const char* prefix, std::size_t width, std::size_t value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, static_cast<int>(width), value);
  return buf;
}

}  // namespace

void validate_spec(const SyntheticSpec& spec) {
  auto fraction = [](double x, const char* name) {
    if (!(x >= 0.0 && x <= 1.0)) {
      throw InvalidSpec(std::string(name) + " must lie in [0, 1]");
    }
  };
  if (spec.n_trials == 0) throw InvalidSpec("n_trials must be at least 1");
  for (double w : spec.phase_mix) {
    if (!(w >= 0.0)) throw InvalidSpec("phase_mix weights must be non-negative");
  }
  if (std::abs(spec.phase_mix[0] + spec.phase_mix[1] + spec.phase_mix[2] - 1.0) > 1e-9) {
    throw InvalidSpec("phase_mix must sum to 1");
  }
  fraction(spec.yes_fraction, "yes_fraction");
  fraction(spec.terminated_fraction, "terminated_fraction");
  fraction(spec.unlabeled_fraction, "unlabeled_fraction");
  fraction(spec.low_quality_fraction, "low_quality_fraction");
  fraction(spec.fallback_link_fraction, "fallback_link_fraction");
  if (spec.unlabeled_fraction + spec.low_quality_fraction > 1.0) {
    throw InvalidSpec("unlabeled_fraction + low_quality_fraction exceeds 1");
  }
  if (spec.first_date > spec.last_date) throw InvalidSpec("first_date is after last_date");
  if (spec.signal) {
    const auto& s = *spec.signal;
    fraction(s.strength, "signal strength");
    if (s.attribute == Attribute::DrugClass) {
      throw InvalidSpec("a signal cannot be planted in drug_class, which is not free text");
    }
    if (s.token.empty() || s.token.find_first_of(" \t\r\n") != std::string::npos) {
      throw InvalidSpec("signal token must be a single non-empty word");
    }
  }
}

SyntheticCorpus generate_synthetic(const SyntheticSpec& spec) {
  validate_spec(spec);
  const std::size_t n = spec.n_trials;

  // Exact role counts, then a seeded shuffle decides which trial gets which.
  const std::size_t n_low = round_count(n, spec.low_quality_fraction);
  const std::size_t n_unlabeled = std::min(n - n_low, round_count(n, spec.unlabeled_fraction));
  const std::size_t n_labeled = n - n_low - n_unlabeled;
  const std::size_t n_yes = round_count(n_labeled, spec.yes_fraction);
  const std::size_t n_no = n_labeled - n_yes;
  const std::size_t n_terminated = round_count(n_no, spec.terminated_fraction);

  std::vector<Role> roles;
  roles.reserve(n);
  roles.insert(roles.end(), n_yes, Role::Yes);
  roles.insert(roles.end(), n_no - n_terminated, Role::AtUltimate);
  roles.insert(roles.end(), n_terminated, Role::Terminated);
  roles.insert(roles.end(), n_unlabeled, Role::Unlabeled);
  roles.insert(roles.end(), n_low, Role::LowQuality);

  Rng role_rng(derive_seed(spec.seed, 0));
  shuffle(roles, role_rng);

  Rng rng(derive_seed(spec.seed, 1));
  Rng signal_rng(derive_seed(spec.seed, 2));
  const long day0 = spec.first_date.days_since_epoch();
  const auto span_days = static_cast<std::size_t>(spec.last_date.days_since_epoch() - day0 + 1);

  SyntheticCorpus out;
  out.trials.reserve(n);
  std::vector<std::optional<Phase>> ultimates;
  ultimates.reserve(n);

  for (std::size_t i = 0; i < n; ++i) {
    const Role role = roles[i];
    TrialRecord t;
    t.nct_id = fmt_id("NCT", 8, 10000000 + i);
    const Phase phase = draw_phase(rng, spec.phase_mix);
    t.phase = phase;
    t.last_modified = Date::from_days_since_epoch(day0 + static_cast<long>(rng.uniform_index(span_days)));
    t.attributes = make_attributes(rng, phase);
    if (role == Role::Terminated) {
      t.status = RecruitmentStatus::terminated();
      t.termination_reason = pick(rng, kTerminationReasons);
    } else {
      t.status = RecruitmentStatus::completed();
    }
    if (role == Role::LowQuality) {
      (rng.bernoulli(0.5) ? t.attributes.brief : t.attributes.criteria).clear();
    }

    const bool is_yes = role == Role::Yes;
    const bool is_no = role == Role::AtUltimate || role == Role::Terminated;
    if (spec.signal && ((is_yes && spec.signal->label_class == LabelValue::Yes) ||
                        (is_no && spec.signal->label_class == LabelValue::No))) {
      if (signal_rng.bernoulli(spec.signal->strength)) {
        insert_token(t.attributes.text_ref(spec.signal->attribute), spec.signal->token, signal_rng);
      }
    }

    ultimates.push_back(ultimate_for(role, phase, rng));
    out.trials.push_back(std::move(t));
  }

  // Group linked trials that share an ultimate phase into drug-indication
  // records of one to three trials each.
  std::map<Phase, std::vector<std::size_t>> by_ultimate;
  for (std::size_t i = 0; i < n; ++i) {
    if (ultimates[i]) by_ultimate[*ultimates[i]].push_back(i);
  }
  std::size_t next_di = 1;
  for (auto& [ultimate, members] : by_ultimate) {
    shuffle(members, rng);
    for (std::size_t pos = 0; pos < members.size();) {
      const std::size_t size = std::min(members.size() - pos, 1 + rng.uniform_index(3));
      DrugProgressRecord rec;
      rec.drug_indication_id = fmt_id("DI", 6, next_di++);
      rec.ultimate_phase = ultimate;
      for (std::size_t k = 0; k < size; ++k) {
        auto& trial = out.trials[members[pos + k]];
        // The first member is always listed so the record is never empty.
        const bool fallback = k > 0 && rng.bernoulli(spec.fallback_link_fraction);
        if (fallback) {
          trial.drug_indication_id = rec.drug_indication_id;
        } else {
          rec.nct_ids.push_back(trial.nct_id);
          if (rng.bernoulli(0.5)) trial.drug_indication_id = rec.drug_indication_id;
        }
      }
      std::sort(rec.nct_ids.begin(), rec.nct_ids.end());
      out.tracker.push_back(std::move(rec));
      pos += size;
    }
  }
  std::sort(out.tracker.begin(), out.tracker.end(),
            [](const auto& a, const auto& b) { return a.drug_indication_id < b.drug_indication_id; });
  return out;
}

std::string describe_spec(const SyntheticSpec& spec) {
  std::ostringstream os;
  os.precision(17);
  os << "n_trials=" << spec.n_trials << ";phase_mix=" << spec.phase_mix[0] << ','
     << spec.phase_mix[1] << ',' << spec.phase_mix[2] << ";yes_fraction=" << spec.yes_fraction
     << ";terminated_fraction=" << spec.terminated_fraction
     << ";unlabeled_fraction=" << spec.unlabeled_fraction
     << ";low_quality_fraction=" << spec.low_quality_fraction
     << ";fallback_link_fraction=" << spec.fallback_link_fraction << ";seed=" << spec.seed
     << ";dates=" << spec.first_date.to_string() << ".." << spec.last_date.to_string();
  if (spec.signal) {
    os << ";signal=" << attribute_key(spec.signal->attribute) << ',' << spec.signal->token << ','
       << spec.signal->strength << ',' << label_token(spec.signal->label_class);
  }
  return os.str();
}

}  // namespace ctp

#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "ctp/forest.hpp"
#include "ctp/linkage.hpp"
#include "ctp/llm.hpp"
#include "ctp/registry.hpp"

namespace ctp::eval {

/// Positive class is Yes. Predictions that could not be parsed are counted
/// as skipped and kept out of every metric denominator.
struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;
  std::size_t skipped = 0;

  std::size_t evaluated() const noexcept { return tp + fp + tn + fn; }
  std::size_t total() const noexcept { return evaluated() + skipped; }

  ConfusionMatrix& operator+=(const ConfusionMatrix& o) noexcept;
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

/// Throws LengthMismatch.
ConfusionMatrix confusion(std::span<const std::optional<LabelValue>> preds,
                          std::span<const LabelValue> golds);

struct Metrics {
  double accuracy = 0.0;
  double f1_positive = 0.0;
  double f1_macro = 0.0;  // mean of the Yes and No F1; an undefined F1 counts as 0
};

/// Throws EmptyEvaluation when nothing was evaluated.
Metrics metrics(const ConfusionMatrix& cm);

struct BucketReport {
  ConfusionMatrix confusion;
  Metrics metrics;
};

struct EvalReport {
  ConfusionMatrix confusion;
  Metrics overall;
  /// Only phases with at least one evaluated example appear.
  std::map<Phase, BucketReport> per_phase;
};

/// Throws LengthMismatch or EmptyEvaluation.
EvalReport per_phase_report(std::span<const std::optional<LabelValue>> preds,
                            std::span<const LabelValue> golds, std::span<const Phase> phases);

void write_report_csv(std::ostream& out, const EvalReport& r);
void write_report_table(std::ostream& out, const EvalReport& r);

// ---------------------------------------------------------------------------
// Drop-feature importance
// ---------------------------------------------------------------------------

struct AttributeImportance {
  Attribute attribute;
  double f1 = 0.0;     // score with the attribute removed
  double delta = 0.0;  // baseline - f1; negative when removal helps
};

struct FeatureImportanceReport {
  double baseline_f1 = 0.0;
  std::vector<AttributeImportance> per_attribute;  // 11 rows, delta descending
};

/// Trains on the first dataset and returns f1_positive on the second.
using TrainEval = std::function<double(const rf::Dataset& train, const rf::Dataset& test)>;

/// Random-forest TrainEval with fixed params (and therefore fixed seeds).
TrainEval forest_train_eval(rf::ForestParams params, std::size_t threads = 0);

/// Copy of `data` with the h-wide block of attribute `index` removed.
rf::Dataset drop_block(const rf::Dataset& data, std::size_t index);

/// Baseline on full vectors, then one retrain per attribute with its block
/// dropped from both splits. Ties in delta keep attribute order.
FeatureImportanceReport drop_feature_importance(const TrainEval& train_eval,
                                                const rf::Dataset& train,
                                                const rf::Dataset& test);

/// Chat-model variant: re-prompts with one attribute's value blanked out of
/// the description instead of retraining. Skipped replies are excluded.
FeatureImportanceReport field_omission_importance(llm::ChatService& service,
                                                  const std::string& model_id,
                                                  std::span<const LabeledTrial> test,
                                                  std::size_t budget, std::size_t max_parallel = 4);

void write_importance_csv(std::ostream& out, const FeatureImportanceReport& r);
void write_importance_table(std::ostream& out, const FeatureImportanceReport& r);

// ---------------------------------------------------------------------------
// Corpus statistics
// ---------------------------------------------------------------------------

struct OutcomeCounts {
  std::size_t yes = 0;
  std::size_t no = 0;
  std::size_t unlabeled = 0;

  std::size_t labeled() const noexcept { return yes + no; }
  /// Fractions of labeled entries; both 0 when nothing is labeled.
  double pass_ratio() const noexcept;
  double fail_ratio() const noexcept;

  friend bool operator==(const OutcomeCounts&, const OutcomeCounts&) = default;
};

struct CorpusStats {
  std::map<Phase, OutcomeCounts> per_phase;          // all three trial phases present
  std::map<DrugClass, OutcomeCounts> per_drug_class;  // all six classes present
  std::map<std::pair<DrugClass, Phase>, std::size_t> class_by_phase;
};

CorpusStats corpus_stats(const LabeledCorpus& corpus);

/// "phase,yes,no,unlabeled,pass_ratio,fail_ratio"
void write_phase_csv(std::ostream& out, const CorpusStats& s);
/// "drug_class,yes,no,unlabeled,pass_ratio,fail_ratio"
void write_drug_class_csv(std::ostream& out, const CorpusStats& s);
/// "drug_class,phase,trials"
void write_class_phase_csv(std::ostream& out, const CorpusStats& s);

}  // namespace ctp::eval

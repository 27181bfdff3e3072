#include "ctp/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <iomanip>

#include "ctp/corpus.hpp"
#include "ctp/embed.hpp"
#include "ctp/error.hpp"

namespace ctp::eval {

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& o) noexcept {
  tp += o.tp;
  fp += o.fp;
  tn += o.tn;
  fn += o.fn;
  skipped += o.skipped;
  return *this;
}

namespace {

void tally(ConfusionMatrix& cm, const std::optional<LabelValue>& pred, LabelValue gold) {
  if (!pred) {
    ++cm.skipped;
  } else if (*pred == LabelValue::Yes) {
    ++(gold == LabelValue::Yes ? cm.tp : cm.fp);
  } else {
    ++(gold == LabelValue::No ? cm.tn : cm.fn);
  }
}

double f1(std::size_t hits, std::size_t false_pos, std::size_t false_neg) {
  const std::size_t denom = 2 * hits + false_pos + false_neg;
  return denom == 0 ? 0.0 : 2.0 * static_cast<double>(hits) / static_cast<double>(denom);
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

}  // namespace

ConfusionMatrix confusion(std::span<const std::optional<LabelValue>> preds,
                          std::span<const LabelValue> golds) {
  if (preds.size() != golds.size()) {
    throw LengthMismatch(std::to_string(preds.size()) + " predictions vs " +
                         std::to_string(golds.size()) + " gold labels");
  }
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < preds.size(); ++i) tally(cm, preds[i], golds[i]);
  return cm;
}

Metrics metrics(const ConfusionMatrix& cm) {
  const std::size_t n = cm.evaluated();
  if (n == 0) throw EmptyEvaluation("no evaluated predictions (" + std::to_string(cm.skipped) + " skipped)");
  Metrics m;
  m.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(n);
  m.f1_positive = f1(cm.tp, cm.fp, cm.fn);
  m.f1_macro = 0.5 * (m.f1_positive + f1(cm.tn, cm.fn, cm.fp));
  return m;
}

EvalReport per_phase_report(std::span<const std::optional<LabelValue>> preds,
                            std::span<const LabelValue> golds, std::span<const Phase> phases) {
  if (preds.size() != golds.size() || preds.size() != phases.size()) {
    throw LengthMismatch(std::to_string(preds.size()) + " predictions, " +
                         std::to_string(golds.size()) + " gold labels, " +
                         std::to_string(phases.size()) + " phases");
  }
  EvalReport r;
  std::map<Phase, ConfusionMatrix> buckets;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    tally(r.confusion, preds[i], golds[i]);
    tally(buckets[phases[i]], preds[i], golds[i]);
  }
  r.overall = metrics(r.confusion);
  for (const auto& [phase, cm] : buckets) {
    if (cm.evaluated() > 0) r.per_phase.emplace(phase, BucketReport{cm, metrics(cm)});
  }
  return r;
}

void write_report_csv(std::ostream& out, const EvalReport& r) {
  out << "scope,n,skipped,tp,fp,tn,fn,accuracy,f1_positive,f1_macro\n";
  auto row = [&](std::string_view scope, const ConfusionMatrix& cm, const Metrics& m) {
    out << scope << ',' << cm.evaluated() << ',' << cm.skipped << ',' << cm.tp << ',' << cm.fp
        << ',' << cm.tn << ',' << cm.fn << ',' << fmt(m.accuracy) << ',' << fmt(m.f1_positive)
        << ',' << fmt(m.f1_macro) << '\n';
  };
  row("overall", r.confusion, r.overall);
  for (const auto& [phase, b] : r.per_phase) {
    row(phase_name(phase), b.confusion, b.metrics);
  }
}

void write_report_table(std::ostream& out, const EvalReport& r) {
  out << std::left << std::setw(12) << "scope" << std::right << std::setw(7) << "n"
      << std::setw(9) << "skipped" << std::setw(11) << "accuracy" << std::setw(8) << "F1"
      << std::setw(10) << "macro-F1" << '\n';
  auto row = [&](std::string_view scope, const ConfusionMatrix& cm, const Metrics& m) {
    out << std::left << std::setw(12) << scope << std::right << std::setw(7) << cm.evaluated()
        << std::setw(9) << cm.skipped << std::fixed << std::setprecision(3) << std::setw(11)
        << m.accuracy << std::setw(8) << m.f1_positive << std::setw(10) << m.f1_macro << '\n';
  };
  row("overall", r.confusion, r.overall);
  for (const auto& [phase, b] : r.per_phase) row(phase_name(phase), b.confusion, b.metrics);
  out << std::defaultfloat;
}

// ---------------------------------------------------------------------------
// Drop-feature importance
// ---------------------------------------------------------------------------

TrainEval forest_train_eval(rf::ForestParams params, std::size_t threads) {
  return [params, threads](const rf::Dataset& train, const rf::Dataset& test) {
    const auto forest = rf::train(train, params, threads);
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < test.size(); ++i) {
      const auto p = forest.predict(test.row(i));
      tally(cm, p.label == 1 ? LabelValue::Yes : LabelValue::No,
            test.label(i) == 1 ? LabelValue::Yes : LabelValue::No);
    }
    return metrics(cm).f1_positive;
  };
}

rf::Dataset drop_block(const rf::Dataset& data, std::size_t index) {
  rf::Dataset out;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto row = drop_attribute(data.row(i), index);
    out.add(row, data.label(i));
  }
  return out;
}

namespace {

FeatureImportanceReport rank(double baseline, const std::array<double, kAttributeCount>& scores) {
  FeatureImportanceReport rep;
  rep.baseline_f1 = baseline;
  for (auto a : kAttributes) {
    const double f = scores[index_of(a)];
    rep.per_attribute.push_back({a, f, baseline - f});
  }
  std::stable_sort(rep.per_attribute.begin(), rep.per_attribute.end(),
                   [](const auto& x, const auto& y) { return x.delta > y.delta; });
  return rep;
}

}  // namespace

FeatureImportanceReport drop_feature_importance(const TrainEval& train_eval,
                                                const rf::Dataset& train,
                                                const rf::Dataset& test) {
  if (train.dim() != test.dim()) {
    throw DimensionMismatch("train and test feature dimensions differ");
  }
  const double baseline = train_eval(train, test);
  std::array<double, kAttributeCount> scores{};
  for (std::size_t j = 0; j < kAttributeCount; ++j) {
    scores[j] = train_eval(drop_block(train, j), drop_block(test, j));
  }
  return rank(baseline, scores);
}

FeatureImportanceReport field_omission_importance(llm::ChatService& service,
                                                  const std::string& model_id,
                                                  std::span<const LabeledTrial> test,
                                                  std::size_t budget, std::size_t max_parallel) {
  std::vector<LabelValue> golds;
  for (const auto& e : test) golds.push_back(e.label.value);

  auto score = [&](std::optional<Attribute> omit) {
    std::vector<TrialDescription> descs;
    descs.reserve(test.size());
    for (const auto& e : test) descs.push_back(synthesize_description(e.trial, budget, omit));
    const auto replies = llm::predict_many(service, model_id, descs, max_parallel);
    std::vector<std::optional<LabelValue>> preds;
    for (const auto& r : replies) preds.push_back(r.parsed);
    return metrics(confusion(preds, golds)).f1_positive;
  };

  const double baseline = score(std::nullopt);
  std::array<double, kAttributeCount> scores{};
  for (auto a : kAttributes) scores[index_of(a)] = score(a);
  return rank(baseline, scores);
}

void write_importance_csv(std::ostream& out, const FeatureImportanceReport& r) {
  out << "rank,attribute,f1_without,delta_f1,baseline_f1\n";
  for (std::size_t i = 0; i < r.per_attribute.size(); ++i) {
    const auto& a = r.per_attribute[i];
    out << i + 1 << ',' << attribute_key(a.attribute) << ',' << fmt(a.f1) << ',' << fmt(a.delta)
        << ',' << fmt(r.baseline_f1) << '\n';
  }
}

void write_importance_table(std::ostream& out, const FeatureImportanceReport& r) {
  out << "baseline F1 " << fmt(r.baseline_f1) << '\n';
  for (std::size_t i = 0; i < r.per_attribute.size(); ++i) {
    const auto& a = r.per_attribute[i];
    out << std::right << std::setw(3) << i + 1 << "  " << std::left << std::setw(18)
        << attribute_label(a.attribute) << std::right << std::showpos << std::fixed
        << std::setprecision(4) << a.delta << std::noshowpos << std::defaultfloat << '\n';
  }
}

// ---------------------------------------------------------------------------
// Corpus statistics
// ---------------------------------------------------------------------------

double OutcomeCounts::pass_ratio() const noexcept {
  return labeled() == 0 ? 0.0 : static_cast<double>(yes) / static_cast<double>(labeled());
}

double OutcomeCounts::fail_ratio() const noexcept {
  return labeled() == 0 ? 0.0 : static_cast<double>(no) / static_cast<double>(labeled());
}

CorpusStats corpus_stats(const LabeledCorpus& corpus) {
  CorpusStats s;
  for (auto p : kTrialPhases) s.per_phase[p] = {};
  for (auto c : kAllDrugClasses) s.per_drug_class[c] = {};

  for (const auto& e : corpus.entries) {
    const bool yes = e.label.value == LabelValue::Yes;
    const auto cls = e.trial.attributes.drug_class;
    if (e.trial.phase) {
      ++(yes ? s.per_phase[*e.trial.phase].yes : s.per_phase[*e.trial.phase].no);
      ++s.class_by_phase[{cls, *e.trial.phase}];
    }
    ++(yes ? s.per_drug_class[cls].yes : s.per_drug_class[cls].no);
  }
  for (const auto& t : corpus.unlabeled) {
    const auto cls = t.attributes.drug_class;
    if (t.phase) {
      ++s.per_phase[*t.phase].unlabeled;
      ++s.class_by_phase[{cls, *t.phase}];
    }
    ++s.per_drug_class[cls].unlabeled;
  }
  return s;
}

namespace {

void counts_row(std::ostream& out, std::string_view key, const OutcomeCounts& c) {
  out << key << ',' << c.yes << ',' << c.no << ',' << c.unlabeled << ',' << fmt(c.pass_ratio())
      << ',' << fmt(c.fail_ratio()) << '\n';
}

}  // namespace

void write_phase_csv(std::ostream& out, const CorpusStats& s) {
  out << "phase,yes,no,unlabeled,pass_ratio,fail_ratio\n";
  for (const auto& [p, c] : s.per_phase) counts_row(out, phase_token(p), c);
}

void write_drug_class_csv(std::ostream& out, const CorpusStats& s) {
  out << "drug_class,yes,no,unlabeled,pass_ratio,fail_ratio\n";
  for (const auto& [cls, c] : s.per_drug_class) counts_row(out, drug_class_token(cls), c);
}

void write_class_phase_csv(std::ostream& out, const CorpusStats& s) {
  out << "drug_class,phase,trials\n";
  for (auto cls : kAllDrugClasses) {
    for (auto p : kTrialPhases) {
      auto it = s.class_by_phase.find({cls, p});
      out << drug_class_token(cls) << ',' << phase_token(p) << ','
          << (it == s.class_by_phase.end() ? 0 : it->second) << '\n';
    }
  }
}

}  // namespace ctp::eval

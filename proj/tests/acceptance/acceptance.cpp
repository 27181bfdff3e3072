// Acceptance gate. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails. The pipeline criteria drive the real
// command-line entry point in-process, so they cover the same code path as
// the ctp binary.

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "ctp/cli.hpp"
#include "ctp/corpus.hpp"
#include "ctp/forest.hpp"
#include "ctp/io.hpp"
#include "ctp/linkage.hpp"
#include "ctp/llm.hpp"
#include "ctp/rng.hpp"
#include "ctp/synthetic.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace ctp;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int digits = 3) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

class Workdir {
 public:
  Workdir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("ctp-acceptance-" + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~Workdir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

// Runs one ctp command; throws with its diagnostics on a non-zero exit.
std::string ctp_run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (code != 0) {
    throw std::runtime_error("ctp " + args.front() + " exited " + std::to_string(code) + ": " + err.str());
  }
  return out.str();
}

// Parses a CSV written by the tool (skipping '#' provenance lines) into rows
// keyed by the first column.
std::map<std::string, std::vector<std::string>> read_csv(const std::string& path,
                                                         std::vector<std::string>* header = nullptr) {
  std::ifstream in(path);
  std::string line;
  std::map<std::string, std::vector<std::string>> rows;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    if (first) {
      if (header) *header = cells;
      first = false;
      continue;
    }
    rows[cells.at(0)] = cells;
  }
  return rows;
}

std::size_t column(const std::vector<std::string>& header, const std::string& name) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw std::runtime_error("missing CSV column " + name);
  return static_cast<std::size_t>(it - header.begin());
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Criteria --------------------------------------------------------------------

Outcome labeling_truth_table() {
  const auto t0 = Clock::now();
  std::size_t agree = 0;
  const auto& table = oracle::label_truth_table();
  for (const auto& row : table) {
    TrialRecord t;
    t.nct_id = "NCT1";
    t.phase = row.phase;
    t.status = row.status == oracle::Status::Completed    ? RecruitmentStatus::completed()
               : row.status == oracle::Status::Terminated ? RecruitmentStatus::terminated()
                                                          : RecruitmentStatus::parse("Recruiting");
    const DrugProgressRecord p{"D1", {"NCT1"}, row.ultimate};
    const auto got = assign_label(t, &p);
    const bool same = got ? (row.value && got->value == *row.value && got->rule == *row.rule) : !row.value;
    agree += same;
  }
  const double secs = seconds_since(t0);
  return {agree == table.size() && secs < 1.0,
          std::to_string(agree) + "/" + std::to_string(table.size()) + " cases agree, " + fmt(secs) + " s"};
}

Outcome gini_suite() {
  const auto t0 = Clock::now();
  bool ok = std::abs(rf::gini(5, 5) - 0.5) <= 1e-12 && std::abs(rf::gini(10, 0) - 0.0) <= 1e-12 &&
            std::abs(rf::gini(1, 3) - 0.375) <= 1e-12;
  Rng rng(20240601);
  std::size_t failures = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t a = rng.uniform_index(1000);
    const std::size_t b = rng.uniform_index(1000) + (a == 0);
    const double g = rf::gini(a, b);
    const bool good = g >= 0.0 && g <= 0.5 && std::abs(g - rf::gini(b, a)) <= 1e-12 &&
                      std::abs(g - oracle::gini_fraction(a, b).value()) <= 1e-12 &&
                      ((a == 0 || b == 0) == (g == 0.0));
    failures += !good;
  }
  const double secs = seconds_since(t0);
  return {ok && failures == 0 && secs < 1.0,
          std::string("fixed cases ") + (ok ? "exact" : "WRONG") + ", " + std::to_string(failures) +
              "/1000 property failures, " + fmt(secs) + " s"};
}

Outcome root_split_oracle() {
  const auto t0 = Clock::now();
  Rng rng(7);
  std::size_t mismatches = 0;
  for (int d = 0; d < 200; ++d) {
    const std::size_t n = 1 + rng.uniform_index(8);
    const std::size_t p = 1 + rng.uniform_index(3);
    rf::Dataset data(p);
    std::vector<std::vector<double>> xs;
    std::vector<int> ys;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> x(p);
      for (auto& v : x) v = static_cast<double>(rng.uniform_index(5)) * 0.5;
      const int y = static_cast<int>(rng.uniform_index(2));
      data.add(x, y);
      xs.push_back(x);
      ys.push_back(y);
    }
    std::vector<std::size_t> rows(n);
    for (std::size_t i = 0; i < n; ++i) rows[i] = i;
    rf::ForestParams params;
    params.feature_subset_size = p;
    Rng tree_rng(static_cast<std::uint64_t>(d));
    const auto tree = rf::grow_tree(data, rows, params.resolved(n, p), tree_rng);
    const auto& root = tree.nodes().front();
    const auto brute = oracle::best_split_bruteforce(xs, ys);
    const bool pure = std::all_of(ys.begin(), ys.end(), [&](int y) { return y == ys[0]; });

    if (pure || !brute) {
      mismatches += !root.is_leaf();
      continue;
    }
    if (root.is_leaf()) {
      ++mismatches;
      continue;
    }
    std::uint64_t l0 = 0, l1 = 0, r0 = 0, r1 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool left = xs[i][static_cast<std::size_t>(root.feature)] <= root.threshold;
      (left ? (ys[i] ? l1 : l0) : (ys[i] ? r1 : r0))++;
    }
    const double nn = static_cast<double>(n);
    const double g = static_cast<double>(l0 + l1) / nn * oracle::gini_fraction(l0, l1).value() +
                     static_cast<double>(r0 + r1) / nn * oracle::gini_fraction(r0, r1).value();
    mismatches += std::abs(g - brute->weighted_gini) > 1e-12;
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && secs < 10.0,
          std::to_string(200 - mismatches) + "/200 roots at the exhaustive minimum, " + fmt(secs) + " s"};
}

Outcome vote_oracle() {
  Rng rng(11);
  rf::Dataset data(5);
  for (int i = 0; i < 120; ++i) {
    std::vector<double> x(5);
    for (auto& v : x) v = rng.uniform01();
    data.add(x, x[0] + 0.3 * rng.uniform01() > 0.6);
  }
  rf::ForestParams params;
  params.trees = 40;  // even, so ties are possible
  params.seed = 3;
  params.max_depth = 2;
  const auto forest = rf::train(data, params);
  // Four trees fitted to coin-flip labels disagree often, so ties are
  // common and both tie settings get exercised.
  rf::Dataset noise(5);
  for (int i = 0; i < 60; ++i) {
    std::vector<double> x(5);
    for (auto& v : x) v = rng.uniform01();
    noise.add(x, rng.bernoulli(0.5));
  }
  rf::ForestParams small = params;
  small.trees = 4;
  const auto four = rf::train(noise, small).trees();
  rf::ForestParams tie_pos = params;
  tie_pos.trees = 4;
  tie_pos.tie_to_positive = true;
  rf::ForestParams tie_neg = tie_pos;
  tie_neg.tie_to_positive = false;
  const std::vector<rf::Forest> forests = {forest, rf::Forest(tie_neg, 5, four), rf::Forest(tie_pos, 5, four)};

  std::size_t agree = 0, ties = 0, checks = 0;
  for (int i = 0; i < 100; ++i) {
    std::vector<double> x(5);
    for (auto& v : x) v = rng.uniform01();
    for (const auto& f : forests) {
      const auto got = f.predict(x);
      const auto want = oracle::recount_votes(f, x);
      ++checks;
      agree += got.label == want.label && got.votes == want.votes_for_one &&
               got.vote_fraction == static_cast<double>(want.votes_for_one) / static_cast<double>(want.trees);
      ties += 2 * want.votes_for_one == want.trees;
    }
  }
  return {agree == checks, std::to_string(agree) + "/" + std::to_string(checks) +
                               " predictions on 100 inputs match the recount (" + std::to_string(ties) +
                               " ties)"};
}

struct PipelineRun {
  std::string labeled, features, train, test;
};

// gen-synthetic -> label -> synthesize -> embed -> split -> train-rf ->
// predict-rf -> evaluate, all through the command-line entry point.
Outcome planted_signal_pipeline(const Workdir& w, PipelineRun& run) {
  const auto t0 = Clock::now();
  const std::string seed = "7";
  ctp_run({"gen-synthetic", "--n", "2000", "--seed", seed, "--signal-attribute", "criteria",
           "--signal-strength", "0.9", "--out-dir", w / "syn"});
  run.labeled = w / "labeled.jsonl";
  ctp_run({"label", "--trials", w / "syn/trials.jsonl", "--tracker", w / "syn/tracker.jsonl", "--out",
           run.labeled});
  ctp_run({"synthesize", "--corpus", run.labeled, "--out", w / "descriptions.jsonl"});
  run.features = w / "features.ctpm";
  ctp_run({"embed", "--corpus", run.labeled, "--encoder", "hashing", "--dim", "64", "--out", run.features});
  ctp_run({"split", "--corpus", run.labeled, "--balance", "train", "--seed", seed, "--out-dir", w / "split"});
  run.train = w / "split/train.jsonl";
  run.test = w / "split/test.jsonl";
  ctp_run({"train-rf", "--features", run.features, "--corpus", run.train, "--trees", "100", "--seed", seed,
           "--out", w / "model.ctpf"});
  ctp_run({"predict-rf", "--model", w / "model.ctpf", "--features", run.features, "--corpus", run.test,
           "--out", w / "preds.jsonl"});
  ctp_run({"evaluate", "--predictions", w / "preds.jsonl", "--corpus", run.test, "--out", w / "report.csv"});
  const double secs = seconds_since(t0);

  std::vector<std::string> header;
  const auto rows = read_csv(w / "report.csv", &header);
  const double f1 = std::stod(rows.at("overall").at(column(header, "f1_positive")));
  return {f1 >= 0.90 && secs < 60.0, "test f1_positive " + fmt(f1) + " (n=" +
                                         rows.at("overall").at(column(header, "n")) + "), " + fmt(secs, 1) +
                                         " s"};
}

Outcome drop_feature_ranking(const Workdir& w, const PipelineRun& run) {
  auto once = [&](const std::string& out) {
    ctp_run({"feature-importance", "--method", "forest", "--train", run.train, "--test", run.test,
             "--features", run.features, "--trees", "100", "--seed", "7", "--out", out});
  };
  once(w / "importance_a.csv");
  once(w / "importance_b.csv");
  const bool same = slurp(w / "importance_a.csv") == slurp(w / "importance_b.csv");

  std::ifstream in(w / "importance_a.csv");
  std::string line;
  std::vector<std::string> header;
  std::vector<std::pair<std::string, double>> deltas;  // file order = rank order
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    if (header.empty()) {
      header = cells;
      continue;
    }
    if (cells.at(0) == "baseline") continue;
    deltas.emplace_back(cells.at(column(header, "attribute")), std::stod(cells.at(column(header, "delta_f1"))));
  }
  if (deltas.size() != 11) return {false, "expected 11 attribute rows, got " + std::to_string(deltas.size())};
  const auto& [top, top_delta] = deltas.front();
  double runner_up = -1.0;
  for (std::size_t i = 1; i < deltas.size(); ++i) runner_up = std::max(runner_up, deltas[i].second);
  const bool ok = top == "criteria" && top_delta >= 0.15 && runner_up < top_delta / 2 && same;
  return {ok, "rank 1 " + top + " delta " + fmt(top_delta) + ", largest other " + fmt(runner_up) +
                  (same ? ", identical reports across two runs" : ", REPORTS DIFFER")};
}

Outcome chronological_split_property() {
  const auto t0 = Clock::now();
  Rng rng(99);
  std::size_t failures = 0;
  for (int c = 0; c < 500; ++c) {
    const std::size_t n = 1 + rng.uniform_index(200);
    std::vector<LabeledTrial> corpus;
    for (std::size_t i = 0; i < n; ++i) {
      LabeledTrial e;
      e.trial.nct_id = "NCT" + std::to_string(rng.uniform_index(1000000));
      e.trial.phase = Phase::PhaseII;
      e.trial.last_modified = Date::from_days_since_epoch(15000 + static_cast<long>(rng.uniform_index(60)));
      e.label = {rng.bernoulli(0.5) ? LabelValue::Yes : LabelValue::No, Rule::Rule1_Succeeded, std::nullopt};
      corpus.push_back(std::move(e));
    }
    const double a = 0.5 + 0.3 * rng.uniform01();
    const double b = (1.0 - a) * rng.uniform01();
    const SplitRatios r{a, b, 1.0 - a - b};
    const auto s = chronological_split(corpus, r);

    auto max_date = [](const std::vector<LabeledTrial>& v) {
      Date d = *Date::make(1, 1, 1);
      for (const auto& e : v) d = std::max(d, *e.trial.last_modified);
      return d;
    };
    auto min_date = [](const std::vector<LabeledTrial>& v) {
      Date d = *Date::make(9999, 12, 31);
      for (const auto& e : v) d = std::min(d, *e.trial.last_modified);
      return d;
    };
    bool ok = s.train.size() + s.validation.size() + s.test.size() == n;
    if (!s.train.empty() && !s.validation.empty()) ok &= max_date(s.train) <= min_date(s.validation);
    if (!s.validation.empty() && !s.test.empty()) ok &= max_date(s.validation) <= min_date(s.test);
    if (!s.train.empty() && !s.test.empty()) ok &= max_date(s.train) <= min_date(s.test);
    const double nn = static_cast<double>(n);
    ok &= std::abs(static_cast<double>(s.train.size()) - r.train * nn) <= 1.0 + 1e-9;
    ok &= std::abs(static_cast<double>(s.validation.size()) - r.validation * nn) <= 1.0 + 1e-9;
    ok &= std::abs(static_cast<double>(s.test.size()) - r.test * nn) <= 1.0 + 1e-9;
    failures += !ok;
  }
  const double secs = seconds_since(t0);
  return {failures == 0 && secs < 5.0,
          std::to_string(500 - failures) + "/500 corpora ordered and sized, " + fmt(secs) + " s"};
}

Outcome export_round_trip(const Workdir& w) {
  // Typed in independently of the library constant.
  const std::string prompt =
      "You are a medical expert who specializes in analyzing clinical trials. Your role is to help the "
      "user predict whether a clinical trial will progress to the next phase.\n\nAnswer only with 'Yes' "
      "if it progresses to the next phase or 'No' if it doesn't.";
  SyntheticSpec spec;
  spec.n_trials = 1000;
  spec.seed = 21;
  spec.terminated_fraction = 0.5;
  const auto syn = generate_synthetic(spec);
  auto corpus = label_corpus(syn.trials, syn.tracker);
  // Give every terminated trial a reason so that reasoning answers occur.
  for (auto& e : corpus.entries)
    if (e.label.rule == Rule::Rule3_Terminated && !e.label.reason) e.label.reason = "Business decision";

  const auto examples = llm::build_reasoning_export(corpus);
  {
    std::ofstream out(w / "export.jsonl", std::ios::binary);
    llm::write_export(out, examples);
  }
  std::ifstream in(w / "export.jsonl", std::ios::binary);
  const auto back = llm::read_export(in);
  std::size_t system_ok = 0, label_ok = 0, reasons = 0;
  for (std::size_t i = 0; i < back.size() && i < corpus.entries.size(); ++i) {
    system_ok += back[i].system == prompt;
    const auto r = llm::normalize_reply(back[i].assistant);
    const auto& l = corpus.entries[i].label;
    bool ok = r.parsed == l.value;
    if (l.value == LabelValue::No && l.reason) {
      ok &= r.reason == l.reason;
      ++reasons;
    }
    label_ok += ok && back[i] == examples[i];
  }
  const bool ok = back.size() == 1000 && system_ok == 1000 && label_ok == 1000;
  return {ok, std::to_string(back.size()) + " examples re-parsed, system prompt exact in " +
                  std::to_string(system_ok) + ", labels recovered in " + std::to_string(label_ok) + " (" +
                  std::to_string(reasons) + " with reasons)"};
}

Outcome forest_persistence(const Workdir& w) {
  Rng rng(5);
  rf::Dataset data(6);
  for (int i = 0; i < 300; ++i) {
    std::vector<double> x(6);
    for (auto& v : x) v = rng.uniform01();
    data.add(x, x[1] * x[2] > 0.25);
  }
  rf::ForestParams params;
  params.trees = 50;
  params.seed = 17;
  auto forest = rf::train(data, params);
  forest.metadata = io::meta_json({"train-rf", 17, "acceptance"});
  rf::save(forest, w / "persist.ctpf");
  const auto loaded = rf::load(w / "persist.ctpf");
  std::size_t same = 0;
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> x(6);
    for (auto& v : x) v = rng.uniform01() * 1.2 - 0.1;
    const auto a = forest.predict(x);
    const auto b = loaded.predict(x);
    same += a.label == b.label && a.votes == b.votes && a.vote_fraction == b.vote_fraction;
  }
  return {same == 1000 && loaded == forest,
          std::to_string(same) + "/1000 predictions identical after reload"};
}

Outcome offline_llm(const Workdir& w) {
  const std::string fixtures = CTP_FIXTURE_DIR;
  ctp_run({"label", "--trials", fixtures + "/llm_trials.jsonl", "--tracker", fixtures + "/llm_tracker.jsonl",
           "--out", w / "llm_labeled.jsonl"});
  ctp_run({"llm-predict", "--corpus", w / "llm_labeled.jsonl", "--model", "ft:ctp-demo", "--replay",
           fixtures + "/llm_replay.jsonl", "--out", w / "llm_preds.jsonl"});
  ctp_run({"evaluate", "--predictions", w / "llm_preds.jsonl", "--corpus", w / "llm_labeled.jsonl", "--out",
           w / "llm_report.csv"});
  std::vector<std::string> header;
  const auto rows = read_csv(w / "llm_report.csv", &header);
  const auto& overall = rows.at("overall");
  const auto skipped = overall.at(column(header, "skipped"));
  return {skipped == "0", "replay stub, n=" + overall.at(column(header, "n")) + ", skipped " + skipped +
                              ", accuracy " + overall.at(column(header, "accuracy"))};
}

}  // namespace

int main() {
  Workdir w;
  PipelineRun run;
  bool pipeline_ok = false;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"labeling truth table", labeling_truth_table},
      {"gini unit suite", gini_suite},
      {"root-split oracle", root_split_oracle},
      {"vote aggregation oracle", vote_oracle},
      {"end-to-end planted signal",
       [&] {
         auto o = planted_signal_pipeline(w, run);
         pipeline_ok = true;
         return o;
       }},
      {"drop-feature ranking",
       [&] {
         if (!pipeline_ok) return Outcome{false, "pipeline outputs unavailable"};
         return drop_feature_ranking(w, run);
       }},
      {"chronological split property", chronological_split_property},
      {"fine-tune export round-trip", [&] { return export_round_trip(w); }},
      {"forest persistence", [&] { return forest_persistence(w); }},
      {"offline llm path", [&] { return offline_llm(w); }},
  };

  std::size_t failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << name << ": " << o.detail << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " acceptance criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}

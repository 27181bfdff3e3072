// gen-synthetic, ingest, label, synthesize, split and stats.

#include <fstream>

#include "command.hpp"
#include "ctp/corpus.hpp"
#include "ctp/error.hpp"
#include "ctp/eval.hpp"
#include "ctp/rng.hpp"
#include "ctp/synthetic.hpp"

namespace ctp::cli {

namespace {

namespace fs = std::filesystem;

Date parse_date_option(const std::string& text, const char* name) {
  auto d = Date::parse(text);
  if (!d) throw CLI::ValidationError(name, "not an ISO date: " + text);
  return *d;
}

void add_gen_synthetic(CLI::App& app, Commands& cmds) {
  struct Opts {
    SyntheticSpec spec;
    std::vector<double> phase_mix = {0.25, 0.45, 0.30};
    std::string signal_attribute;
    std::string signal_token = "ZETAFAIL";
    double signal_strength = 0.9;
    std::string signal_class = "No";
    std::string first_date = "2010-01-01";
    std::string last_date = "2023-12-31";
    fs::path out_dir;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("gen-synthetic", "Generate a seeded synthetic trials + tracker corpus");
  sub->add_option("--n", o->spec.n_trials, "Number of trials")->check(CLI::PositiveNumber);
  sub->add_option("--seed", o->spec.seed, "Generator seed");
  sub->add_option("--phase-mix", o->phase_mix, "Phase I,II,III weights")
      ->delimiter(',')
      ->expected(3);
  sub->add_option("--yes-fraction", o->spec.yes_fraction, "Share of Yes among labeled trials");
  sub->add_option("--terminated-fraction", o->spec.terminated_fraction,
                  "Share of No labels caused by termination");
  sub->add_option("--unlabeled-fraction", o->spec.unlabeled_fraction, "Usable trials left unlabeled");
  sub->add_option("--low-quality-fraction", o->spec.low_quality_fraction,
                  "Trials with a blank required field");
  sub->add_option("--fallback-link-fraction", o->spec.fallback_link_fraction,
                  "Linked trials reachable only through drug_indication_id");
  sub->add_option("--signal-attribute", o->signal_attribute, "Attribute key for a planted token (empty: none)");
  sub->add_option("--signal-token", o->signal_token, "Planted token");
  sub->add_option("--signal-strength", o->signal_strength, "Probability a trial of the class carries it");
  sub->add_option("--signal-class", o->signal_class, "Label class carrying the token")
      ->check(CLI::IsMember({"Yes", "No"}));
  sub->add_option("--first-date", o->first_date, "Earliest last_modified date");
  sub->add_option("--last-date", o->last_date, "Latest last_modified date");
  add_path(sub, "--out-dir", o->out_dir, "Directory for trials.jsonl and tracker.jsonl");

  cmds.push_back({sub, [o](Context& ctx) {
                    auto spec = o->spec;
                    std::copy(o->phase_mix.begin(), o->phase_mix.end(), spec.phase_mix.begin());
                    spec.first_date = parse_date_option(o->first_date, "--first-date");
                    spec.last_date = parse_date_option(o->last_date, "--last-date");
                    if (!o->signal_attribute.empty()) {
                      auto a = parse_attribute(o->signal_attribute);
                      if (!a) throw CLI::ValidationError("--signal-attribute", "unknown attribute " + o->signal_attribute);
                      spec.signal = PlantedSignal{*a, o->signal_token, o->signal_strength,
                                                  *parse_label_value(o->signal_class)};
                    }
                    const auto corpus = generate_synthetic(spec);
                    write_output(o->out_dir / "trials.jsonl", [&](std::ostream& out) {
                      io::write_trials(out, corpus.trials, &ctx.provenance);
                    });
                    write_output(o->out_dir / "tracker.jsonl", [&](std::ostream& out) {
                      io::write_tracker(out, corpus.tracker, &ctx.provenance);
                    });
                    ctx.out << "generated " << corpus.trials.size() << " trials, "
                            << corpus.tracker.size() << " tracker records\n";
                  },
                  &o->spec.seed});
}

void add_ingest(CLI::App& app, Commands& cmds) {
  struct Opts {
    fs::path trials, tracker, out_dir;
    bool strict = false;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("ingest", "Parse, validate and normalize registry and tracker files");
  add_path(sub, "--trials", o->trials, "Trial registry records");
  add_path(sub, "--tracker", o->tracker, "Drug-tracker records", false);
  add_path(sub, "--out-dir", o->out_dir, "Directory for normalized files and issues.csv");
  sub->add_flag("--strict", o->strict, "Fail when any line is rejected or any record is low quality");

  cmds.push_back({sub, [o](Context& ctx) {
    std::ifstream in(o->trials);
    if (!in) throw IoError("cannot open " + o->trials.string());
    const auto trials = parse_trial_records(in);
    std::optional<ParseResult<DrugProgressRecord>> tracker;
    if (!o->tracker.empty()) {
      std::ifstream tin(o->tracker);
      if (!tin) throw IoError("cannot open " + o->tracker.string());
      tracker = parse_drug_tracker(tin);
    }

    std::size_t low_quality = 0;
    std::size_t issues = 0;
    write_output(o->out_dir / "issues.csv", [&](std::ostream& out) {
      out << csv_header(ctx.provenance) << "source,line,id,kind,detail\n";
      auto quote = [](const std::string& s) {
        std::string q = "\"";
        for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
        return q + '"';
      };
      auto parse_rows = [&](const char* source, const std::vector<ParseError>& errors) {
        for (const auto& e : errors) {
          out << source << ',' << e.line << ',' << quote(e.id) << ','
              << (e.kind == ParseError::Kind::DuplicateId ? "duplicate" : "syntax") << ','
              << quote(e.reason) << '\n';
          ++issues;
        }
      };
      parse_rows("trials", trials.errors);
      if (tracker) parse_rows("tracker", tracker->errors);
      for (const auto& t : trials.records) {
        const auto report = validate_record(t);
        if (report.usable()) continue;
        ++low_quality;
        for (const auto& i : report.issues) {
          out << "trials,," << quote(t.nct_id) << ",low_quality," << quote(i.message) << '\n';
          ++issues;
        }
      }
    });
    write_output(o->out_dir / "trials.jsonl", [&](std::ostream& out) {
      io::write_trials(out, trials.records, &ctx.provenance);
    });
    if (tracker) {
      write_output(o->out_dir / "tracker.jsonl", [&](std::ostream& out) {
        io::write_tracker(out, tracker->records, &ctx.provenance);
      });
    }
    ctx.out << "trials: " << trials.records.size() << " parsed, " << trials.errors.size()
            << " rejected lines, " << low_quality << " low quality\n";
    if (tracker) {
      ctx.out << "tracker: " << tracker->records.size() << " parsed, " << tracker->errors.size()
              << " rejected lines\n";
    }
    if (o->strict && issues > 0) {
      throw InvalidArgument(std::to_string(issues) + " issue(s); see " +
                            (o->out_dir / "issues.csv").string());
    }
  }});
}

void add_label(CLI::App& app, Commands& cmds) {
  struct Opts {
    fs::path trials, tracker, out;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("label", "Link trials to the tracker and assign phase-transition labels");
  add_path(sub, "--trials", o->trials, "Trial registry records");
  add_path(sub, "--tracker", o->tracker, "Drug-tracker records");
  add_path(sub, "--out", o->out, "Labeled corpus output");

  cmds.push_back({sub, [o](Context& ctx) {
    const auto trials = load_trials(o->trials, ctx);
    const auto tracker = load_tracker(o->tracker, ctx);
    const auto corpus = label_corpus(trials, tracker);
    write_output(o->out, [&](std::ostream& out) {
      io::write_labeled_corpus(out, corpus, &ctx.provenance);
    });
    const auto& s = corpus.link_stats;
    ctx.out << "labeled " << corpus.entries.size() << " (Rule1 " << s.rule1 << ", Rule2 "
            << s.rule2 << ", Rule3 " << s.rule3 << "), unlabeled " << corpus.unlabeled.size()
            << ", low quality " << s.low_quality << "\n"
            << "linked by nct_id " << s.linked_by_nct << ", by drug_indication_id "
            << s.linked_by_drug_indication << ", unlinked " << s.unlinked << '\n';
  }});
}

void add_synthesize(CLI::App& app, Commands& cmds) {
  struct Opts {
    fs::path corpus, out;
    std::size_t budget = kDefaultCharBudget;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("synthesize", "Render trial descriptions from a labeled corpus");
  add_path(sub, "--corpus", o->corpus, "Labeled corpus");
  add_path(sub, "--out", o->out, "Descriptions output");
  sub->add_option("--budget", o->budget, "Character budget per description")->check(CLI::PositiveNumber);

  cmds.push_back({sub, [o](Context& ctx) {
    const auto corpus = load_corpus(o->corpus);
    std::size_t over = 0;
    write_output(o->out, [&](std::ostream& out) {
      io::write_descriptions(out, corpus, o->budget, &ctx.provenance);
    });
    for (const auto& e : corpus.entries) {
      if (synthesize_description(e.trial, o->budget).char_count > o->budget) ++over;
    }
    ctx.out << "wrote " << corpus.entries.size() + corpus.unlabeled.size() << " descriptions";
    if (over > 0) ctx.out << " (" << over << " still over budget after truncation)";
    ctx.out << '\n';
  }});
}

void add_split(CLI::App& app, Commands& cmds) {
  struct Opts {
    fs::path corpus, out_dir;
    std::vector<double> ratios = {0.65, 0.15, 0.20};
    std::string balance = "none";
    std::string phase;
    std::uint64_t seed = 0;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("split", "Chronological train/validation/test split of labeled trials");
  add_path(sub, "--corpus", o->corpus, "Labeled corpus");
  add_path(sub, "--out-dir", o->out_dir, "Directory for train.jsonl, validation.jsonl, test.jsonl");
  sub->add_option("--ratios", o->ratios, "Train,validation,test fractions")->delimiter(',')->expected(3);
  sub->add_option("--balance", o->balance, "Downsample the majority class in: none, train or all")
      ->check(CLI::IsMember({"none", "train", "all"}));
  sub->add_option("--phase", o->phase, "Keep only trials of this phase (I, II or III)");
  sub->add_option("--seed", o->seed, "Balancing seed");

  cmds.push_back({sub, [o](Context& ctx) {
                    const auto corpus = load_corpus(o->corpus);
                    std::vector<LabeledTrial> entries = corpus.entries;
                    if (!o->phase.empty()) {
                      auto p = parse_phase(o->phase);
                      if (!p || *p == Phase::Approved) throw CLI::ValidationError("--phase", "expected I, II or III");
                      entries = filter_phase(entries, *p);
                    }
                    auto split = chronological_split(entries, {o->ratios[0], o->ratios[1], o->ratios[2]});
                    if (o->balance != "none") {
                      split.train = balance(split.train, derive_seed(o->seed, 0));
                      if (o->balance == "all") {
                        split.validation = balance(split.validation, derive_seed(o->seed, 1));
                        split.test = balance(split.test, derive_seed(o->seed, 2));
                      }
                    }
                    const std::pair<const char*, const std::vector<LabeledTrial>*> parts[] = {
                        {"train", &split.train}, {"validation", &split.validation}, {"test", &split.test}};
                    for (const auto& [name, part] : parts) {
                      write_output(o->out_dir / (std::string(name) + ".jsonl"), [&](std::ostream& out) {
                        io::write_labeled_entries(out, *part, &ctx.provenance);
                      });
                      std::size_t yes = 0;
                      for (const auto& e : *part) yes += e.label.value == LabelValue::Yes;
                      ctx.out << name << ": " << part->size() << " (" << yes << " Yes, "
                              << part->size() - yes << " No)\n";
                    }
                    if (split.train_end) ctx.out << "train ends " << split.train_end->to_string() << '\n';
                    if (split.validation_end) {
                      ctx.out << "validation ends " << split.validation_end->to_string() << '\n';
                    }
                  },
                  &o->seed});
}

void add_stats(CLI::App& app, Commands& cmds) {
  struct Opts {
    fs::path corpus, out_dir;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("stats", "Per-phase and per-drug-class outcome statistics");
  add_path(sub, "--corpus", o->corpus, "Labeled corpus");
  add_path(sub, "--out-dir", o->out_dir, "Directory for phase.csv, drug_class.csv, class_phase.csv");

  cmds.push_back({sub, [o](Context& ctx) {
    const auto stats = eval::corpus_stats(load_corpus(o->corpus));
    write_output(o->out_dir / "phase.csv", [&](std::ostream& out) {
      out << csv_header(ctx.provenance);
      eval::write_phase_csv(out, stats);
    });
    write_output(o->out_dir / "drug_class.csv", [&](std::ostream& out) {
      out << csv_header(ctx.provenance);
      eval::write_drug_class_csv(out, stats);
    });
    write_output(o->out_dir / "class_phase.csv", [&](std::ostream& out) {
      out << csv_header(ctx.provenance);
      eval::write_class_phase_csv(out, stats);
    });
    eval::write_phase_csv(ctx.out, stats);
    ctx.out << '\n';
    eval::write_drug_class_csv(ctx.out, stats);
  }});
}

}  // namespace

void add_data_commands(CLI::App& app, Commands& cmds) {
  add_gen_synthetic(app, cmds);
  add_ingest(app, cmds);
  add_label(app, cmds);
  add_synthesize(app, cmds);
  add_split(app, cmds);
  add_stats(app, cmds);
}

}  // namespace ctp::cli

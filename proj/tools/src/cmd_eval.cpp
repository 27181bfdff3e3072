// evaluate and feature-importance.

#include <fstream>

#include "command.hpp"
#include "ctp/error.hpp"
#include "ctp/eval.hpp"
#include "forest_data.hpp"

namespace ctp::cli {

namespace {

namespace fs = std::filesystem;

void add_evaluate(CLI::App& app, Commands& cmds) {
  struct Opts {
    fs::path predictions, corpus, out;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("evaluate", "Score predictions against gold labels");
  add_path(sub, "--predictions", o->predictions, "Predictions file");
  add_path(sub, "--corpus", o->corpus, "Labeled corpus holding the gold labels, in prediction order");
  add_path(sub, "--out", o->out, "Report CSV", false);

  cmds.push_back({sub, [o](Context& ctx) {
    std::ifstream in(o->predictions);
    if (!in) throw IoError("cannot open " + o->predictions.string());
    const auto preds = io::read_predictions(in, o->predictions.string());
    const auto corpus = load_corpus(o->corpus);

    std::vector<std::optional<LabelValue>> predicted;
    std::vector<LabelValue> golds;
    std::vector<Phase> phases;
    for (const auto& p : preds) predicted.push_back(p.predicted);
    for (const auto& e : corpus.entries) {
      golds.push_back(e.label.value);
      phases.push_back(*e.trial.phase);
    }
    if (predicted.size() == golds.size()) {
      for (std::size_t i = 0; i < preds.size(); ++i) {
        if (preds[i].nct_id != corpus.entries[i].trial.nct_id) {
          throw InvalidArgument("prediction " + std::to_string(i + 1) + " is for " + preds[i].nct_id +
                                " but gold entry " + std::to_string(i + 1) + " is " +
                                corpus.entries[i].trial.nct_id);
        }
      }
    }
    const auto report = eval::per_phase_report(predicted, golds, phases);
    if (!o->out.empty()) {
      write_output(o->out, [&](std::ostream& out) {
        out << csv_header(ctx.provenance);
        eval::write_report_csv(out, report);
      });
    }
    eval::write_report_table(ctx.out, report);
  }});
}

void add_feature_importance(CLI::App& app, Commands& cmds) {
  struct Opts {
    std::string method = "forest";
    fs::path train, test, features, out;
    rf::ForestParams params;
    std::size_t threads = 0;
    std::string model;
    ServiceOptions service;
    std::size_t budget = kDefaultCharBudget;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("feature-importance",
                                 "Drop-feature analysis: score without each attribute in turn");
  sub->add_option("--method", o->method,
                  "forest: retrain without each attribute block; llm: re-prompt without each field")
      ->check(CLI::IsMember({"forest", "llm"}));
  add_path(sub, "--train", o->train, "Labeled training corpus (forest method)", false);
  add_path(sub, "--test", o->test, "Labeled test corpus");
  add_path(sub, "--features", o->features, "Feature matrix covering train and test (forest method)", false);
  add_path(sub, "--out", o->out, "Report CSV", false);
  add_forest_options(sub, o->params, o->threads);
  sub->add_option("--model", o->model, "Model id (llm method)");
  sub->add_option("--budget", o->budget, "Character budget per description (llm method)")
      ->check(CLI::PositiveNumber);
  add_service_options(sub, o->service);

  cmds.push_back({sub, [o](Context& ctx) {
                    const auto test = load_corpus(o->test);
                    eval::FeatureImportanceReport report;
                    if (o->method == "forest") {
                      if (o->train.empty() || o->features.empty()) {
                        throw CLI::ValidationError("--train/--features", "required with --method forest");
                      }
                      const auto m = load_matrix(o->features);
                      const auto train_data = join_features(m, load_corpus(o->train).entries);
                      const auto test_data = join_features(m, test.entries);
                      report = eval::drop_feature_importance(
                          eval::forest_train_eval(o->params, o->threads), train_data, test_data);
                    } else {
                      if (o->model.empty()) throw CLI::ValidationError("--model", "required with --method llm");
                      auto service = make_service(o->service, o->model);
                      report = eval::field_omission_importance(*service, o->model, test.entries,
                                                               o->budget, o->service.max_parallel);
                    }
                    if (!o->out.empty()) {
                      write_output(o->out, [&](std::ostream& out) {
                        out << csv_header(ctx.provenance);
                        eval::write_importance_csv(out, report);
                      });
                    }
                    eval::write_importance_table(ctx.out, report);
                  },
                  &o->params.seed});
}

}  // namespace

void add_eval_commands(CLI::App& app, Commands& cmds) {
  add_evaluate(app, cmds);
  add_feature_importance(app, cmds);
}

}  // namespace ctp::cli

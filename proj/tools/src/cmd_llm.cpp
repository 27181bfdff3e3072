// export-finetune, finetune and llm-predict.

#include "command.hpp"
#include "ctp/error.hpp"
#include "json.hpp"

namespace ctp::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string job_json(const llm::FineTuneJob& job) {
  ordered_json j;
  j["job_id"] = job.job_id;
  j["base_model_id"] = job.base_model_id;
  j["training_file_ref"] = job.training_file_ref;
  j["status"] = std::string(llm::status_token(job.status));
  j["fine_tuned_model"] = job.fine_tuned_model;
  j["failure_reason"] = job.failure_reason;
  return j.dump(2);
}

void add_export_finetune(CLI::App& app, Commands& cmds) {
  struct Opts {
    fs::path corpus, out;
    bool reasoning = false;
    std::size_t budget = kDefaultCharBudget;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("export-finetune", "Write chat-format fine-tuning examples");
  add_path(sub, "--corpus", o->corpus, "Labeled corpus");
  add_path(sub, "--out", o->out, "Export file; provenance goes to <out>.meta.json");
  sub->add_flag("--reasoning", o->reasoning, "Answer 'No. {reason}' for terminated trials");
  sub->add_option("--budget", o->budget, "Character budget per description")->check(CLI::PositiveNumber);

  cmds.push_back({sub, [o](Context& ctx) {
    const auto examples = llm::build_export(load_corpus(o->corpus), o->reasoning, o->budget);
    if (examples.empty()) throw EmptyCorpus("no labeled trials to export");
    write_output(o->out, [&](std::ostream& out) { llm::write_export(out, examples); });
    // The provider format allows nothing but examples, so provenance lives
    // beside the file.
    auto meta = ordered_json::parse(io::meta_json(ctx.provenance));
    meta["examples"] = examples.size();
    meta["reasoning"] = o->reasoning;
    meta["budget"] = o->budget;
    fs::path sidecar = o->out;
    sidecar += ".meta.json";
    write_output(sidecar, [&](std::ostream& out) { out << meta.dump(2) << '\n'; });
    ctx.out << "exported " << examples.size() << " examples\n";
  }});
}

void add_finetune(CLI::App& app, Commands& cmds) {
  struct Opts {
    fs::path export_file, out;
    std::string base_model;
    ServiceOptions service;
    std::size_t poll_ms = 30000;
    std::size_t max_polls = 480;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("finetune", "Upload an export, start a fine-tune job and wait for it");
  add_path(sub, "--export", o->export_file, "Export file from export-finetune");
  add_path(sub, "--out", o->out, "Job record output (JSON)", false);
  sub->add_option("--base-model", o->base_model, "Base model id")->required();
  sub->add_option("--poll-ms", o->poll_ms, "Polling interval");
  sub->add_option("--max-polls", o->max_polls, "Give up after this many polls");
  add_service_options(sub, o->service);

  cmds.push_back({sub, [o](Context& ctx) {
    auto service = make_service(o->service, o->base_model);
    const auto submitted = llm::submit_finetune(o->export_file, o->base_model, *service);
    ctx.out << "submitted job " << submitted.job_id << '\n';
    const auto job = llm::wait_for_job(*service, submitted, std::chrono::milliseconds(o->poll_ms),
                                       o->max_polls);
    if (!o->out.empty()) {
      auto meta = ordered_json::parse(io::meta_json(ctx.provenance));
      auto record = ordered_json::parse(job_json(job));
      record["_meta"] = meta;
      write_output(o->out, [&](std::ostream& out) { out << record.dump(2) << '\n'; });
    }
    ctx.out << "job " << job.job_id << ": " << llm::status_token(job.status);
    if (!job.fine_tuned_model.empty()) ctx.out << ", model " << job.fine_tuned_model;
    if (!job.failure_reason.empty()) ctx.out << ", " << job.failure_reason;
    ctx.out << '\n';
    if (job.status == llm::FineTuneJob::Status::Failed) {
      throw ServiceUnavailable("fine-tune job failed: " + job.failure_reason);
    }
    if (!job.finished()) throw ServiceUnavailable("job still " + std::string(llm::status_token(job.status)) +
                                                  " after " + std::to_string(o->max_polls) + " polls");
  }});
}

void add_llm_predict(CLI::App& app, Commands& cmds) {
  struct Opts {
    fs::path corpus, out;
    std::string model;
    ServiceOptions service;
    std::size_t budget = kDefaultCharBudget;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("llm-predict", "Ask a (fine-tuned) chat model for each labeled trial");
  add_path(sub, "--corpus", o->corpus, "Labeled corpus");
  add_path(sub, "--out", o->out, "Predictions output");
  sub->add_option("--model", o->model, "Model id to query")->required();
  sub->add_option("--budget", o->budget, "Character budget per description")->check(CLI::PositiveNumber);
  add_service_options(sub, o->service);

  cmds.push_back({sub, [o](Context& ctx) {
    const auto corpus = load_corpus(o->corpus);
    auto service = make_service(o->service, o->model);
    std::vector<TrialDescription> descs;
    for (const auto& e : corpus.entries) descs.push_back(synthesize_description(e.trial, o->budget));
    const auto replies = llm::predict_many(*service, o->model, descs, o->service.max_parallel);

    std::vector<io::PredictionRecord> preds;
    std::size_t unparsed = 0;
    for (std::size_t i = 0; i < replies.size(); ++i) {
      const auto& r = replies[i];
      preds.push_back({descs[i].source_nct_id, r.parsed, std::nullopt, r.raw_text, r.reason});
      unparsed += !r.parsed;
    }
    write_output(o->out, [&](std::ostream& out) { io::write_predictions(out, preds, &ctx.provenance); });
    ctx.out << "predicted " << preds.size() << " trials, " << unparsed << " unparseable replies\n";
  }});
}

}  // namespace

void add_llm_commands(CLI::App& app, Commands& cmds) {
  add_export_finetune(app, cmds);
  add_finetune(app, cmds);
  add_llm_predict(app, cmds);
}

}  // namespace ctp::cli

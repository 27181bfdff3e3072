#include <fstream>
#include <sstream>

#include "command.hpp"
#include "ctp/error.hpp"

namespace ctp::cli {

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

template <typename Record>
void report_parse_errors(const ParseResult<Record>& r, const std::filesystem::path& path,
                         Context& ctx) {
  for (const auto& e : r.errors) {
    ctx.err << "warning: " << path.string() << " line " << e.line << ": "
            << (e.kind == ParseError::Kind::DuplicateId ? "duplicate " + e.id + ": " : "")
            << e.reason << '\n';
  }
}

}  // namespace

CLI::Option* add_path(CLI::App* app, const std::string& name, std::filesystem::path& target,
                      const std::string& help, bool required) {
  auto* opt = app->add_option(name, target, help)->group(kFiles);
  if (required) opt->required();
  return opt;
}

std::vector<TrialRecord> load_trials(const std::filesystem::path& path, Context& ctx) {
  auto in = open_input(path);
  auto result = parse_trial_records(in);
  report_parse_errors(result, path, ctx);
  return std::move(result.records);
}

std::vector<DrugProgressRecord> load_tracker(const std::filesystem::path& path, Context& ctx) {
  auto in = open_input(path);
  auto result = parse_drug_tracker(in);
  report_parse_errors(result, path, ctx);
  return std::move(result.records);
}

LabeledCorpus load_corpus(const std::filesystem::path& path) {
  auto in = open_input(path);
  return io::read_labeled_corpus(in, path.string());
}

void write_output(const std::filesystem::path& path,
                  const std::function<void(std::ostream&)>& fill) {
  std::ostringstream buf;
  fill(buf);
  io::write_file(path, buf.str());
}

std::string csv_header(const io::Provenance& p) {
  return "# tool=ctp version=" CTP_VERSION " command=" + p.command +
         " seed=" + std::to_string(p.seed) + " config_digest=" + p.config_digest + '\n';
}

void add_encoder_options(CLI::App* app, EncoderOptions& o) {
  app->add_option("--encoder", o.kind, "hashing (offline) or remote")
      ->check(CLI::IsMember({"hashing", "remote"}));
  app->add_option("--dim", o.dim, "Per-attribute embedding dimension h")->check(CLI::PositiveNumber);
  app->add_option("--encoder-seed", o.seed, "Hash seed of the hashing encoder");
  app->add_option("--endpoint", o.endpoint, "Remote encoder URL");
  app->add_option("--encoder-model", o.model_id, "Remote encoder model id");
  app->add_option("--batch-size", o.batch_size, "Texts per remote request")->check(CLI::PositiveNumber);
  app->add_option("--encoder-parallel", o.max_parallel, "Concurrent remote requests")
      ->check(CLI::PositiveNumber);
  app->add_option("--encoder-retries", o.retries, "Retries per remote request");
}

std::unique_ptr<Encoder> make_encoder(const EncoderOptions& o) {
  if (o.kind == "hashing") return std::make_unique<HashingEncoder>(o.dim, o.seed);
  if (o.endpoint.empty()) throw CLI::ValidationError("--endpoint", "required with --encoder remote");
  RemoteEncoderConfig cfg;
  cfg.endpoint = o.endpoint;
  cfg.model_id = o.model_id;
  cfg.dim = o.dim;
  cfg.batch_size = o.batch_size;
  cfg.max_parallel = o.max_parallel;
  cfg.max_retries = o.retries;
  return std::make_unique<RemoteEncoder>(cfg);
}

void add_forest_options(CLI::App* app, rf::ForestParams& p, std::size_t& threads) {
  app->add_option("--trees", p.trees, "Number of trees B")->check(CLI::PositiveNumber);
  app->add_option("--seed", p.seed, "Forest seed");
  app->add_option("--bootstrap-size", p.bootstrap_size, "Rows per bootstrap sample (0: n)");
  app->add_option("--mtry", p.feature_subset_size, "Features tried per split (0: ceil(sqrt(dim)))");
  app->add_option("--max-depth", p.max_depth, "Depth limit (0: grow until pure)");
  app->add_option("--min-leaf", p.min_leaf, "Minimum rows per leaf")->check(CLI::PositiveNumber);
  app->add_flag("--tie-positive", p.tie_to_positive, "Break vote ties toward Yes");
  app->add_option("--threads", threads, "Worker threads (0: hardware concurrency)");
}

void add_service_options(CLI::App* app, ServiceOptions& o) {
  add_path(app, "--replay", o.replay, "Replay-stub fixture file (offline)", false);
  app->add_option("--base-url", o.base_url, "Chat service base URL; key from CTP_MODEL_API_KEY");
  app->add_option("--max-parallel", o.max_parallel, "Concurrent requests")->check(CLI::PositiveNumber);
  app->add_option("--timeout-ms", o.timeout_ms, "Per-request timeout");
  app->add_option("--retries", o.retries, "Retries per request");
}

std::unique_ptr<llm::ChatService> make_service(const ServiceOptions& o,
                                               const std::string& base_model_id) {
  if (!o.replay.empty()) {
    return std::make_unique<llm::ReplayStub>(llm::ReplayStub::from_file(o.replay));
  }
  if (o.base_url.empty()) {
    throw CLI::ValidationError("--replay/--base-url", "one of them is required");
  }
  auto cfg = llm::ServiceConfig::from_env(o.base_url, base_model_id);
  cfg.max_parallel = o.max_parallel;
  cfg.timeout = std::chrono::milliseconds(o.timeout_ms);
  cfg.max_retries = o.retries;
  return std::make_unique<llm::HttpChatService>(cfg);
}

}  // namespace ctp::cli

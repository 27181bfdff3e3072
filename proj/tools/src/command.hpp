#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ctp/embed.hpp"
#include "ctp/forest.hpp"
#include "ctp/io.hpp"
#include "ctp/linkage.hpp"
#include "ctp/llm.hpp"

namespace ctp::cli {

/// Option group for file paths. Options in this group are left out of the
/// config digest so that moving files around does not change it.
inline constexpr const char* kFiles = "Files";

struct Context {
  std::ostream& out;
  std::ostream& err;
  io::Provenance provenance;
};

struct Command {
  CLI::App* app = nullptr;
  std::function<void(Context&)> action;
  /// Seed echoed into output metadata; null for commands without one.
  const std::uint64_t* seed = nullptr;
};

using Commands = std::vector<Command>;

void add_data_commands(CLI::App& app, Commands& cmds);
void add_forest_commands(CLI::App& app, Commands& cmds);
void add_llm_commands(CLI::App& app, Commands& cmds);
void add_eval_commands(CLI::App& app, Commands& cmds);

// Shared helpers ------------------------------------------------------------

CLI::Option* add_path(CLI::App* app, const std::string& name, std::filesystem::path& target,
                      const std::string& help, bool required = true);

std::vector<TrialRecord> load_trials(const std::filesystem::path& path, Context& ctx);
std::vector<DrugProgressRecord> load_tracker(const std::filesystem::path& path, Context& ctx);
LabeledCorpus load_corpus(const std::filesystem::path& path);

/// Renders with `fill` and writes the result atomically.
void write_output(const std::filesystem::path& path, const std::function<void(std::ostream&)>& fill);

/// Comment line placed at the top of CSV outputs.
std::string csv_header(const io::Provenance& p);

struct EncoderOptions {
  std::string kind = "hashing";
  std::size_t dim = 768;
  std::uint64_t seed = 0;
  std::string endpoint;
  std::string model_id;
  std::size_t batch_size = 32;
  std::size_t max_parallel = 4;
  std::size_t retries = 3;
};

void add_encoder_options(CLI::App* app, EncoderOptions& o);
std::unique_ptr<Encoder> make_encoder(const EncoderOptions& o);

void add_forest_options(CLI::App* app, rf::ForestParams& p, std::size_t& threads);

struct ServiceOptions {
  std::filesystem::path replay;
  std::string base_url;
  std::size_t max_parallel = 4;
  std::size_t timeout_ms = 60000;
  std::size_t retries = 3;
};

void add_service_options(CLI::App* app, ServiceOptions& o);
std::unique_ptr<llm::ChatService> make_service(const ServiceOptions& o,
                                               const std::string& base_model_id);

}  // namespace ctp::cli

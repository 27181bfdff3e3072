#include "ctp/cli.hpp"

#include <algorithm>
#include <iostream>
#include <map>

#include "command.hpp"
#include "ctp/digest.hpp"
#include "ctp/error.hpp"
#include "ctp/log.hpp"

namespace ctp::cli {

namespace {

// Digest of every non-path option of `sub`, explicit or defaulted, in name
// order. Identical settings give identical digests across machines.
std::string config_digest(const CLI::App& sub) {
  std::map<std::string, std::string> values;
  for (const CLI::Option* opt : sub.get_options()) {
    if (opt->get_group() == kFiles) continue;
    const std::string name = opt->get_name(false, true);
    if (name == "--help" || name == "--config") continue;
    std::string value;
    if (opt->count() > 0) {
      for (const auto& r : opt->results()) {
        if (!value.empty()) value += ',';
        value += r;
      }
    } else {
      value = opt->get_default_str();
    }
    values[name] = value;
  }
  std::string canonical = sub.get_name() + '\n';
  for (const auto& [k, v] : values) canonical += k + '=' + v + '\n';
  return sha256_hex(canonical);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Clinical-trial phase-transition prediction pipeline", "ctp"};
  app.set_version_flag("--version", std::string(CTP_VERSION));
  app.set_config("--config", "", "TOML file of option values; [subcommand] sections apply to that subcommand");
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  std::string level = "warn";
  app.add_option("--log-level", level, "debug, info, warn, error or off")
      ->check(CLI::IsMember({"debug", "info", "warn", "error", "off"}));

  Commands cmds;
  add_data_commands(app, cmds);
  add_forest_commands(app, cmds);
  add_llm_commands(app, cmds);
  add_eval_commands(app, cmds);

  // CLI11 parses in reverse order and expects argv[0]-free input.
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  static const std::map<std::string, log::Level> levels = {
      {"debug", log::Level::Debug}, {"info", log::Level::Info}, {"warn", log::Level::Warn},
      {"error", log::Level::Error}, {"off", log::Level::Off}};
  log::set_level(levels.at(level));

  for (auto& cmd : cmds) {
    if (!cmd.app->parsed()) continue;
    Context ctx{out, err, {cmd.app->get_name(), cmd.seed ? *cmd.seed : 0, config_digest(*cmd.app)}};
    try {
      cmd.action(ctx);
      return 0;
    } catch (const CLI::ParseError& e) {
      err << "ctp " << cmd.app->get_name() << ": " << e.what() << '\n';
      return 2;
    } catch (const Error& e) {
      err << "ctp " << cmd.app->get_name() << ": " << e.kind() << ": " << e.what() << '\n';
      return 1;
    } catch (const std::exception& e) {
      err << "ctp " << cmd.app->get_name() << ": " << e.what() << '\n';
      return 1;
    }
  }
  return 2;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + (argc > 0 ? 1 : 0), argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace ctp::cli

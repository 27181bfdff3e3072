#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "ctp/registry.hpp"
#include "httplib.h"

namespace testing_support {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// httplib server on 127.0.0.1 and an ephemeral port, served from a
/// background thread for the lifetime of the object.
class LocalServer {
 public:
  explicit LocalServer(const std::function<void(httplib::Server&)>& routes);
  ~LocalServer();
  int port() const { return port_; }
  std::string url(const std::string& path = "") const;

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

/// Usable Completed trial with every attribute filled in.
ctp::TrialRecord make_trial(const std::string& nct, ctp::Phase phase, const std::string& date,
                            const std::string& di = "");

std::string fixture(const std::string& name);
std::string slurp(const std::filesystem::path& p);

struct CliResult {
  int code;
  std::string out;
  std::string err;
};
CliResult run_cli(const std::vector<std::string>& args);

}  // namespace testing_support

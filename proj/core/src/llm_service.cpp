#include <thread>

#include "ctp/error.hpp"
#include "ctp/llm.hpp"
#include "http_util.hpp"
#include "httplib.h"
#include "json.hpp"

namespace ctp::llm {

using nlohmann::json;

namespace {

FineTuneJob::Status parse_status(const std::string& s) {
  if (s == "succeeded") return FineTuneJob::Status::Succeeded;
  if (s == "failed" || s == "cancelled") return FineTuneJob::Status::Failed;
  if (s == "running") return FineTuneJob::Status::Running;
  return FineTuneJob::Status::Pending;  // "pending", "queued", "validating_files", ...
}

FineTuneJob job_from_json(const std::string& body) {
  try {
    const json j = json::parse(body);
    FineTuneJob job;
    job.job_id = j.at("id").get<std::string>();
    job.status = parse_status(j.value("status", "pending"));
    if (j.contains("fine_tuned_model") && j["fine_tuned_model"].is_string()) {
      job.fine_tuned_model = j["fine_tuned_model"].get<std::string>();
    }
    if (j.contains("model") && j["model"].is_string()) job.base_model_id = j["model"];
    if (j.contains("training_file") && j["training_file"].is_string()) {
      job.training_file_ref = j["training_file"];
    }
    if (j.contains("error") && !j["error"].is_null()) {
      job.failure_reason = j["error"].is_string() ? j["error"].get<std::string>() : j["error"].dump();
    }
    if (job.status == FineTuneJob::Status::Succeeded && job.fine_tuned_model.empty()) {
      throw ServiceUnavailable("job " + job.job_id + " succeeded without a model id");
    }
    return job;
  } catch (const json::exception& e) {
    throw ServiceUnavailable(std::string("malformed job object: ") + e.what());
  }
}

}  // namespace

HttpChatService::HttpChatService(ServiceConfig config) : config_(std::move(config)) {
  if (config_.api_key.empty()) {
    throw AuthMissing(std::string("set ") + kApiKeyEnv + " to call " + config_.base_url);
  }
  detail::split_url(config_.base_url);
}

std::string HttpChatService::send(const std::string& method, const std::string& path,
                                  const std::string& body, const std::string& content_type) {
  const auto [base, prefix] = detail::split_url(config_.base_url);
  const std::string full_path = prefix + path;
  const httplib::Headers headers = {{"Authorization", "Bearer " + config_.api_key}};

  std::string last_error;
  auto delay = config_.backoff;
  for (std::size_t attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(delay);
      delay *= 2;
    }
    httplib::Client client(base);
    const auto secs = config_.timeout.count() / 1000;
    const auto usecs = (config_.timeout.count() % 1000) * 1000;
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    auto res = method == "GET" ? client.Get(full_path, headers)
                               : client.Post(full_path, headers, body, content_type);
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status == 401 || res->status == 403) {
      throw AuthMissing(config_.base_url + " rejected the credentials (HTTP " +
                        std::to_string(res->status) + ")");
    }
    if (res->status >= 500 || res->status == 429) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      throw ServiceUnavailable(method + " " + full_path + ": HTTP " + std::to_string(res->status) +
                               ": " + res->body.substr(0, 200));
    }
    return res->body;
  }
  throw ServiceUnavailable(method + " " + full_path + " failed after " +
                           std::to_string(config_.max_retries + 1) + " attempt(s): " + last_error);
}

std::string HttpChatService::upload_training_file(const std::string& jsonl) {
  const auto body = send("POST", "/files", jsonl, "application/jsonl");
  try {
    return json::parse(body).at("id").get<std::string>();
  } catch (const json::exception& e) {
    throw ServiceUnavailable(std::string("malformed upload reply: ") + e.what());
  }
}

FineTuneJob HttpChatService::create_job(const std::string& training_file_ref,
                                        const std::string& base_model_id) {
  json req;
  req["training_file"] = training_file_ref;
  req["model"] = base_model_id;
  auto job = job_from_json(send("POST", "/fine_tuning/jobs", req.dump(), "application/json"));
  if (job.training_file_ref.empty()) job.training_file_ref = training_file_ref;
  if (job.base_model_id.empty()) job.base_model_id = base_model_id;
  return job;
}

FineTuneJob HttpChatService::get_job(const std::string& job_id) {
  return job_from_json(send("GET", "/fine_tuning/jobs/" + job_id, "", ""));
}

std::string HttpChatService::complete(const std::string& model_id, const std::string& system,
                                      const std::string& user) {
  json req;
  req["model"] = model_id;
  req["temperature"] = config_.temperature;
  req["messages"] = json::array({{{"role", "system"}, {"content", system}},
                                 {{"role", "user"}, {"content", user}}});
  const auto body = send("POST", "/chat/completions",
                         req.dump(-1, ' ', false, json::error_handler_t::replace),
                         "application/json");
  try {
    return json::parse(body).at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw ServiceUnavailable(std::string("malformed completion reply: ") + e.what());
  }
}

}  // namespace ctp::llm

#include "ctp/llm.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include "ctp/digest.hpp"
#include "ctp/error.hpp"
#include "ctp/log.hpp"
#include "ctp/text.hpp"
#include "json.hpp"

namespace ctp::llm {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string dump(const ordered_json& j) {
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

}  // namespace

// ---------------------------------------------------------------------------
// Export
// ---------------------------------------------------------------------------

std::string serialize_chat_example(const ChatExample& ex) {
  ordered_json messages = ordered_json::array();
  for (auto [role, content] : {std::pair{"system", &ex.system}, std::pair{"user", &ex.user},
                               std::pair{"assistant", &ex.assistant}}) {
    ordered_json m;
    m["role"] = role;
    m["content"] = *content;
    messages.push_back(std::move(m));
  }
  ordered_json j;
  j["messages"] = std::move(messages);
  return dump(j);
}

std::optional<ChatExample> parse_chat_example(std::string_view line, std::string* reason) {
  auto fail = [&](std::string why) -> std::optional<ChatExample> {
    if (reason) *reason = std::move(why);
    return std::nullopt;
  };
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    return fail(std::string("not valid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("messages")) return fail("missing 'messages'");
  const auto& msgs = j["messages"];
  if (!msgs.is_array() || msgs.size() != 3) return fail("'messages' must hold exactly 3 entries");

  static constexpr std::array<const char*, 3> kRoles = {"system", "user", "assistant"};
  std::array<std::string, 3> contents;
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& m = msgs[i];
    if (!m.is_object()) return fail("message " + std::to_string(i) + " is not an object");
    auto role = m.find("role");
    auto content = m.find("content");
    if (role == m.end() || !role->is_string() || *role != kRoles[i]) {
      return fail("message " + std::to_string(i) + " must have role '" + kRoles[i] + "'");
    }
    if (content == m.end() || !content->is_string()) {
      return fail("message " + std::to_string(i) + " has no string content");
    }
    contents[i] = content->get<std::string>();
  }
  return ChatExample{std::move(contents[0]), std::move(contents[1]), std::move(contents[2])};
}

void write_export(std::ostream& out, std::span<const ChatExample> examples) {
  for (const auto& ex : examples) out << serialize_chat_example(ex) << '\n';
}

std::vector<ChatExample> read_export(std::istream& in) {
  std::vector<ChatExample> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string reason;
    auto ex = parse_chat_example(line, &reason);
    if (!ex) throw InvalidTrainingFile(lineno, reason);
    out.push_back(std::move(*ex));
  }
  if (out.empty()) throw InvalidTrainingFile(0, "export holds no examples");
  return out;
}

std::vector<ChatExample> build_export(const LabeledCorpus& corpus, bool reasoning,
                                      std::size_t budget) {
  std::vector<ChatExample> out;
  out.reserve(corpus.entries.size());
  for (const auto& e : corpus.entries) {
    out.push_back(build_chat_example(synthesize_description(e.trial, budget), e.label, reasoning));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Replies
// ---------------------------------------------------------------------------

namespace {

bool is_trailing_punct(char c) {
  return c == '.' || c == ',' || c == '!' || c == '?' || c == ';' || c == ':';
}

bool is_separator(char c) {
  return is_trailing_punct(c) || c == '-' || c == ' ' || c == '\t' || c == '\n' || c == '\r';
}

bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

std::string_view strip(std::string_view s) {
  s = text::trim(s);
  while (!s.empty() && is_trailing_punct(s.back())) s = text::trim(s.substr(0, s.size() - 1));
  return s;
}

}  // namespace

ModelReply normalize_reply(std::string_view raw) {
  ModelReply reply;
  reply.raw_text = std::string(raw);
  const std::string_view s = strip(raw);
  std::size_t word_end = 0;
  while (word_end < s.size() && is_alpha(s[word_end])) ++word_end;
  const std::string_view word = s.substr(0, word_end);

  if (text::iequals(word, "yes")) {
    reply.parsed = LabelValue::Yes;
  } else if (text::iequals(word, "no")) {
    reply.parsed = LabelValue::No;
    std::string_view rest = s.substr(word_end);
    while (!rest.empty() && is_separator(rest.front())) rest.remove_prefix(1);
    if (!rest.empty()) reply.reason = std::string(rest);
  }
  return reply;
}

std::string canonical_reply(std::string_view raw) {
  const auto r = normalize_reply(raw);
  if (!r.parsed) return std::string(strip(raw));
  if (*r.parsed == LabelValue::Yes) return "Yes";
  return r.reason ? "No. " + *r.reason : "No";
}

// ---------------------------------------------------------------------------
// Jobs
// ---------------------------------------------------------------------------

std::string_view status_token(FineTuneJob::Status s) noexcept {
  switch (s) {
    case FineTuneJob::Status::Pending: return "pending";
    case FineTuneJob::Status::Running: return "running";
    case FineTuneJob::Status::Succeeded: return "succeeded";
    case FineTuneJob::Status::Failed: return "failed";
  }
  return "";
}

ServiceConfig ServiceConfig::from_env(std::string base_url, std::string base_model_id) {
  ServiceConfig c;
  c.base_url = std::move(base_url);
  c.base_model_id = std::move(base_model_id);
  if (const char* key = std::getenv(kApiKeyEnv)) c.api_key = key;
  return c;
}

FineTuneJob submit_finetune(const std::filesystem::path& export_file,
                            const std::string& base_model_id, ChatService& service) {
  std::ifstream in(export_file, std::ios::binary);
  if (!in) throw IoError("cannot open " + export_file.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string content = buf.str();
  {
    std::istringstream check(content);
    read_export(check);
  }
  const std::string file_ref = service.upload_training_file(content);
  FineTuneJob job = service.create_job(file_ref, base_model_id);
  if (job.training_file_ref.empty()) job.training_file_ref = file_ref;
  if (job.base_model_id.empty()) job.base_model_id = base_model_id;
  return job;
}

const FineTuneJob& JobTracker::update(const FineTuneJob& polled) {
  if (job_.finished() || polled.status < job_.status) {
    if (polled.status != job_.status) {
      log::warn("job " + job_.job_id + " reported " + std::string(status_token(polled.status)) +
                " after " + std::string(status_token(job_.status)) + "; ignored");
    }
    return job_;
  }
  const auto file = job_.training_file_ref;
  const auto base = job_.base_model_id;
  job_ = polled;
  if (job_.training_file_ref.empty()) job_.training_file_ref = file;
  if (job_.base_model_id.empty()) job_.base_model_id = base;
  return job_;
}

FineTuneJob wait_for_job(ChatService& service, const FineTuneJob& job,
                         std::chrono::milliseconds interval, std::size_t max_polls) {
  JobTracker tracker(job);
  for (std::size_t i = 0; i < max_polls && !tracker.job().finished(); ++i) {
    if (i > 0) std::this_thread::sleep_for(interval);
    tracker.update(service.get_job(job.job_id));
  }
  return tracker.job();
}

// ---------------------------------------------------------------------------
// Prediction
// ---------------------------------------------------------------------------

ModelReply predict_transition(ChatService& service, const std::string& model_id,
                              const TrialDescription& d) {
  if (model_id.empty()) throw InvalidArgument("model id is empty");
  return normalize_reply(service.complete(model_id, std::string(kSystemPrompt), d.text));
}

std::vector<ModelReply> predict_many(ChatService& service, const std::string& model_id,
                                     std::span<const TrialDescription> descriptions,
                                     std::size_t max_parallel) {
  std::vector<ModelReply> out(descriptions.size());
  std::vector<std::exception_ptr> errors(descriptions.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < descriptions.size(); i = next++) {
      try {
        out[i] = predict_transition(service, model_id, descriptions[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n = std::min(std::max<std::size_t>(max_parallel, 1), descriptions.size());
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Replay stub
// ---------------------------------------------------------------------------

ReplayStub::ReplayStub(std::vector<Fixture> fixtures, std::string finetune_model)
    : finetune_model_(std::move(finetune_model)) {
  for (auto& f : fixtures) {
    by_user_.insert_or_assign({std::move(f.user), f.model.value_or("")}, std::move(f.reply));
  }
}

ReplayStub ReplayStub::from_stream(std::istream& in) {
  std::vector<Fixture> fixtures;
  std::string finetune_model = "stub-model";
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    try {
      const json j = json::parse(line);
      if (j.contains("_meta")) continue;
      if (j.contains("finetune_model")) {
        finetune_model = j.at("finetune_model").get<std::string>();
        continue;
      }
      Fixture f;
      f.user = j.at("user").get<std::string>();
      f.reply = j.at("reply").get<std::string>();
      if (j.contains("model") && !j["model"].is_null()) f.model = j["model"].get<std::string>();
      fixtures.push_back(std::move(f));
    } catch (const json::exception& e) {
      throw InvalidArgument("fixture line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return ReplayStub(std::move(fixtures), std::move(finetune_model));
}

ReplayStub ReplayStub::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return from_stream(in);
}

std::string ReplayStub::upload_training_file(const std::string& jsonl) {
  return "stub-file-" + sha256_hex(jsonl).substr(0, 16);
}

FineTuneJob ReplayStub::create_job(const std::string& training_file_ref,
                                   const std::string& base_model_id) {
  FineTuneJob job;
  job.job_id = "stub-job-" + sha256_hex(training_file_ref + '\n' + base_model_id).substr(0, 16);
  job.base_model_id = base_model_id;
  job.training_file_ref = training_file_ref;
  job.status = FineTuneJob::Status::Succeeded;
  job.fine_tuned_model = finetune_model_;
  return job;
}

FineTuneJob ReplayStub::get_job(const std::string& job_id) {
  FineTuneJob job;
  job.job_id = job_id;
  job.status = FineTuneJob::Status::Succeeded;
  job.fine_tuned_model = finetune_model_;
  return job;
}

std::string ReplayStub::complete(const std::string& model_id, const std::string&,
                                 const std::string& user) {
  if (auto it = by_user_.find({user, model_id}); it != by_user_.end()) return it->second;
  if (auto it = by_user_.find({user, ""}); it != by_user_.end()) return it->second;
  throw NotRecorded("no recorded reply for a " + std::to_string(user.size()) +
                    "-byte prompt (sha256 " + sha256_hex(user).substr(0, 12) + ")");
}

std::string serialize_fixture(const ReplayStub::Fixture& f) {
  ordered_json j;
  j["user"] = f.user;
  j["reply"] = f.reply;
  if (f.model) j["model"] = *f.model;
  return dump(j);
}

}  // namespace ctp::llm

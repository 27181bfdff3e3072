#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ctp/corpus.hpp"
#include "ctp/linkage.hpp"

namespace ctp::llm {

// ---------------------------------------------------------------------------
// Fine-tune export (one {"messages": [...]} object per line)
// ---------------------------------------------------------------------------

std::string serialize_chat_example(const ChatExample& ex);

/// Strict parser: exactly three messages with roles system, user, assistant
/// in that order and string contents. Returns the failure reason otherwise.
std::optional<ChatExample> parse_chat_example(std::string_view line, std::string* reason = nullptr);

void write_export(std::ostream& out, std::span<const ChatExample> examples);

/// Reads and validates a whole export. Throws InvalidTrainingFile(line, ..)
/// at the first bad line; blank lines are rejected too.
std::vector<ChatExample> read_export(std::istream& in);

/// Chat examples for every labeled entry. Reasoning mode turns No labels with
/// a termination reason into "No. {reason}"; Yes is always plain.
std::vector<ChatExample> build_export(const LabeledCorpus& corpus, bool reasoning,
                                      std::size_t budget = kDefaultCharBudget);
inline std::vector<ChatExample> build_reasoning_export(const LabeledCorpus& corpus,
                                                       std::size_t budget = kDefaultCharBudget) {
  return build_export(corpus, true, budget);
}

// ---------------------------------------------------------------------------
// Replies
// ---------------------------------------------------------------------------

struct ModelReply {
  std::string raw_text;
  std::optional<LabelValue> parsed;
  std::optional<std::string> reason;
};

/// Trims whitespace, strips trailing punctuation, then matches the first
/// word against yes/no case-insensitively. Whatever follows a leading "No"
/// (after separators) becomes the reason. Anything else is unparsed.
ModelReply normalize_reply(std::string_view raw);

/// String form of a normalized reply: "Yes", "No", "No. {reason}", or the
/// stripped text when unparsed. canonical_reply is idempotent and
/// normalize_reply(canonical_reply(x)) agrees with normalize_reply(x).
std::string canonical_reply(std::string_view raw);

// ---------------------------------------------------------------------------
// Service abstraction
// ---------------------------------------------------------------------------

struct FineTuneJob {
  enum class Status { Pending = 0, Running = 1, Succeeded = 2, Failed = 3 };

  std::string job_id;
  std::string base_model_id;
  std::string training_file_ref;
  Status status = Status::Pending;
  std::string fine_tuned_model;  // set when Succeeded
  std::string failure_reason;    // set when Failed

  bool finished() const noexcept { return status == Status::Succeeded || status == Status::Failed; }
};

std::string_view status_token(FineTuneJob::Status s) noexcept;

/// Vendor-neutral chat-completions + fine-tune-jobs contract.
class ChatService {
 public:
  virtual ~ChatService() = default;

  virtual std::string upload_training_file(const std::string& jsonl) = 0;
  virtual FineTuneJob create_job(const std::string& training_file_ref,
                                 const std::string& base_model_id) = 0;
  virtual FineTuneJob get_job(const std::string& job_id) = 0;
  /// Single chat completion with deterministic decoding.
  virtual std::string complete(const std::string& model_id, const std::string& system,
                               const std::string& user) = 0;
};

struct ServiceConfig {
  std::string base_url;  // e.g. "https://api.example.com/v1"
  std::string base_model_id;
  std::string api_key;   // taken from CTP_MODEL_API_KEY, never from files
  std::size_t max_parallel = 4;
  std::chrono::milliseconds timeout{60000};
  std::size_t max_retries = 3;
  std::chrono::milliseconds backoff{500};
  double temperature = 0.0;

  /// Fills api_key from the CTP_MODEL_API_KEY environment variable.
  static ServiceConfig from_env(std::string base_url, std::string base_model_id);
};

inline constexpr const char* kApiKeyEnv = "CTP_MODEL_API_KEY";

/// HTTP implementation:
///   POST {base}/files                 body: JSONL          -> {"id"}
///   POST {base}/fine_tuning/jobs      {"training_file","model"} -> job
///   GET  {base}/fine_tuning/jobs/{id}                       -> job
///   POST {base}/chat/completions      {"model","messages","temperature"}
///                                     -> {"choices":[{"message":{"content"}}]}
/// Job objects: {"id","status","fine_tuned_model"?,"error"?}. Requests carry
/// "Authorization: Bearer <key>". Transport errors and 5xx/429 are retried.
class HttpChatService final : public ChatService {
 public:
  /// Throws AuthMissing when config.api_key is empty.
  explicit HttpChatService(ServiceConfig config);

  std::string upload_training_file(const std::string& jsonl) override;
  FineTuneJob create_job(const std::string& training_file_ref,
                         const std::string& base_model_id) override;
  FineTuneJob get_job(const std::string& job_id) override;
  std::string complete(const std::string& model_id, const std::string& system,
                       const std::string& user) override;

 private:
  std::string send(const std::string& method, const std::string& path, const std::string& body,
                   const std::string& content_type);

  ServiceConfig config_;
};

/// Offline service answering from recorded fixtures. Fixture lines:
///   {"user": "<trial description>", "reply": "No", "model": "<optional>"}
///   {"finetune_model": "<model id>"}   (optional; defaults to "stub-model")
/// Fine-tune jobs succeed immediately. Unknown prompts throw NotRecorded.
class ReplayStub final : public ChatService {
 public:
  struct Fixture {
    std::string user;
    std::string reply;
    std::optional<std::string> model;
  };

  explicit ReplayStub(std::vector<Fixture> fixtures, std::string finetune_model = "stub-model");
  static ReplayStub from_stream(std::istream& in);
  static ReplayStub from_file(const std::filesystem::path& path);

  std::string upload_training_file(const std::string& jsonl) override;
  FineTuneJob create_job(const std::string& training_file_ref,
                         const std::string& base_model_id) override;
  FineTuneJob get_job(const std::string& job_id) override;
  std::string complete(const std::string& model_id, const std::string& system,
                       const std::string& user) override;

  std::size_t size() const noexcept { return by_user_.size(); }

 private:
  // (user, model) -> reply; model "" matches any model.
  std::map<std::pair<std::string, std::string>, std::string> by_user_;
  std::string finetune_model_;
};

/// Serializes one replay fixture line.
std::string serialize_fixture(const ReplayStub::Fixture& f);

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Validates the export locally (InvalidTrainingFile before any upload),
/// uploads it and creates the job.
FineTuneJob submit_finetune(const std::filesystem::path& export_file,
                            const std::string& base_model_id, ChatService& service);

/// Keeps the furthest status seen so that a job never moves backwards.
class JobTracker {
 public:
  explicit JobTracker(FineTuneJob job) : job_(std::move(job)) {}

  /// Merges a freshly polled state; regressions are ignored. Returns the
  /// tracked state.
  const FineTuneJob& update(const FineTuneJob& polled);
  const FineTuneJob& job() const noexcept { return job_; }

 private:
  FineTuneJob job_;
};

/// Polls until the job finishes or `max_polls` is reached.
FineTuneJob wait_for_job(ChatService& service, const FineTuneJob& job,
                         std::chrono::milliseconds interval, std::size_t max_polls);

ModelReply predict_transition(ChatService& service, const std::string& model_id,
                              const TrialDescription& d);

/// Runs predict_transition over many descriptions with at most
/// `max_parallel` requests in flight. Output order follows input order.
std::vector<ModelReply> predict_many(ChatService& service, const std::string& model_id,
                                     std::span<const TrialDescription> descriptions,
                                     std::size_t max_parallel = 4);

}  // namespace ctp::llm

#include <atomic>
#include <thread>

#include "ctp/embed.hpp"
#include "ctp/error.hpp"
#include "ctp/log.hpp"
#include "http_util.hpp"
#include "httplib.h"
#include "json.hpp"

namespace ctp {

using nlohmann::json;

RemoteEncoder::RemoteEncoder(RemoteEncoderConfig config) : config_(std::move(config)) {
  if (config_.dim == 0) throw InvalidArgument("embedding dimension must be >= 1");
  if (config_.batch_size == 0) config_.batch_size = 1;
  if (config_.max_parallel == 0) config_.max_parallel = 1;
  detail::split_url(config_.endpoint);
}

std::string RemoteEncoder::id() const {
  return "remote:" + config_.endpoint + ":" + config_.model_id + ":h=" + std::to_string(config_.dim);
}

std::vector<Vector> RemoteEncoder::request(std::span<const std::string> texts) const {
  const auto [base, path] = detail::split_url(config_.endpoint);
  json body;
  body["model_id"] = config_.model_id;
  body["texts"] = json::array();
  for (const auto& t : texts) body["texts"].push_back(t);
  const std::string payload = body.dump(-1, ' ', false, json::error_handler_t::replace);

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
    auto res = client.Post(path.empty() ? "/" : path, payload, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500 || res->status == 429) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw RemoteUnavailable(config_.endpoint + ": HTTP " + std::to_string(res->status));
    }

    json reply;
    try {
      reply = json::parse(res->body);
    } catch (const json::exception& e) {
      last_error = std::string("malformed reply: ") + e.what();
      continue;
    }
    if (!reply.is_object() || !reply.contains("vectors") || !reply["vectors"].is_array()) {
      throw DimensionMismatch(config_.endpoint + ": reply has no 'vectors' array");
    }
    const auto& vs = reply["vectors"];
    if (vs.size() != texts.size()) {
      throw DimensionMismatch(config_.endpoint + ": " + std::to_string(vs.size()) +
                              " vectors for " + std::to_string(texts.size()) + " texts");
    }
    std::vector<Vector> out;
    out.reserve(vs.size());
    for (const auto& v : vs) {
      if (!v.is_array() || v.size() != config_.dim) {
        throw DimensionMismatch(config_.endpoint + ": expected vectors of dimension " +
                                std::to_string(config_.dim));
      }
      Vector row;
      row.reserve(config_.dim);
      for (const auto& x : v) {
        if (!x.is_number()) throw DimensionMismatch(config_.endpoint + ": non-numeric entry");
        row.push_back(x.get<double>());
      }
      out.push_back(std::move(row));
    }
    return out;
  }
  throw RemoteUnavailable(config_.endpoint + " after " + std::to_string(config_.max_retries + 1) +
                          " attempt(s): " + last_error);
}

std::vector<Vector> RemoteEncoder::encode_batch(std::span<const std::string> texts) const {
  std::vector<Vector> out(texts.size());
  std::vector<std::size_t> non_empty;
  std::vector<std::string> to_send;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (texts[i].empty()) {
      out[i] = Vector(config_.dim, 0.0);
    } else {
      non_empty.push_back(i);
      to_send.push_back(texts[i]);
    }
  }
  if (to_send.empty()) return out;

  const std::size_t n_batches = (to_send.size() + config_.batch_size - 1) / config_.batch_size;
  std::vector<std::vector<Vector>> results(n_batches);
  std::vector<std::exception_ptr> errors(n_batches);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t b = next++; b < n_batches; b = next++) {
      const std::size_t begin = b * config_.batch_size;
      const std::size_t len = std::min(config_.batch_size, to_send.size() - begin);
      try {
        results[b] = request(std::span<const std::string>(to_send).subspan(begin, len));
      } catch (...) {
        errors[b] = std::current_exception();
      }
    }
  };
  const std::size_t n_threads = std::min(config_.max_parallel, n_batches);
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::size_t k = 0;
  for (auto& batch : results) {
    for (auto& v : batch) out[non_empty[k++]] = std::move(v);
  }
  return out;
}

}  // namespace ctp

#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ctp/digest.hpp"
#include "ctp/registry.hpp"

namespace ctp {

using Vector = std::vector<double>;

/// Maps attribute text to a fixed-dimension vector. Implementations must be
/// deterministic per (id(), text), return exactly dim() values, and map empty
/// text to the zero vector.
class Encoder {
 public:
  virtual ~Encoder() = default;

  /// Stable identity used as the cache namespace, e.g. "hashing:h=64:seed=1".
  virtual std::string id() const = 0;
  virtual std::size_t dim() const = 0;
  virtual std::vector<Vector> encode_batch(std::span<const std::string> texts) const = 0;
};

/// Signed feature hashing over lowercase word unigrams and bigrams,
/// L2-normalized. Empty text, or text whose buckets cancel exactly, maps to
/// the zero vector.
Vector hashing_embed(std::string_view text, std::size_t h, std::uint64_t seed);

/// Word tokens as used by hashing_embed: maximal runs of ASCII alphanumerics
/// or non-ASCII bytes, lowercased.
std::vector<std::string> hashing_tokens(std::string_view text);

class HashingEncoder final : public Encoder {
 public:
  HashingEncoder(std::size_t h, std::uint64_t seed);

  std::string id() const override;
  std::size_t dim() const override { return h_; }
  std::vector<Vector> encode_batch(std::span<const std::string> texts) const override;

 private:
  std::size_t h_;
  std::uint64_t seed_;
};

struct RemoteEncoderConfig {
  std::string endpoint;  // e.g. "http://localhost:8080/embed"
  std::string model_id;
  std::size_t dim = 768;
  std::size_t batch_size = 32;
  std::size_t max_parallel = 4;
  std::size_t max_retries = 3;
  std::chrono::milliseconds backoff{200};
  std::chrono::milliseconds timeout{30000};
};

/// HTTP encoder. POSTs {"model_id": ..., "texts": [...]} and expects
/// {"vectors": [[...], ...]} with one vector per text. Empty texts are
/// answered locally with zeros and never sent.
class RemoteEncoder final : public Encoder {
 public:
  explicit RemoteEncoder(RemoteEncoderConfig config);

  std::string id() const override;
  std::size_t dim() const override { return config_.dim; }
  /// Throws RemoteUnavailable once retries are exhausted and
  /// DimensionMismatch when the service answers with the wrong shape.
  std::vector<Vector> encode_batch(std::span<const std::string> texts) const override;

 private:
  std::vector<Vector> request(std::span<const std::string> texts) const;

  RemoteEncoderConfig config_;
};

/// Content-addressed store keyed by (encoder id, SHA-256 of text). Safe for
/// concurrent use.
class EmbeddingCache {
 public:
  std::optional<Vector> find(std::string_view encoder_id, std::string_view text) const;
  void insert(std::string_view encoder_id, std::string_view text, Vector v);
  std::size_t size() const;

 private:
  static std::string key(std::string_view encoder_id, std::string_view text);

  mutable std::shared_mutex mutex_;
  std::map<std::string, Vector, std::less<>> entries_;
};

struct FeatureVector {
  Vector values;  // kAttributeCount * h entries, attribute blocks in order
  std::string source_nct_id;

  std::size_t block_dim() const noexcept { return values.size() / kAttributeCount; }
};

Vector embed_attribute(std::string_view text, const Encoder& encoder);

/// Concatenates the 11 attribute embeddings. `cache` may be null.
FeatureVector embed_description(const TrialRecord& r, const Encoder& encoder,
                                EmbeddingCache* cache = nullptr);

/// Batched form of embed_description: each distinct uncached text is sent to
/// the encoder once.
std::vector<FeatureVector> embed_records(std::span<const TrialRecord> records,
                                         const Encoder& encoder, EmbeddingCache* cache = nullptr);

/// Removes the h-wide block of attribute `index`. Throws IndexOutOfRange.
Vector drop_attribute(std::span<const double> values, std::size_t index);
inline Vector drop_attribute(const FeatureVector& v, std::size_t index) {
  return drop_attribute(v.values, index);
}

// ---------------------------------------------------------------------------
// Matrix file
// ---------------------------------------------------------------------------

/// Row-major feature matrix with one id per row.
struct FeatureMatrix {
  std::size_t dim = 0;
  std::vector<std::string> ids;
  std::vector<double> values;  // ids.size() * dim
  std::string metadata;        // free-form JSON provenance

  std::size_t rows() const noexcept { return ids.size(); }
  std::span<const double> row(std::size_t i) const { return {values.data() + i * dim, dim}; }
  void append(std::string id, std::span<const double> row);
};

inline constexpr std::uint32_t kMatrixFormatVersion = 1;

/// Layout (little-endian): "CTPM", u32 version, u64 rows, u64 dim,
/// u32 metadata length + bytes, rows x (u32 id length + bytes),
/// rows*dim IEEE-754 binary64 values.
void save_matrix(const FeatureMatrix& m, const std::filesystem::path& path);
/// Throws CorruptFile or FormatVersionMismatch.
FeatureMatrix load_matrix(const std::filesystem::path& path);

}  // namespace ctp

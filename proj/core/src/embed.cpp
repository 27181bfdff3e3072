#include "ctp/embed.hpp"

#include <cmath>
#include <mutex>
#include <unordered_map>

#include "ctp/error.hpp"
#include "ctp/rng.hpp"

namespace ctp {

// ---------------------------------------------------------------------------
// Hashing encoder
// ---------------------------------------------------------------------------

namespace {

bool is_word_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

std::uint64_t seeded_hash(std::string_view s, std::uint64_t seed) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ splitmix64(seed);
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(h);
}

void accumulate(Vector& v, std::string_view feature, std::uint64_t seed) {
  const std::uint64_t h = seeded_hash(feature, seed);
  const std::size_t bucket = static_cast<std::size_t>(h % v.size());
  const double sign = (splitmix64(h) >> 63) != 0 ? -1.0 : 1.0;
  v[bucket] += sign;
}

}  // namespace

std::vector<std::string> hashing_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : text) {
    if (is_word_byte(c)) {
      current.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a')
                                             : static_cast<char>(c));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

Vector hashing_embed(std::string_view text, std::size_t h, std::uint64_t seed) {
  if (h == 0) throw InvalidArgument("embedding dimension must be >= 1");
  Vector v(h, 0.0);
  const auto tokens = hashing_tokens(text);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    accumulate(v, tokens[i], seed);
    if (i + 1 < tokens.size()) accumulate(v, tokens[i] + ' ' + tokens[i + 1], seed);
  }
  double norm = 0.0;
  for (double x : v) norm += x * x;
  if (norm > 0.0) {
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
  }
  return v;
}

HashingEncoder::HashingEncoder(std::size_t h, std::uint64_t seed) : h_(h), seed_(seed) {
  if (h == 0) throw InvalidArgument("embedding dimension must be >= 1");
}

std::string HashingEncoder::id() const {
  return "hashing:h=" + std::to_string(h_) + ":seed=" + std::to_string(seed_);
}

std::vector<Vector> HashingEncoder::encode_batch(std::span<const std::string> texts) const {
  std::vector<Vector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(hashing_embed(t, h_, seed_));
  return out;
}

// ---------------------------------------------------------------------------
// Cache
// ---------------------------------------------------------------------------

std::string EmbeddingCache::key(std::string_view encoder_id, std::string_view text) {
  std::string k(encoder_id);
  k += '\0';
  k += sha256_hex(text);
  return k;
}

std::optional<Vector> EmbeddingCache::find(std::string_view encoder_id,
                                           std::string_view text) const {
  const auto k = key(encoder_id, text);
  std::shared_lock lock(mutex_);
  if (auto it = entries_.find(k); it != entries_.end()) return it->second;
  return std::nullopt;
}

void EmbeddingCache::insert(std::string_view encoder_id, std::string_view text, Vector v) {
  auto k = key(encoder_id, text);
  std::unique_lock lock(mutex_);
  entries_.insert_or_assign(std::move(k), std::move(v));
}

std::size_t EmbeddingCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

// ---------------------------------------------------------------------------
// Descriptions
// ---------------------------------------------------------------------------

Vector embed_attribute(std::string_view text, const Encoder& encoder) {
  if (text.empty()) return Vector(encoder.dim(), 0.0);
  const std::string t(text);
  auto out = encoder.encode_batch(std::span<const std::string>(&t, 1));
  if (out.size() != 1 || out[0].size() != encoder.dim()) {
    throw DimensionMismatch("encoder " + encoder.id() + " returned a malformed vector");
  }
  return std::move(out[0]);
}

FeatureVector embed_description(const TrialRecord& r, const Encoder& encoder,
                                EmbeddingCache* cache) {
  return std::move(embed_records(std::span<const TrialRecord>(&r, 1), encoder, cache).front());
}

std::vector<FeatureVector> embed_records(std::span<const TrialRecord> records,
                                         const Encoder& encoder, EmbeddingCache* cache) {
  const std::size_t h = encoder.dim();
  const std::string encoder_id = encoder.id();

  // Resolve every distinct non-empty text once: cache first, then one
  // encoder call for the remainder.
  std::unordered_map<std::string, Vector> resolved;
  std::vector<std::string> pending;
  for (const auto& r : records) {
    for (auto a : kAttributes) {
      std::string t = r.attributes.text(a);
      if (t.empty() || resolved.contains(t)) continue;
      if (cache) {
        if (auto hit = cache->find(encoder_id, t)) {
          resolved.emplace(std::move(t), std::move(*hit));
          continue;
        }
      }
      resolved.emplace(t, Vector{});
      pending.push_back(std::move(t));
    }
  }
  if (!pending.empty()) {
    auto vectors = encoder.encode_batch(pending);
    if (vectors.size() != pending.size()) {
      throw DimensionMismatch("encoder returned " + std::to_string(vectors.size()) +
                              " vectors for " + std::to_string(pending.size()) + " texts");
    }
    for (std::size_t i = 0; i < pending.size(); ++i) {
      if (vectors[i].size() != h) {
        throw DimensionMismatch("encoder returned dimension " +
                                std::to_string(vectors[i].size()) + ", expected " +
                                std::to_string(h));
      }
      if (cache) cache->insert(encoder_id, pending[i], vectors[i]);
      resolved[pending[i]] = std::move(vectors[i]);
    }
  }

  std::vector<FeatureVector> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    FeatureVector fv;
    fv.source_nct_id = r.nct_id;
    fv.values.reserve(kAttributeCount * h);
    for (auto a : kAttributes) {
      const std::string t = r.attributes.text(a);
      if (t.empty()) {
        fv.values.insert(fv.values.end(), h, 0.0);
      } else {
        const auto& v = resolved.at(t);
        fv.values.insert(fv.values.end(), v.begin(), v.end());
      }
    }
    out.push_back(std::move(fv));
  }
  return out;
}

Vector drop_attribute(std::span<const double> values, std::size_t index) {
  if (index >= kAttributeCount) {
    throw IndexOutOfRange("attribute index " + std::to_string(index) + " is not in 0..10");
  }
  if (values.size() % kAttributeCount != 0) {
    throw DimensionMismatch("feature vector length " + std::to_string(values.size()) +
                            " is not a multiple of 11");
  }
  const std::size_t h = values.size() / kAttributeCount;
  Vector out;
  out.reserve(values.size() - h);
  out.insert(out.end(), values.begin(), values.begin() + static_cast<std::ptrdiff_t>(index * h));
  out.insert(out.end(), values.begin() + static_cast<std::ptrdiff_t>((index + 1) * h),
             values.end());
  return out;
}

}  // namespace ctp

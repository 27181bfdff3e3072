#include "ctp/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ctp/error.hpp"
#include "ctp/rng.hpp"
#include "ctp/text.hpp"

namespace ctp {

namespace {

std::string render(const std::array<std::string, kAttributeCount>& values) {
  std::string out;
  for (std::size_t i = 0; i < kAttributeCount; ++i) {
    if (i > 0) out += kFieldSeparator;
    out += attribute_label(kAttributes[i]);
    out += ": ";
    out += values[i];
  }
  return out;
}

// Shortens `field` by up to `excess` code points, appending the marker.
// Returns how many code points were actually removed.
std::size_t shorten(std::string& field, std::size_t excess) {
  const std::size_t len = text::utf8_length(field);
  if (len == 0 || excess == 0) return 0;
  // Keeping k code points plus the marker shrinks the field by len - k - 1.
  const std::size_t keep = len > excess + 1 ? len - excess - 1 : 0;
  field = std::string(text::utf8_prefix(field, keep)) + std::string(kTruncationMarker);
  return len - keep - 1;
}

}  // namespace

TrialDescription synthesize_description(const TrialRecord& r, std::size_t budget,
                                        std::optional<Attribute> omit) {
  std::array<std::string, kAttributeCount> values;
  for (auto a : kAttributes) {
    if (a != omit) values[index_of(a)] = r.attributes.text(a);
  }

  std::string out = render(values);
  std::size_t length = text::utf8_length(out);
  if (length > budget) {
    std::size_t excess = length - budget;
    for (auto a : {Attribute::Criteria, Attribute::Brief}) {
      excess -= shorten(values[index_of(a)], excess);
      if (excess == 0) break;
    }
    out = render(values);
    length = text::utf8_length(out);
  }
  return {std::move(out), r.nct_id, length};
}

std::optional<std::array<std::string, kAttributeCount>> extract_fields(std::string_view text) {
  std::array<std::string, kAttributeCount> values;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < kAttributeCount; ++i) {
    std::string prefix = std::string(attribute_label(kAttributes[i])) + ": ";
    if (text.substr(pos, prefix.size()) != prefix) return std::nullopt;
    pos += prefix.size();
    std::size_t end = text.size();
    if (i + 1 < kAttributeCount) {
      end = text.find(kFieldSeparator, pos);
      if (end == std::string_view::npos) return std::nullopt;
    }
    values[i] = std::string(text.substr(pos, end - pos));
    pos = end + kFieldSeparator.size();
  }
  return values;
}

std::array<std::size_t, 3> split_sizes(std::size_t n, const SplitRatios& ratios) {
  const std::array<double, 3> r = {ratios.train, ratios.validation, ratios.test};
  for (double x : r) {
    if (!(x >= 0.0)) throw InvalidArgument("split ratios must be non-negative");
  }
  if (std::abs(r[0] + r[1] + r[2] - 1.0) > 1e-9) {
    throw InvalidArgument("split ratios must sum to 1");
  }
  std::array<std::size_t, 3> sizes{};
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    // The epsilon keeps products like 100 * 0.29 from flooring one short.
    sizes[i] = static_cast<std::size_t>(std::floor(static_cast<double>(n) * r[i] + 1e-9));
    sizes[i] = std::min(sizes[i], n - assigned);
    assigned += sizes[i];
  }
  for (std::size_t i = 0; assigned < n; i = (i + 1) % 2) {
    ++sizes[i];
    ++assigned;
  }
  return sizes;
}

DatasetSplit chronological_split(std::span<const LabeledTrial> corpus, const SplitRatios& ratios) {
  if (corpus.empty()) throw EmptyCorpus("cannot split an empty corpus");
  const auto sizes = split_sizes(corpus.size(), ratios);

  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i : order) {
    if (!corpus[i].trial.last_modified) {
      throw InvalidArgument("trial " + corpus[i].trial.nct_id + " has no last_modified date");
    }
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ta = corpus[a].trial;
    const auto& tb = corpus[b].trial;
    if (*ta.last_modified != *tb.last_modified) return *ta.last_modified < *tb.last_modified;
    return ta.nct_id < tb.nct_id;
  });

  DatasetSplit split;
  std::size_t i = 0;
  for (; i < sizes[0]; ++i) split.train.push_back(corpus[order[i]]);
  for (; i < sizes[0] + sizes[1]; ++i) split.validation.push_back(corpus[order[i]]);
  for (; i < order.size(); ++i) split.test.push_back(corpus[order[i]]);

  if (!split.train.empty()) split.train_end = split.train.back().trial.last_modified;
  if (!split.validation.empty()) split.validation_end = split.validation.back().trial.last_modified;
  return split;
}

std::vector<LabeledTrial> balance(std::span<const LabeledTrial> entries, std::uint64_t seed) {
  std::vector<std::size_t> yes, no;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    (entries[i].label.value == LabelValue::Yes ? yes : no).push_back(i);
  }
  if (yes.empty() || no.empty()) {
    throw SingleClassCorpus(std::to_string(yes.size()) + " Yes / " + std::to_string(no.size()) +
                            " No entries; both classes are required");
  }
  const auto& majority = yes.size() > no.size() ? yes : no;
  const std::size_t keep_count = std::min(yes.size(), no.size());

  std::vector<bool> keep(entries.size(), true);
  if (majority.size() > keep_count) {
    // Selection sampling: a uniform subset that preserves order.
    Rng rng(seed);
    std::size_t needed = keep_count;
    for (std::size_t j = 0; j < majority.size(); ++j) {
      const std::size_t remaining = majority.size() - j;
      const bool take = rng.uniform_index(remaining) < needed;
      keep[majority[j]] = take;
      if (take) --needed;
    }
  }

  std::vector<LabeledTrial> out;
  out.reserve(2 * keep_count);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (keep[i]) out.push_back(entries[i]);
  }
  return out;
}

std::vector<LabeledTrial> filter_phase(std::span<const LabeledTrial> entries, Phase phase) {
  std::vector<LabeledTrial> out;
  std::copy_if(entries.begin(), entries.end(), std::back_inserter(out),
               [phase](const LabeledTrial& e) { return e.trial.phase == phase; });
  return out;
}

ChatExample build_chat_example(const TrialDescription& d, const Label& l, bool reasoning) {
  ChatExample ex{std::string(kSystemPrompt), d.text, std::string(label_token(l.value))};
  if (reasoning && l.value == LabelValue::No && l.reason && !text::trim(*l.reason).empty()) {
    ex.assistant = "No. " + std::string(text::trim(*l.reason));
  }
  return ex;
}

}  // namespace ctp

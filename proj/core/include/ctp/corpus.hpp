#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ctp/date.hpp"
#include "ctp/linkage.hpp"
#include "ctp/registry.hpp"

namespace ctp {

/// Roughly 4096 tokens at ~4 characters per token.
inline constexpr std::size_t kDefaultCharBudget = 16000;

/// Marker appended to a truncated field.
inline constexpr std::string_view kTruncationMarker = "…";

/// Separator placed between attributes in a description.
inline constexpr std::string_view kFieldSeparator = "; \n";

struct TrialDescription {
  std::string text;
  std::string source_nct_id;
  std::size_t char_count = 0;  // UTF-8 code points in `text`
};

/// Renders the 11 attributes as
///   "TRIAL NAME: {name}; \nBRIEF: {brief}; \n ... SECONDARY OUTCOME: {..}".
/// Lengths are measured in code points. When the text exceeds `budget`,
/// criteria is cut first and then brief, each ending in U+2026; other fields
/// are never touched, so a record whose remaining fields alone exceed the
/// budget stays over it. `omit` leaves that attribute's slot empty.
TrialDescription synthesize_description(const TrialRecord& r,
                                        std::size_t budget = kDefaultCharBudget,
                                        std::optional<Attribute> omit = std::nullopt);

/// Inverse of the template for texts whose values do not contain the
/// separator. Returns nullopt when the text does not follow the template.
/// Drug class comes back in its display form.
std::optional<std::array<std::string, kAttributeCount>> extract_fields(std::string_view text);

// ---------------------------------------------------------------------------
// Splitting and sampling
// ---------------------------------------------------------------------------

struct SplitRatios {
  double train = 0.65;
  double validation = 0.15;
  double test = 0.20;
};

struct DatasetSplit {
  std::vector<LabeledTrial> train;
  std::vector<LabeledTrial> validation;
  std::vector<LabeledTrial> test;
  std::optional<Date> train_end;
  std::optional<Date> validation_end;
};

/// Sizes for a split of `n` elements: floor(n * ratio) each, then the
/// remainder goes to train and then validation, one element each.
std::array<std::size_t, 3> split_sizes(std::size_t n, const SplitRatios& ratios);

/// Stable sort by (last_modified, nct_id), then contiguous train / validation
/// / test slices. Throws EmptyCorpus on empty input and InvalidArgument when
/// ratios are negative or do not sum to 1.
DatasetSplit chronological_split(std::span<const LabeledTrial> corpus,
                                 const SplitRatios& ratios = {});

/// Downsamples the majority class to the minority count. Survivors keep
/// their input order. Throws SingleClassCorpus if a class is absent.
std::vector<LabeledTrial> balance(std::span<const LabeledTrial> entries, std::uint64_t seed);

std::vector<LabeledTrial> filter_phase(std::span<const LabeledTrial> entries, Phase phase);

// ---------------------------------------------------------------------------
// Chat examples
// ---------------------------------------------------------------------------

/// System prompt for fine-tuning and inference.
inline constexpr std::string_view kSystemPrompt =
    "You are a medical expert who specializes in analyzing clinical trials. Your role is to "
    "help the user predict whether a clinical trial will progress to the next phase.\n\n"
    "Answer only with 'Yes' if it progresses to the next phase or 'No' if it doesn't.";

struct ChatExample {
  std::string system;
  std::string user;
  std::string assistant;

  friend bool operator==(const ChatExample&, const ChatExample&) = default;
};

/// Plain mode answers "Yes"/"No". Reasoning mode answers "No. {reason}" for a
/// No label that carries a reason.
ChatExample build_chat_example(const TrialDescription& d, const Label& l, bool reasoning);

}  // namespace ctp

#pragma once

// Line-delimited file formats shared by the command-line tool. Every file
// written here starts with a provenance line
//   {"_meta":{"tool":"ctp","version":..,"command":..,"seed":..,"config_digest":..}}
// which all readers skip.

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ctp/corpus.hpp"
#include "ctp/linkage.hpp"
#include "ctp/registry.hpp"

namespace ctp::io {

struct Provenance {
  std::string command;
  std::uint64_t seed = 0;
  std::string config_digest;
};

/// Provenance line without trailing newline. `extra` (a JSON object text, may
/// be empty) is merged into the "_meta" object.
std::string meta_line(const Provenance& p, const std::string& extra = "");

/// Provenance as a compact JSON object, used in binary file headers.
std::string meta_json(const Provenance& p);

// Trials / tracker ----------------------------------------------------------

void write_trials(std::ostream& out, const std::vector<TrialRecord>& trials,
                  const Provenance* p = nullptr);
void write_tracker(std::ostream& out, const std::vector<DrugProgressRecord>& tracker,
                   const Provenance* p = nullptr);

// Labeled corpus -------------------------------------------------------------
// Trial fields followed by "label" ("Yes"/"No"/null), "rule" (rule tag/null)
// and "reason" (string/null). Unlabeled trials carry nulls.

std::string serialize_labeled(const TrialRecord& t, const std::optional<Label>& label);

void write_labeled_corpus(std::ostream& out, const LabeledCorpus& corpus,
                          const Provenance* p = nullptr);
void write_labeled_entries(std::ostream& out, const std::vector<LabeledTrial>& entries,
                           const Provenance* p = nullptr);

/// Throws CorruptFile("<where> line N: ...") on any malformed line.
LabeledCorpus read_labeled_corpus(std::istream& in, const std::string& where = "input");

// Descriptions ---------------------------------------------------------------
// {"nct_id","phase","last_modified","label","text","char_count"}

void write_descriptions(std::ostream& out, const LabeledCorpus& corpus, std::size_t budget,
                        const Provenance* p = nullptr);

// Predictions ----------------------------------------------------------------
// {"nct_id","predicted":"Yes"|"No"|null,"vote_fraction":x} for the forest,
// {"nct_id","predicted":..,"raw_reply":".."} for the chat model.

struct PredictionRecord {
  std::string nct_id;
  std::optional<LabelValue> predicted;
  std::optional<double> vote_fraction;
  std::optional<std::string> raw_reply;
  std::optional<std::string> reason;
};

void write_predictions(std::ostream& out, const std::vector<PredictionRecord>& preds,
                       const Provenance* p = nullptr);
std::vector<PredictionRecord> read_predictions(std::istream& in,
                                               const std::string& where = "input");

// Files ----------------------------------------------------------------------

std::string read_file(const std::filesystem::path& path);
/// Writes to a temporary sibling and renames it into place.
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace ctp::io

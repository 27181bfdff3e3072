#pragma once

#include <array>
#include <cstddef>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ctp/date.hpp"

namespace ctp {

// ---------------------------------------------------------------------------
// Enumerations
// ---------------------------------------------------------------------------

/// Regulatory phase. Ordered: PhaseI < PhaseII < PhaseIII < Approved.
/// Approved only appears as the ultimate phase of a drug-tracker record.
enum class Phase : int { PhaseI = 1, PhaseII = 2, PhaseIII = 3, Approved = 4 };

inline constexpr std::array<Phase, 3> kTrialPhases = {Phase::PhaseI, Phase::PhaseII,
                                                      Phase::PhaseIII};
inline constexpr std::array<Phase, 4> kAllPhases = {Phase::PhaseI, Phase::PhaseII,
                                                    Phase::PhaseIII, Phase::Approved};

/// Accepts "I", "II", "III", "1".."3", "Phase 2", "Phase II", "Approved",
/// case-insensitively. Combined values such as "Phase 1/Phase 2" resolve to
/// the later phase.
std::optional<Phase> parse_phase(std::string_view text);

/// Canonical file token: "I", "II", "III" or "Approved".
std::string_view phase_token(Phase p) noexcept;

/// Human-readable: "Phase I", ..., "Approved".
std::string_view phase_name(Phase p) noexcept;

struct RecruitmentStatus {
  enum class Kind { Completed, Terminated, Other };

  Kind kind = Kind::Other;
  /// Original text for Other; canonical spelling otherwise.
  std::string text;

  static RecruitmentStatus parse(std::string_view raw);
  static RecruitmentStatus completed() { return {Kind::Completed, "Completed"}; }
  static RecruitmentStatus terminated() { return {Kind::Terminated, "Terminated"}; }

  bool is_terminated() const noexcept { return kind == Kind::Terminated; }

  friend bool operator==(const RecruitmentStatus&, const RecruitmentStatus&) = default;
};

enum class DrugClass { Biologic, Biosimilar, NME, NonNME, Vaccine, Unknown };

inline constexpr std::array<DrugClass, 6> kAllDrugClasses = {
    DrugClass::Biologic, DrugClass::Biosimilar, DrugClass::NME,
    DrugClass::NonNME,   DrugClass::Vaccine,    DrugClass::Unknown};

/// Never fails: unrecognized or empty input is Unknown.
DrugClass parse_drug_class(std::string_view text);
/// Short file token: "Biologic", "Biosimilar", "NME", "NonNME", "Vaccine", "Unknown".
std::string_view drug_class_token(DrugClass c) noexcept;
/// Long form used in trial descriptions, e.g. "New Molecular Entity (NME)".
std::string_view drug_class_display(DrugClass c) noexcept;

// ---------------------------------------------------------------------------
// Protocol attributes
// ---------------------------------------------------------------------------

/// The 11 protocol attributes in their fixed concatenation order. Every
/// description, embedding and drop-feature index uses this order.
enum class Attribute : std::size_t {
  Name = 0,
  Brief,
  DrugUsed,
  DrugClass,
  Indication,
  Target,
  Therapy,
  LeadSponsor,
  Criteria,
  PrimaryOutcome,
  SecondaryOutcome,
};

inline constexpr std::size_t kAttributeCount = 11;

inline constexpr std::array<Attribute, kAttributeCount> kAttributes = {
    Attribute::Name,        Attribute::Brief,          Attribute::DrugUsed,
    Attribute::DrugClass,   Attribute::Indication,     Attribute::Target,
    Attribute::Therapy,     Attribute::LeadSponsor,    Attribute::Criteria,
    Attribute::PrimaryOutcome, Attribute::SecondaryOutcome};

/// File key, e.g. "lead_sponsor".
std::string_view attribute_key(Attribute a) noexcept;
/// Description label, e.g. "LEAD SPONSOR".
std::string_view attribute_label(Attribute a) noexcept;
std::optional<Attribute> parse_attribute(std::string_view key);

constexpr std::size_t index_of(Attribute a) noexcept { return static_cast<std::size_t>(a); }

struct AttributeSet {
  std::string name;
  std::string brief;
  std::string drug_used;
  DrugClass drug_class = DrugClass::Unknown;
  std::string indication;
  std::string target;
  std::string therapy;
  std::string lead_sponsor;
  std::string criteria;
  std::string primary_outcome;
  std::string secondary_outcome;

  /// Text of one attribute; drug class renders as its display form.
  std::string text(Attribute a) const;
  /// Mutable access to a free-text attribute. Throws InvalidArgument for
  /// DrugClass, which is not free text.
  std::string& text_ref(Attribute a);

  friend bool operator==(const AttributeSet&, const AttributeSet&) = default;
};

// ---------------------------------------------------------------------------
// Records
// ---------------------------------------------------------------------------

/// One registry entry. Phase, status and date are optional only so that an
/// incomplete entry can be parsed and then reported as LowQuality; every
/// downstream stage only sees validated records.
struct TrialRecord {
  std::string nct_id;
  std::optional<std::string> drug_indication_id;
  std::optional<Phase> phase;
  std::optional<RecruitmentStatus> status;
  std::optional<Date> last_modified;
  std::optional<std::string> termination_reason;
  AttributeSet attributes;

  friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

struct DrugProgressRecord {
  std::string drug_indication_id;
  std::vector<std::string> nct_ids;  // sorted, unique
  Phase ultimate_phase = Phase::PhaseI;

  friend bool operator==(const DrugProgressRecord&, const DrugProgressRecord&) = default;
};

struct ParseError {
  enum class Kind { Syntax, DuplicateId };

  std::size_t line = 0;  // 1-based
  Kind kind = Kind::Syntax;
  std::string id;  // set for DuplicateId
  std::string reason;
};

template <typename Record>
struct ParseResult {
  std::vector<Record> records;
  std::vector<ParseError> errors;
};

/// Parses one trial per line. Blank lines and "_meta" header lines are
/// skipped. Never throws on bad input; every problem becomes a ParseError.
/// Duplicate NCT-IDs keep the record with the latest last_modified (the
/// earlier occurrence on ties) and report one DuplicateId per extra line.
ParseResult<TrialRecord> parse_trial_records(std::istream& in);
ParseResult<DrugProgressRecord> parse_drug_tracker(std::istream& in);

/// Parses a single trial line. Returns the failure reason on error.
std::optional<TrialRecord> parse_trial_line(std::string_view line, std::string* reason = nullptr);
std::optional<DrugProgressRecord> parse_tracker_line(std::string_view line,
                                                     std::string* reason = nullptr);

/// One-line serialized forms (no trailing newline), stable key order.
std::string serialize_trial(const TrialRecord& r);
std::string serialize_tracker(const DrugProgressRecord& r);

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct ValidationIssue {
  enum class Kind { Missing, Empty };

  std::string field;
  Kind kind = Kind::Missing;
  std::string message;
};

enum class Quality { Usable, LowQuality };

struct ValidationReport {
  std::string record_id;
  std::vector<ValidationIssue> issues;
  Quality quality = Quality::Usable;

  bool usable() const noexcept { return quality == Quality::Usable; }
};

/// LowQuality iff one of nct_id, phase, status, last_modified, name, brief or
/// criteria is missing or blank. Also rejects Approved as a trial phase.
ValidationReport validate_record(const TrialRecord& r);

}  // namespace ctp

#include "ctp/registry.hpp"

#include <algorithm>
#include <map>

#include "ctp/error.hpp"
#include "ctp/text.hpp"
#include "json.hpp"

namespace ctp {

using nlohmann::json;
using nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Enumerations
// ---------------------------------------------------------------------------

namespace {

std::optional<Phase> parse_single_phase(std::string_view raw) {
  std::string s = text::to_lower_ascii(text::trim(raw));
  std::string_view v = s;
  if (v.starts_with("early ")) v.remove_prefix(6);
  if (v.starts_with("phase")) v.remove_prefix(5);
  v = text::trim(v);
  if (v == "i" || v == "1") return Phase::PhaseI;
  if (v == "ii" || v == "2") return Phase::PhaseII;
  if (v == "iii" || v == "3") return Phase::PhaseIII;
  if (v == "approved") return Phase::Approved;
  return std::nullopt;
}

}  // namespace

std::optional<Phase> parse_phase(std::string_view text) {
  std::optional<Phase> best;
  std::size_t parts = 0;
  for (auto part : text::split(text, '/')) {
    ++parts;
    auto p = parse_single_phase(part);
    if (!p) return std::nullopt;
    if (!best || *p > *best) best = p;
  }
  return parts > 0 ? best : std::nullopt;
}

std::string_view phase_token(Phase p) noexcept {
  switch (p) {
    case Phase::PhaseI: return "I";
    case Phase::PhaseII: return "II";
    case Phase::PhaseIII: return "III";
    case Phase::Approved: return "Approved";
  }
  return "";
}

std::string_view phase_name(Phase p) noexcept {
  switch (p) {
    case Phase::PhaseI: return "Phase I";
    case Phase::PhaseII: return "Phase II";
    case Phase::PhaseIII: return "Phase III";
    case Phase::Approved: return "Approved";
  }
  return "";
}

RecruitmentStatus RecruitmentStatus::parse(std::string_view raw) {
  auto t = text::trim(raw);
  if (text::iequals(t, "completed")) return completed();
  if (text::iequals(t, "terminated")) return terminated();
  return {Kind::Other, std::string(raw)};
}

DrugClass parse_drug_class(std::string_view raw) {
  const std::string s = text::to_lower_ascii(text::trim(raw));
  if (s == "biologic" || s == "biologics") return DrugClass::Biologic;
  if (s == "biosimilar" || s == "biosimilars") return DrugClass::Biosimilar;
  if (s == "nme" || s == "new molecular entity" || s == "new molecular entity (nme)")
    return DrugClass::NME;
  if (s == "nonnme" || s == "non-nme" || s == "non nme" || s == "non-new molecular entity" ||
      s == "non-new molecular entity (non-nme)")
    return DrugClass::NonNME;
  if (s == "vaccine" || s == "vaccines") return DrugClass::Vaccine;
  return DrugClass::Unknown;
}

std::string_view drug_class_token(DrugClass c) noexcept {
  switch (c) {
    case DrugClass::Biologic: return "Biologic";
    case DrugClass::Biosimilar: return "Biosimilar";
    case DrugClass::NME: return "NME";
    case DrugClass::NonNME: return "NonNME";
    case DrugClass::Vaccine: return "Vaccine";
    case DrugClass::Unknown: return "Unknown";
  }
  return "Unknown";
}

std::string_view drug_class_display(DrugClass c) noexcept {
  switch (c) {
    case DrugClass::Biologic: return "Biologic";
    case DrugClass::Biosimilar: return "Biosimilar";
    case DrugClass::NME: return "New Molecular Entity (NME)";
    case DrugClass::NonNME: return "Non-New Molecular Entity (Non-NME)";
    case DrugClass::Vaccine: return "Vaccine";
    case DrugClass::Unknown: return "Unknown";
  }
  return "Unknown";
}

// ---------------------------------------------------------------------------
// Attributes
// ---------------------------------------------------------------------------

namespace {

struct AttributeInfo {
  std::string_view key;
  std::string_view label;
};

constexpr std::array<AttributeInfo, kAttributeCount> kAttributeInfo = {{
    {"name", "TRIAL NAME"},
    {"brief", "BRIEF"},
    {"drug_used", "DRUG USED"},
    {"drug_class", "DRUG CLASS"},
    {"indication", "INDICATION"},
    {"target", "TARGET"},
    {"therapy", "THERAPY"},
    {"lead_sponsor", "LEAD SPONSOR"},
    {"criteria", "CRITERIA"},
    {"primary_outcome", "PRIMARY OUTCOME"},
    {"secondary_outcome", "SECONDARY OUTCOME"},
}};

}  // namespace

std::string_view attribute_key(Attribute a) noexcept { return kAttributeInfo[index_of(a)].key; }
std::string_view attribute_label(Attribute a) noexcept { return kAttributeInfo[index_of(a)].label; }

std::optional<Attribute> parse_attribute(std::string_view key) {
  for (auto a : kAttributes) {
    if (attribute_key(a) == key) return a;
  }
  return std::nullopt;
}

namespace {

template <typename Set>
auto& free_text(Set& s, Attribute a) {
  switch (a) {
    case Attribute::Name: return s.name;
    case Attribute::Brief: return s.brief;
    case Attribute::DrugUsed: return s.drug_used;
    case Attribute::Indication: return s.indication;
    case Attribute::Target: return s.target;
    case Attribute::Therapy: return s.therapy;
    case Attribute::LeadSponsor: return s.lead_sponsor;
    case Attribute::Criteria: return s.criteria;
    case Attribute::PrimaryOutcome: return s.primary_outcome;
    case Attribute::SecondaryOutcome: return s.secondary_outcome;
    case Attribute::DrugClass: break;
  }
  throw InvalidArgument("drug_class is not a free-text attribute");
}

}  // namespace

std::string AttributeSet::text(Attribute a) const {
  if (a == Attribute::DrugClass) return std::string(drug_class_display(drug_class));
  return free_text(*this, a);
}

std::string& AttributeSet::text_ref(Attribute a) { return free_text(*this, a); }

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace {

struct LineError {
  std::string reason;
};

bool is_meta(const json& obj) { return obj.is_object() && obj.contains("_meta"); }

std::optional<std::string> optional_string(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw LineError{std::string("field '") + key + "' must be a string"};
  return it->get<std::string>();
}

std::string text_field(const json& obj, const char* key) {
  return optional_string(obj, key).value_or("");
}

TrialRecord trial_from_json(const json& obj) {
  if (!obj.is_object()) throw LineError{"record is not an object"};
  TrialRecord r;
  auto nct = optional_string(obj, "nct_id");
  if (!nct || text::trim(*nct).empty()) throw LineError{"missing nct_id"};
  r.nct_id = std::string(text::trim(*nct));

  if (auto di = optional_string(obj, "drug_indication_id"); di && !text::trim(*di).empty()) {
    r.drug_indication_id = std::string(text::trim(*di));
  }
  if (auto ph = optional_string(obj, "phase"); ph && !text::trim(*ph).empty()) {
    auto p = parse_phase(*ph);
    if (!p) throw LineError{"unrecognized phase '" + *ph + "'"};
    if (*p == Phase::Approved) throw LineError{"Approved is not a valid trial phase"};
    r.phase = p;
  }
  if (auto st = optional_string(obj, "status"); st && !text::trim(*st).empty()) {
    r.status = RecruitmentStatus::parse(*st);
  }
  if (auto lm = optional_string(obj, "last_modified"); lm && !text::trim(*lm).empty()) {
    auto d = Date::parse(text::trim(*lm));
    if (!d) throw LineError{"invalid last_modified '" + *lm + "'"};
    r.last_modified = d;
  }
  if (auto tr = optional_string(obj, "termination_reason"); tr && !tr->empty()) {
    r.termination_reason = tr;
  }

  auto& a = r.attributes;
  a.name = text_field(obj, "name");
  a.brief = text_field(obj, "brief");
  a.drug_used = text_field(obj, "drug_used");
  a.drug_class = parse_drug_class(text_field(obj, "drug_class"));
  a.indication = text_field(obj, "indication");
  a.target = text_field(obj, "target");
  a.therapy = text_field(obj, "therapy");
  a.lead_sponsor = text_field(obj, "lead_sponsor");
  a.criteria = text_field(obj, "criteria");
  a.primary_outcome = text_field(obj, "primary_outcome");
  a.secondary_outcome = text_field(obj, "secondary_outcome");
  return r;
}

DrugProgressRecord tracker_from_json(const json& obj) {
  if (!obj.is_object()) throw LineError{"record is not an object"};
  DrugProgressRecord r;
  auto id = optional_string(obj, "drug_indication_id");
  if (!id || text::trim(*id).empty()) throw LineError{"missing drug_indication_id"};
  r.drug_indication_id = std::string(text::trim(*id));

  auto it = obj.find("nct_ids");
  if (it == obj.end() || !it->is_array()) throw LineError{"nct_ids must be an array"};
  for (const auto& v : *it) {
    if (!v.is_string()) throw LineError{"nct_ids entries must be strings"};
    auto s = text::trim(v.get_ref<const std::string&>());
    if (!s.empty()) r.nct_ids.emplace_back(s);
  }
  if (r.nct_ids.empty()) throw LineError{"nct_ids is empty"};
  std::sort(r.nct_ids.begin(), r.nct_ids.end());
  r.nct_ids.erase(std::unique(r.nct_ids.begin(), r.nct_ids.end()), r.nct_ids.end());

  auto up = optional_string(obj, "ultimate_phase");
  if (!up) throw LineError{"missing ultimate_phase"};
  auto p = parse_phase(*up);
  if (!p) throw LineError{"unrecognized ultimate_phase '" + *up + "'"};
  r.ultimate_phase = *p;
  return r;
}

enum class LineKind { Blank, Meta, Record };

template <typename Record, typename Convert>
std::optional<Record> parse_line(std::string_view line, Convert convert, std::string* reason,
                                 LineKind* kind) {
  if (kind) *kind = LineKind::Record;
  if (text::trim(line).empty()) {
    if (kind) *kind = LineKind::Blank;
    return std::nullopt;
  }
  try {
    json obj = json::parse(line);
    if (is_meta(obj)) {
      if (kind) *kind = LineKind::Meta;
      return std::nullopt;
    }
    return convert(obj);
  } catch (const LineError& e) {
    if (reason) *reason = e.reason;
  } catch (const json::exception& e) {
    if (reason) *reason = e.what();
  }
  return std::nullopt;
}

bool newer(const std::optional<Date>& a, const std::optional<Date>& b) {
  if (!a) return false;
  if (!b) return true;
  return *a > *b;
}

}  // namespace

std::optional<TrialRecord> parse_trial_line(std::string_view line, std::string* reason) {
  return parse_line<TrialRecord>(line, trial_from_json, reason, nullptr);
}

std::optional<DrugProgressRecord> parse_tracker_line(std::string_view line, std::string* reason) {
  return parse_line<DrugProgressRecord>(line, tracker_from_json, reason, nullptr);
}

ParseResult<TrialRecord> parse_trial_records(std::istream& in) {
  ParseResult<TrialRecord> out;
  std::map<std::string, std::size_t> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string reason;
    LineKind kind;
    auto rec = parse_line<TrialRecord>(line, trial_from_json, &reason, &kind);
    if (kind != LineKind::Record) continue;
    if (!rec) {
      out.errors.push_back({lineno, ParseError::Kind::Syntax, {}, reason});
      continue;
    }
    auto [it, inserted] = seen.emplace(rec->nct_id, out.records.size());
    if (inserted) {
      out.records.push_back(std::move(*rec));
      continue;
    }
    auto& kept = out.records[it->second];
    out.errors.push_back({lineno, ParseError::Kind::DuplicateId, rec->nct_id,
                          "duplicate nct_id " + rec->nct_id});
    if (newer(rec->last_modified, kept.last_modified)) kept = std::move(*rec);
  }
  return out;
}

ParseResult<DrugProgressRecord> parse_drug_tracker(std::istream& in) {
  ParseResult<DrugProgressRecord> out;
  std::map<std::string, std::size_t> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string reason;
    LineKind kind;
    auto rec = parse_line<DrugProgressRecord>(line, tracker_from_json, &reason, &kind);
    if (kind != LineKind::Record) continue;
    if (!rec) {
      out.errors.push_back({lineno, ParseError::Kind::Syntax, {}, reason});
      continue;
    }
    if (!seen.emplace(rec->drug_indication_id, out.records.size()).second) {
      out.errors.push_back({lineno, ParseError::Kind::DuplicateId, rec->drug_indication_id,
                            "duplicate drug_indication_id " + rec->drug_indication_id});
      continue;
    }
    out.records.push_back(std::move(*rec));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

ordered_json nullable(const std::optional<std::string>& s) {
  return s ? ordered_json(*s) : ordered_json(nullptr);
}

std::string dump(const ordered_json& j) {
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

}  // namespace

std::string serialize_trial(const TrialRecord& r) {
  ordered_json j;
  j["nct_id"] = r.nct_id;
  j["drug_indication_id"] = nullable(r.drug_indication_id);
  j["phase"] = r.phase ? ordered_json(std::string(phase_token(*r.phase))) : ordered_json(nullptr);
  j["status"] = r.status ? ordered_json(r.status->text) : ordered_json(nullptr);
  j["last_modified"] =
      r.last_modified ? ordered_json(r.last_modified->to_string()) : ordered_json(nullptr);
  j["termination_reason"] = nullable(r.termination_reason);
  const auto& a = r.attributes;
  j["name"] = a.name;
  j["brief"] = a.brief;
  j["drug_used"] = a.drug_used;
  j["drug_class"] = std::string(drug_class_token(a.drug_class));
  j["indication"] = a.indication;
  j["target"] = a.target;
  j["therapy"] = a.therapy;
  j["lead_sponsor"] = a.lead_sponsor;
  j["criteria"] = a.criteria;
  j["primary_outcome"] = a.primary_outcome;
  j["secondary_outcome"] = a.secondary_outcome;
  return dump(j);
}

std::string serialize_tracker(const DrugProgressRecord& r) {
  ordered_json j;
  j["drug_indication_id"] = r.drug_indication_id;
  j["nct_ids"] = r.nct_ids;
  j["ultimate_phase"] = std::string(phase_token(r.ultimate_phase));
  return dump(j);
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

ValidationReport validate_record(const TrialRecord& r) {
  ValidationReport rep;
  rep.record_id = r.nct_id;
  auto missing = [&](std::string field, std::string msg) {
    rep.issues.push_back({std::move(field), ValidationIssue::Kind::Missing, std::move(msg)});
  };
  auto empty = [&](std::string field) {
    rep.issues.push_back({field, ValidationIssue::Kind::Empty, field + " is empty"});
  };

  if (text::trim(r.nct_id).empty()) empty("nct_id");
  if (!r.phase) {
    missing("phase", "phase is missing");
  } else if (*r.phase == Phase::Approved) {
    missing("phase", "Approved is not a trial phase");
  }
  if (!r.status || text::trim(r.status->text).empty()) missing("status", "status is missing");
  if (!r.last_modified) missing("last_modified", "last_modified is missing");
  if (text::trim(r.attributes.name).empty()) empty("name");
  if (text::trim(r.attributes.brief).empty()) empty("brief");
  if (text::trim(r.attributes.criteria).empty()) empty("criteria");

  rep.quality = rep.issues.empty() ? Quality::Usable : Quality::LowQuality;
  return rep;
}

}  // namespace ctp

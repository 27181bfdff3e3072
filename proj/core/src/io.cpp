#include "ctp/io.hpp"

#include <fstream>
#include <sstream>

#include "ctp/error.hpp"
#include "ctp/text.hpp"
#include "json.hpp"

namespace ctp::io {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string dump(const ordered_json& j) {
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

ordered_json meta_object(const Provenance& p) {
  ordered_json m;
  m["tool"] = "ctp";
  m["version"] = CTP_VERSION;
  m["command"] = p.command;
  m["seed"] = p.seed;
  m["config_digest"] = p.config_digest;
  return m;
}

void maybe_meta(std::ostream& out, const Provenance* p, const std::string& extra = "") {
  if (p) out << meta_line(*p, extra) << '\n';
}

ordered_json nullable(const std::optional<std::string>& s) {
  return s ? ordered_json(*s) : ordered_json(nullptr);
}

}  // namespace

std::string meta_line(const Provenance& p, const std::string& extra) {
  ordered_json m = meta_object(p);
  if (!extra.empty()) {
    const auto fields = ordered_json::parse(extra);
    for (const auto& [k, v] : fields.items()) m[k] = v;
  }
  ordered_json j;
  j["_meta"] = std::move(m);
  return dump(j);
}

std::string meta_json(const Provenance& p) { return dump(meta_object(p)); }

void write_trials(std::ostream& out, const std::vector<TrialRecord>& trials, const Provenance* p) {
  maybe_meta(out, p);
  for (const auto& t : trials) out << serialize_trial(t) << '\n';
}

void write_tracker(std::ostream& out, const std::vector<DrugProgressRecord>& tracker,
                   const Provenance* p) {
  maybe_meta(out, p);
  for (const auto& r : tracker) out << serialize_tracker(r) << '\n';
}

// ---------------------------------------------------------------------------
// Labeled corpus
// ---------------------------------------------------------------------------

std::string serialize_labeled(const TrialRecord& t, const std::optional<Label>& label) {
  auto j = ordered_json::parse(serialize_trial(t));
  if (label) {
    j["label"] = std::string(label_token(label->value));
    j["rule"] = std::string(rule_token(label->rule));
    j["reason"] = nullable(label->reason);
  } else {
    j["label"] = nullptr;
    j["rule"] = nullptr;
    j["reason"] = nullptr;
  }
  return dump(j);
}

void write_labeled_corpus(std::ostream& out, const LabeledCorpus& corpus, const Provenance* p) {
  const auto& s = corpus.link_stats;
  ordered_json stats;
  stats["usable"] = s.usable;
  stats["low_quality"] = s.low_quality;
  stats["linked_by_nct"] = s.linked_by_nct;
  stats["linked_by_drug_indication"] = s.linked_by_drug_indication;
  stats["unlinked"] = s.unlinked;
  stats["rule1"] = s.rule1;
  stats["rule2"] = s.rule2;
  stats["rule3"] = s.rule3;
  stats["phase_inconsistent"] = s.phase_inconsistent;
  ordered_json extra;
  extra["link_stats"] = std::move(stats);
  maybe_meta(out, p, dump(extra));
  for (const auto& e : corpus.entries) out << serialize_labeled(e.trial, e.label) << '\n';
  for (const auto& t : corpus.unlabeled) out << serialize_labeled(t, std::nullopt) << '\n';
}

void write_labeled_entries(std::ostream& out, const std::vector<LabeledTrial>& entries,
                           const Provenance* p) {
  maybe_meta(out, p);
  for (const auto& e : entries) out << serialize_labeled(e.trial, e.label) << '\n';
}

LabeledCorpus read_labeled_corpus(std::istream& in, const std::string& where) {
  LabeledCorpus corpus;
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& why) {
    throw CorruptFile(where + " line " + std::to_string(lineno) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      fail(e.what());
    }
    if (!j.is_object()) fail("record is not an object");
    if (j.contains("_meta")) {
      const auto& m = j["_meta"];
      if (m.is_object() && m.contains("link_stats")) {
        const auto& s = m["link_stats"];
        auto& st = corpus.link_stats;
        st.usable = s.value("usable", std::size_t{0});
        st.low_quality = s.value("low_quality", std::size_t{0});
        st.linked_by_nct = s.value("linked_by_nct", std::size_t{0});
        st.linked_by_drug_indication = s.value("linked_by_drug_indication", std::size_t{0});
        st.unlinked = s.value("unlinked", std::size_t{0});
        st.rule1 = s.value("rule1", std::size_t{0});
        st.rule2 = s.value("rule2", std::size_t{0});
        st.rule3 = s.value("rule3", std::size_t{0});
        st.phase_inconsistent = s.value("phase_inconsistent", std::size_t{0});
      }
      continue;
    }
    std::string reason;
    auto trial = parse_trial_line(line, &reason);
    if (!trial) fail(reason);

    const auto label_it = j.find("label");
    if (label_it == j.end() || label_it->is_null()) {
      corpus.unlabeled.push_back(std::move(*trial));
      continue;
    }
    if (!label_it->is_string()) fail("label must be a string or null");
    auto value = parse_label_value(label_it->get<std::string>());
    if (!value) fail("unknown label '" + label_it->get<std::string>() + "'");
    const auto rule_it = j.find("rule");
    if (rule_it == j.end() || !rule_it->is_string()) fail("labeled entry without rule");
    auto rule = parse_rule(rule_it->get<std::string>());
    if (!rule) fail("unknown rule '" + rule_it->get<std::string>() + "'");
    Label label{*value, *rule, std::nullopt};
    if (auto r = j.find("reason"); r != j.end() && r->is_string()) label.reason = r->get<std::string>();
    corpus.entries.push_back({std::move(*trial), std::move(label)});
  }
  return corpus;
}

// ---------------------------------------------------------------------------
// Descriptions
// ---------------------------------------------------------------------------

void write_descriptions(std::ostream& out, const LabeledCorpus& corpus, std::size_t budget,
                        const Provenance* p) {
  maybe_meta(out, p);
  auto emit = [&](const TrialRecord& t, const std::optional<Label>& label) {
    const auto d = synthesize_description(t, budget);
    ordered_json j;
    j["nct_id"] = t.nct_id;
    j["phase"] = t.phase ? ordered_json(std::string(phase_token(*t.phase))) : ordered_json(nullptr);
    j["last_modified"] =
        t.last_modified ? ordered_json(t.last_modified->to_string()) : ordered_json(nullptr);
    j["label"] = label ? ordered_json(std::string(label_token(label->value))) : ordered_json(nullptr);
    j["text"] = d.text;
    j["char_count"] = d.char_count;
    out << dump(j) << '\n';
  };
  for (const auto& e : corpus.entries) emit(e.trial, e.label);
  for (const auto& t : corpus.unlabeled) emit(t, std::nullopt);
}

// ---------------------------------------------------------------------------
// Predictions
// ---------------------------------------------------------------------------

void write_predictions(std::ostream& out, const std::vector<PredictionRecord>& preds,
                       const Provenance* p) {
  maybe_meta(out, p);
  for (const auto& r : preds) {
    ordered_json j;
    j["nct_id"] = r.nct_id;
    j["predicted"] =
        r.predicted ? ordered_json(std::string(label_token(*r.predicted))) : ordered_json(nullptr);
    if (r.vote_fraction) j["vote_fraction"] = *r.vote_fraction;
    if (r.raw_reply) j["raw_reply"] = *r.raw_reply;
    if (r.reason) j["reason"] = *r.reason;
    out << dump(j) << '\n';
  }
}

std::vector<PredictionRecord> read_predictions(std::istream& in, const std::string& where) {
  std::vector<PredictionRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    try {
      const json j = json::parse(line);
      if (j.contains("_meta")) continue;
      PredictionRecord r;
      r.nct_id = j.at("nct_id").get<std::string>();
      const auto& p = j.at("predicted");
      if (!p.is_null()) {
        r.predicted = parse_label_value(p.get<std::string>());
        if (!r.predicted) throw CorruptFile("unknown prediction '" + p.get<std::string>() + "'");
      }
      if (j.contains("vote_fraction")) r.vote_fraction = j["vote_fraction"].get<double>();
      if (j.contains("raw_reply")) r.raw_reply = j["raw_reply"].get<std::string>();
      if (j.contains("reason")) r.reason = j["reason"].get<std::string>();
      out.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw CorruptFile(where + " line " + std::to_string(lineno) + ": " + e.what());
    } catch (const CorruptFile& e) {
      throw CorruptFile(where + " line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out << content;
    if (!out) throw IoError("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace ctp::io

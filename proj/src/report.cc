#include "consent_audit/report.h"

#include <algorithm>
#include <map>
#include <sstream>

#include "consent_audit/requirements.h"

namespace consent_audit {
namespace {

using nlohmann::json;

const json& Field(const json& obj, std::string_view key, const std::string& path) {
  if (!obj.is_object()) throw SchemaError(path, "expected object");
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(path + "." + std::string(key), "missing field");
  return *it;
}

std::string StringField(const json& obj, std::string_view key, const std::string& path) {
  const auto& v = Field(obj, key, path);
  if (!v.is_string()) throw SchemaError(path + "." + std::string(key), "expected string");
  return v.get<std::string>();
}

const json& ArrayField(const json& obj, std::string_view key, const std::string& path) {
  const auto& v = Field(obj, key, path);
  if (!v.is_array()) throw SchemaError(path + "." + std::string(key), "expected array");
  return v;
}

UtcTime TimeField(const json& obj, std::string_view key, const std::string& path) {
  auto text = StringField(obj, key, path);
  auto t = ParseUtc(text);
  if (!t) throw SchemaError(path + "." + std::string(key), "expected YYYY-MM-DDTHH:MM:SSZ");
  return *t;
}

int RequirementField(const json& obj, std::string_view key, const std::string& path) {
  auto n = ParseRequirementId(StringField(obj, key, path));
  if (!n) throw SchemaError(path + "." + std::string(key), "expected R1..R22");
  return *n;
}

template <typename E>
E EnumField(const json& obj, std::string_view key, const std::string& path,
            std::optional<E> (*parse)(std::string_view)) {
  auto v = parse(StringField(obj, key, path));
  if (!v) throw SchemaError(path + "." + std::string(key), "unknown value");
  return *v;
}

std::string RequirementId(int n) { return "R" + std::to_string(n); }

json AnswerJson(const OperatorAnswer& a) {
  return {{"operator", a.operator_name}, {"note", a.note}, {"answered_at", FormatUtc(a.answered_at)}};
}

Evidence EvidenceFromJson(const std::string& ref, const json& j, const std::string& path) {
  Evidence e;
  e.ref = ref;
  e.kind = EnumField<EvidenceKind>(j, "kind", path, &EvidenceKindFromString);
  e.payload = Field(j, "payload", path);
  const auto& sref = Field(j, "session_ref", path);
  e.session_ref.session_file = StringField(sref, "session_file", path + ".session_ref");
  const auto& t = Field(sref, "t_ms", path + ".session_ref");
  if (t.is_number_integer()) {
    e.session_ref.t_ms = t.get<std::int64_t>();
  } else if (!t.is_null()) {
    throw SchemaError(path + ".session_ref.t_ms", "expected integer or null");
  }
  return e;
}

std::vector<std::string> Strings(const json& arr, const std::string& path) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_string()) throw SchemaError(path + "[" + std::to_string(i) + "]", "expected string");
    out.push_back(arr[i].get<std::string>());
  }
  return out;
}

std::string MarkdownCell(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '|') {
      out += "\\|";
    } else if (c == '\n') {
      out += ' ';
    } else {
      out += c;
    }
  }
  return out;
}

}  // namespace

json EvidenceToJson(const Evidence& e) {
  return {{"kind", ToString(e.kind)},
          {"payload", e.payload},
          {"session_ref",
           {{"session_file", e.session_ref.session_file},
            {"t_ms", e.session_ref.t_ms ? json(*e.session_ref.t_ms) : json(nullptr)}}}};
}

const SiteResult* AuditReport::FindSite(std::string_view site_id) const {
  for (const auto& s : sites) {
    if (s.site_id == site_id) return &s;
  }
  return nullptr;
}

SiteResult* AuditReport::FindSite(std::string_view site_id) {
  return const_cast<SiteResult*>(std::as_const(*this).FindSite(site_id));
}

std::vector<std::string> DefaultLimitations() {
  return {
      "Identifier detection is a heuristic score, not proof; cookies and localStorage share "
      "one threshold set.",
      "Identifiers sent encrypted or obfuscated are not detected; only exact, hex and base64 "
      "re-encodings of stored values are matched.",
      "Only requests to third-party registrable domains are checked for identifier sending.",
      "A negative consent stored before any user action is reported as compliant with an "
      "advisory; whether it breaches post-consent registration is unsettled.",
      "The consent-wall area threshold is a configured value, not a legal one.",
      "Fingerprinting and other storage-less tracking are not assessed.",
  };
}

ManualAnswer ParseManualAnswer(const json& body) {
  const std::string path = "$";
  if (!body.is_object()) throw SchemaError(path, "expected object");
  static const std::vector<std::string> kKeys = {"site_id",  "requirement", "outcome",
                                                 "operator", "note",        "answered_at"};
  for (const auto& [key, _] : body.items()) {
    if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end()) {
      throw SchemaError(path + "." + key, "unknown field");
    }
  }
  ManualAnswer a;
  a.site_id = StringField(body, "site_id", path);
  a.requirement = RequirementField(body, "requirement", path);
  a.outcome = EnumField<Outcome>(body, "outcome", path, &OutcomeFromString);
  if (a.outcome != Outcome::kCompliant && a.outcome != Outcome::kViolation &&
      a.outcome != Outcome::kInconclusive) {
    throw SchemaError(path + ".outcome", "must be compliant, violation or inconclusive");
  }
  a.operator_name = StringField(body, "operator", path);
  if (a.operator_name.empty()) throw SchemaError(path + ".operator", "must not be empty");
  a.note = body.contains("note") ? StringField(body, "note", path) : "";
  a.answered_at = TimeField(body, "answered_at", path);
  return a;
}

json ManualAnswerToJson(const ManualAnswer& a) {
  return {{"site_id", a.site_id},
          {"requirement", RequirementId(a.requirement)},
          {"outcome", ToString(a.outcome)},
          {"operator", a.operator_name},
          {"note", a.note},
          {"answered_at", FormatUtc(a.answered_at)}};
}

SiteResult BuildSiteResult(std::string site_id, std::string url, std::string dpa_profile,
                           std::vector<Verdict> verdicts, std::vector<Finding> findings) {
  for (auto& v : verdicts) {
    for (std::size_t i = 0; i < v.evidence.size(); ++i) {
      v.evidence[i].ref = RequirementId(v.requirement) + "-" + std::to_string(i);
    }
  }
  for (std::size_t f = 0; f < findings.size(); ++f) {
    for (std::size_t i = 0; i < findings[f].evidence.size(); ++i) {
      findings[f].evidence[i].ref = "F" + std::to_string(f) + "-" + std::to_string(i);
    }
  }
  return {std::move(site_id), std::move(url), std::move(dpa_profile), std::move(verdicts),
          std::move(findings)};
}

std::vector<Verdict> Merge(std::vector<Verdict> verdicts, std::span<const ManualAnswer> answers) {
  for (auto& v : verdicts) {
    v.outcome = v.automated_outcome;
    v.provenance = Provenance::kAutomated;
    v.answer.reset();
  }
  for (const auto& a : answers) {
    auto it = std::find_if(verdicts.begin(), verdicts.end(),
                           [&](const Verdict& v) { return v.requirement == a.requirement; });
    if (it == verdicts.end()) {
      throw NotFoundError("no verdict for " + RequirementId(a.requirement));
    }
    if (!AcceptsAnswers(it->automated_outcome)) {
      throw ConflictError(RequirementId(a.requirement) + " was decided by the automated pass as " +
                          std::string(ToString(it->automated_outcome)));
    }
    it->outcome = a.outcome;
    it->provenance = it->automated_outcome == Outcome::kUserStudyPending
                         ? Provenance::kOperatorProxy
                         : Provenance::kOperator;
    it->answer = OperatorAnswer{a.operator_name, a.note, a.answered_at};
  }
  return verdicts;
}

void ApplyAnswer(AuditReport& report, const ManualAnswer& answer) {
  SiteResult* site = report.FindSite(answer.site_id);
  if (site == nullptr) throw NotFoundError("unknown site " + answer.site_id);
  auto it = std::find_if(site->verdicts.begin(), site->verdicts.end(),
                         [&](const Verdict& v) { return v.requirement == answer.requirement; });
  if (it == site->verdicts.end()) {
    throw NotFoundError("no verdict for " + RequirementId(answer.requirement));
  }
  std::vector<Verdict> one = {*it};
  *it = Merge(std::move(one), std::span(&answer, 1)).front();
}

json Summary(const AuditReport& report) {
  json by_requirement = json::object();
  json by_outcome = json::object();
  for (int n = 1; n <= kNumRequirements; ++n) {
    json counts = json::object();
    for (int o = 0; o < kNumOutcomes; ++o) counts[std::string(ToString(Outcome(o)))] = 0;
    by_requirement[RequirementId(n)] = counts;
  }
  for (int o = 0; o < kNumOutcomes; ++o) by_outcome[std::string(ToString(Outcome(o)))] = 0;
  for (const auto& s : report.sites) {
    for (const auto& v : s.verdicts) {
      std::string o(ToString(v.outcome));
      auto& slot = by_requirement[RequirementId(v.requirement)][o];
      slot = slot.get<int>() + 1;
      by_outcome[o] = by_outcome[o].get<int>() + 1;
    }
  }
  return {{"sites", report.sites.size()},
          {"by_outcome", by_outcome},
          {"by_requirement", by_requirement}};
}

json VerdictToJson(const Verdict& v) {
  const auto& info = Requirement(v.requirement);
  json refs = json::array();
  for (const auto& e : v.evidence) refs.push_back(e.ref);
  return {{"requirement", info.id},
          {"title", info.title},
          {"group", ToToken(info.group)},
          {"assessment", ToString(info.assessment)},
          {"outcome", ToString(v.outcome)},
          {"automated_outcome", ToString(v.automated_outcome)},
          {"provenance", ToString(v.provenance)},
          {"confidence_note", v.confidence_note},
          {"advisories", v.advisories},
          {"evidence", refs},
          {"answer", v.answer ? AnswerJson(*v.answer) : json(nullptr)}};
}

json SiteToJson(const SiteResult& site) {
  json verdicts = json::array();
  json index = json::object();
  for (const auto& v : site.verdicts) {
    verdicts.push_back(VerdictToJson(v));
    for (const auto& e : v.evidence) index[e.ref] = EvidenceToJson(e);
  }
  json findings = json::array();
  for (const auto& f : site.findings) {
    json refs = json::array();
    for (const auto& e : f.evidence) {
      refs.push_back(e.ref);
      index[e.ref] = EvidenceToJson(e);
    }
    findings.push_back({{"kind", f.kind}, {"message", f.message}, {"evidence", refs}});
  }
  return {{"site_id", site.site_id},
          {"url", site.url},
          {"dpa_profile", site.dpa_profile},
          {"verdicts", verdicts},
          {"findings", findings},
          {"evidence_index", index}};
}

json ReportToJson(const AuditReport& report) {
  json sites = json::array();
  for (const auto& s : report.sites) sites.push_back(SiteToJson(s));
  return {{"report_version", kReportVersion},
          {"tool_version", report.tool_version},
          {"config_digest", report.config_digest},
          {"generated_at", FormatUtc(report.generated_at)},
          {"metadata",
           {{"dpa_positioning", report.dpa_positioning}, {"limitations", report.limitations}}},
          {"summary", Summary(report)},
          {"sites", sites}};
}

std::string RenderJson(const AuditReport& report) { return ReportToJson(report).dump(2) + "\n"; }

AuditReport ReportFromJson(const json& doc) {
  const std::string root = "$";
  if (!doc.is_object()) throw SchemaError(root, "expected object");
  const auto& version = Field(doc, "report_version", root);
  if (!version.is_number_integer() || version.get<int>() != kReportVersion) {
    throw SchemaError("$.report_version", "unsupported version");
  }
  AuditReport r;
  r.tool_version = StringField(doc, "tool_version", root);
  r.config_digest = StringField(doc, "config_digest", root);
  r.generated_at = TimeField(doc, "generated_at", root);
  const auto& meta = Field(doc, "metadata", root);
  r.dpa_positioning = Field(meta, "dpa_positioning", "$.metadata");
  r.limitations = Strings(ArrayField(meta, "limitations", "$.metadata"), "$.metadata.limitations");

  const auto& sites = ArrayField(doc, "sites", root);
  for (std::size_t si = 0; si < sites.size(); ++si) {
    std::string sp = "$.sites[" + std::to_string(si) + "]";
    const auto& sj = sites[si];
    SiteResult site;
    site.site_id = StringField(sj, "site_id", sp);
    site.url = StringField(sj, "url", sp);
    site.dpa_profile = StringField(sj, "dpa_profile", sp);
    const auto& index = Field(sj, "evidence_index", sp);
    if (!index.is_object()) throw SchemaError(sp + ".evidence_index", "expected object");
    auto resolve = [&](const json& refs, const std::string& path) {
      std::vector<Evidence> out;
      for (const auto& ref : Strings(refs, path)) {
        auto it = index.find(ref);
        if (it == index.end()) throw InvariantError(path, "unresolved evidence ref " + ref);
        out.push_back(EvidenceFromJson(ref, *it, sp + ".evidence_index." + ref));
      }
      return out;
    };
    const auto& verdicts = ArrayField(sj, "verdicts", sp);
    for (std::size_t vi = 0; vi < verdicts.size(); ++vi) {
      std::string vp = sp + ".verdicts[" + std::to_string(vi) + "]";
      const auto& vj = verdicts[vi];
      Verdict v;
      v.requirement = RequirementField(vj, "requirement", vp);
      v.outcome = EnumField<Outcome>(vj, "outcome", vp, &OutcomeFromString);
      v.automated_outcome = EnumField<Outcome>(vj, "automated_outcome", vp, &OutcomeFromString);
      v.provenance = EnumField<Provenance>(vj, "provenance", vp, &ProvenanceFromString);
      v.confidence_note = StringField(vj, "confidence_note", vp);
      v.advisories = Strings(ArrayField(vj, "advisories", vp), vp + ".advisories");
      v.evidence = resolve(ArrayField(vj, "evidence", vp), vp + ".evidence");
      const auto& a = Field(vj, "answer", vp);
      if (!a.is_null()) {
        v.answer = OperatorAnswer{StringField(a, "operator", vp + ".answer"),
                                  StringField(a, "note", vp + ".answer"),
                                  TimeField(a, "answered_at", vp + ".answer")};
      }
      site.verdicts.push_back(std::move(v));
    }
    if (site.verdicts.size() != static_cast<std::size_t>(kNumRequirements)) {
      throw InvariantError(sp + ".verdicts", "expected 22 verdicts");
    }
    for (int n = 1; n <= kNumRequirements; ++n) {
      if (site.verdicts[n - 1].requirement != n) {
        throw InvariantError(sp + ".verdicts", "verdicts must be ordered R1..R22");
      }
    }
    const auto& findings = ArrayField(sj, "findings", sp);
    for (std::size_t fi = 0; fi < findings.size(); ++fi) {
      std::string fp = sp + ".findings[" + std::to_string(fi) + "]";
      Finding f;
      f.kind = StringField(findings[fi], "kind", fp);
      f.message = StringField(findings[fi], "message", fp);
      f.evidence = resolve(ArrayField(findings[fi], "evidence", fp), fp + ".evidence");
      site.findings.push_back(std::move(f));
    }
    r.sites.push_back(std::move(site));
  }
  if (Field(doc, "summary", root) != Summary(r)) {
    throw InvariantError("$.summary", "summary does not match the verdicts");
  }
  return r;
}

AuditReport ParseReport(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw SchemaError("$", e.what());
  }
  return ReportFromJson(doc);
}

std::string RenderMarkdown(const AuditReport& report) {
  std::ostringstream out;
  out << "# Consent audit report\n\n";
  out << "- Generated: " << FormatUtc(report.generated_at) << "\n";
  out << "- Tool version: " << report.tool_version << "\n";
  out << "- Config digest: `" << report.config_digest << "`\n";
  out << "- Sites: " << report.sites.size() << "\n";
  for (const auto& site : report.sites) {
    out << "\n## " << site.site_id << " (" << site.url << ")\n\n";
    out << "Lifespan profile: " << site.dpa_profile << "\n";
    for (auto group : AllRequirementGroups()) {
      out << "\n### " << ToString(group) << "\n\n";
      out << "| Requirement | Outcome | Provenance | Evidence | Note |\n";
      out << "|---|---|---|---|---|\n";
      for (const auto& v : site.verdicts) {
        const auto& info = Requirement(v.requirement);
        if (info.group != group) continue;
        std::string refs;
        for (const auto& e : v.evidence) refs += (refs.empty() ? "" : ", ") + e.ref;
        std::string note = v.confidence_note;
        for (const auto& a : v.advisories) note += (note.empty() ? "" : "; ") + ("advisory: " + a);
        out << "| " << info.id << " " << MarkdownCell(info.title) << " | " << ToString(v.outcome)
            << " | " << ToString(v.provenance) << " | " << refs << " | " << MarkdownCell(note)
            << " |\n";
      }
    }
    if (!site.findings.empty()) {
      out << "\n#### Findings\n\n";
      for (const auto& f : site.findings) {
        out << "- " << f.kind << ": " << MarkdownCell(f.message) << "\n";
      }
    }
  }
  return out.str();
}

int ExitCodeFor(const AuditReport& report) {
  bool inconclusive = false;
  for (const auto& s : report.sites) {
    for (const auto& v : s.verdicts) {
      if (v.outcome == Outcome::kViolation) return 2;
      inconclusive |= v.outcome == Outcome::kInconclusive;
    }
  }
  return inconclusive ? 3 : 0;
}

}  // namespace consent_audit

#ifndef CONSENT_AUDIT_REPORT_H_
#define CONSENT_AUDIT_REPORT_H_

// Audit report: automated verdicts merged with operator answers, plus the
// JSON and markdown renderings. The JSON layout is documented in
// docs/report-schema.md and is the API the review console consumes.

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "consent_audit/errors.h"
#include "consent_audit/time_util.h"
#include "consent_audit/verdict.h"

namespace consent_audit {

inline constexpr int kReportVersion = 1;

// An answer targets a verdict the automated pass already decided.
class ConflictError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

struct ManualAnswer {
  std::string site_id;
  int requirement = 0;
  Outcome outcome = Outcome::kInconclusive;  // compliant, violation or inconclusive
  std::string operator_name;
  std::string note;
  UtcTime answered_at{};
  bool operator==(const ManualAnswer&) const = default;
};

// Throws SchemaError naming the bad field.
ManualAnswer ParseManualAnswer(const nlohmann::json& body);
nlohmann::json ManualAnswerToJson(const ManualAnswer& answer);

struct SiteResult {
  std::string site_id;
  std::string url;
  std::string dpa_profile;
  std::vector<Verdict> verdicts;  // R1..R22
  std::vector<Finding> findings;
  bool operator==(const SiteResult&) const = default;
};

struct AuditReport {
  std::vector<SiteResult> sites;
  std::string tool_version;
  std::string config_digest;
  UtcTime generated_at{};
  nlohmann::json dpa_positioning = nlohmann::json::object();
  std::vector<std::string> limitations;
  bool operator==(const AuditReport&) const = default;

  const SiteResult* FindSite(std::string_view site_id) const;
  SiteResult* FindSite(std::string_view site_id);
};

// Known limitations stated in every report.
std::vector<std::string> DefaultLimitations();

// Gives every evidence item a site-unique ref ("R1-0", "F0-0") and returns
// the assembled result.
SiteResult BuildSiteResult(std::string site_id, std::string url, std::string dpa_profile,
                           std::vector<Verdict> verdicts, std::vector<Finding> findings);

// Applies answers on top of the automated outcomes. Only verdicts whose
// automated outcome is manual_pending or user_study_pending accept answers
// (ConflictError otherwise); the later answer wins for the same requirement.
std::vector<Verdict> Merge(std::vector<Verdict> verdicts, std::span<const ManualAnswer> answers);

// Merges one answer into the report. Throws NotFoundError, ConflictError.
void ApplyAnswer(AuditReport& report, const ManualAnswer& answer);

// Outcome counts per requirement, recomputed from the verdicts.
nlohmann::json Summary(const AuditReport& report);

nlohmann::json ReportToJson(const AuditReport& report);
std::string RenderJson(const AuditReport& report);
std::string RenderMarkdown(const AuditReport& report);

// Inverse of RenderJson. Throws SchemaError / InvariantError.
AuditReport ParseReport(std::string_view json_text);
AuditReport ReportFromJson(const nlohmann::json& doc);

nlohmann::json EvidenceToJson(const Evidence& e);
nlohmann::json VerdictToJson(const Verdict& v);
nlohmann::json SiteToJson(const SiteResult& site);

// 2 = a violation, 3 = no violation but an inconclusive verdict, 0 otherwise.
int ExitCodeFor(const AuditReport& report);

}  // namespace consent_audit

#endif  // CONSENT_AUDIT_REPORT_H_

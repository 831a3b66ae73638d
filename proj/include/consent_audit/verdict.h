#ifndef CONSENT_AUDIT_VERDICT_H_
#define CONSENT_AUDIT_VERDICT_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "consent_audit/requirements.h"
#include "consent_audit/time_util.h"

namespace consent_audit {

enum class Outcome {
  kCompliant,
  kViolation,
  kInconclusive,
  kManualPending,
  kUserStudyPending,
  kNotAssessable,
};

inline constexpr int kNumOutcomes = 6;

std::string_view ToString(Outcome o);
std::optional<Outcome> OutcomeFromString(std::string_view s);

enum class Provenance { kAutomated, kOperator, kOperatorProxy };

std::string_view ToString(Provenance p);
std::optional<Provenance> ProvenanceFromString(std::string_view s);

enum class EvidenceKind {
  kCookie,
  kRequest,
  kStorageEntry,
  kConsentString,
  kBannerGeometry,
  kTextMatch,
  kScreenshotRef,
};

std::string_view ToString(EvidenceKind k);
std::optional<EvidenceKind> EvidenceKindFromString(std::string_view s);

struct SessionRef {
  std::string session_file;
  std::optional<std::int64_t> t_ms;
  bool operator==(const SessionRef&) const = default;
};

struct Evidence {
  std::string ref;  // unique within a site, assigned when the site result is built
  EvidenceKind kind = EvidenceKind::kCookie;
  nlohmann::json payload = nlohmann::json::object();
  SessionRef session_ref;
  bool operator==(const Evidence&) const = default;
};

struct OperatorAnswer {
  std::string operator_name;
  std::string note;
  UtcTime answered_at{};
  bool operator==(const OperatorAnswer&) const = default;
};

struct Verdict {
  int requirement = 1;
  Outcome outcome = Outcome::kInconclusive;
  std::vector<Evidence> evidence;
  std::string confidence_note;
  std::vector<std::string> advisories;
  Provenance provenance = Provenance::kAutomated;
  // Outcome of the automated pass; kept so operator answers can be
  // re-applied and checked against it.
  Outcome automated_outcome = Outcome::kInconclusive;
  std::optional<OperatorAnswer> answer;
  bool operator==(const Verdict&) const = default;
};

struct Finding {
  std::string kind;  // "lifespan_analytics", "lifespan_consent_storage"
  std::string message;
  std::vector<Evidence> evidence;
  bool operator==(const Finding&) const = default;
};

// Whether the automated pass may emit |outcome| for a requirement assessed
// in |mode|.
bool AutomatedOutcomePermitted(AssessmentMode mode, Outcome outcome);

// Whether an operator answer may replace a verdict whose automated outcome
// is |automated|.
inline bool AcceptsAnswers(Outcome automated) {
  return automated == Outcome::kManualPending || automated == Outcome::kUserStudyPending;
}

}  // namespace consent_audit

#endif  // CONSENT_AUDIT_VERDICT_H_

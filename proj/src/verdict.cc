#include "consent_audit/verdict.h"

#include <array>
#include <utility>

namespace consent_audit {
namespace {

constexpr std::array<std::pair<Outcome, std::string_view>, kNumOutcomes> kOutcomes{{
    {Outcome::kCompliant, "compliant"},
    {Outcome::kViolation, "violation"},
    {Outcome::kInconclusive, "inconclusive"},
    {Outcome::kManualPending, "manual_pending"},
    {Outcome::kUserStudyPending, "user_study_pending"},
    {Outcome::kNotAssessable, "not_assessable"},
}};

constexpr std::array<std::pair<Provenance, std::string_view>, 3> kProvenances{{
    {Provenance::kAutomated, "automated"},
    {Provenance::kOperator, "operator"},
    {Provenance::kOperatorProxy, "operator_proxy"},
}};

constexpr std::array<std::pair<EvidenceKind, std::string_view>, 7> kEvidenceKinds{{
    {EvidenceKind::kCookie, "cookie"},
    {EvidenceKind::kRequest, "request"},
    {EvidenceKind::kStorageEntry, "storage_entry"},
    {EvidenceKind::kConsentString, "consent_string"},
    {EvidenceKind::kBannerGeometry, "banner_geometry"},
    {EvidenceKind::kTextMatch, "text_match"},
    {EvidenceKind::kScreenshotRef, "screenshot_ref"},
}};

template <typename E, std::size_t N>
std::string_view Name(const std::array<std::pair<E, std::string_view>, N>& table, E value) {
  for (const auto& [v, name] : table) {
    if (v == value) return name;
  }
  return "";
}

template <typename E, std::size_t N>
std::optional<E> Lookup(const std::array<std::pair<E, std::string_view>, N>& table,
                        std::string_view name) {
  for (const auto& [v, n] : table) {
    if (n == name) return v;
  }
  return std::nullopt;
}

}  // namespace

std::string_view ToString(Outcome o) { return Name(kOutcomes, o); }
std::optional<Outcome> OutcomeFromString(std::string_view s) { return Lookup(kOutcomes, s); }
std::string_view ToString(Provenance p) { return Name(kProvenances, p); }
std::optional<Provenance> ProvenanceFromString(std::string_view s) {
  return Lookup(kProvenances, s);
}
std::string_view ToString(EvidenceKind k) { return Name(kEvidenceKinds, k); }
std::optional<EvidenceKind> EvidenceKindFromString(std::string_view s) {
  return Lookup(kEvidenceKinds, s);
}

bool AutomatedOutcomePermitted(AssessmentMode mode, Outcome outcome) {
  switch (mode) {
    case AssessmentMode::kTechnical:
      return outcome == Outcome::kCompliant || outcome == Outcome::kViolation ||
             outcome == Outcome::kInconclusive || outcome == Outcome::kNotAssessable;
    case AssessmentMode::kMixed:
      return outcome != Outcome::kUserStudyPending;
    case AssessmentMode::kManual:
      return outcome == Outcome::kManualPending;
    case AssessmentMode::kUserStudy:
      return outcome == Outcome::kUserStudyPending;
    case AssessmentMode::kNotPossible:
      return outcome == Outcome::kNotAssessable;
  }
  return false;
}

}  // namespace consent_audit

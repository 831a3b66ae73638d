#ifndef CONSENT_AUDIT_REQUIREMENTS_H_
#define CONSENT_AUDIT_REQUIREMENTS_H_

#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace consent_audit {

inline constexpr int kNumRequirements = 22;

enum class RequirementGroup {
  kPrior,
  kFree,
  kSpecific,
  kInformed,
  kUnambiguous,
  kReadableAccessible,
  kRevocable,
};

inline constexpr int kNumRequirementGroups = 7;

// How a violation can be detected.
enum class AssessmentMode {
  kTechnical,   // tooling alone (partially)
  kManual,      // human operator only
  kUserStudy,   // needs perception studies
  kMixed,       // operator, or tooling for part of it
  kNotPossible,
};

std::string_view ToString(RequirementGroup g);  // "Readable and accessible"
std::string_view ToToken(RequirementGroup g);   // "readable_accessible"
std::string_view ToString(AssessmentMode m);    // "mixed"

struct RequirementInfo {
  int number;                    // 1..22
  std::string_view id;           // "R13"
  std::string_view title;
  RequirementGroup group;
  AssessmentMode assessment;
  std::string_view checklist_prompt;  // question shown to the operator
  std::string_view violation_hint;    // what a violation looks like
};

std::span<const RequirementInfo> AllRequirements();

// Throws std::out_of_range for numbers outside 1..22.
const RequirementInfo& Requirement(int number);

// "R7" -> 7. Case-sensitive.
std::optional<int> ParseRequirementId(std::string_view id);

std::span<const RequirementGroup> AllRequirementGroups();

}  // namespace consent_audit

#endif  // CONSENT_AUDIT_REQUIREMENTS_H_

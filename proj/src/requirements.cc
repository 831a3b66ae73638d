#include "consent_audit/requirements.h"

#include <array>
#include <charconv>
#include <stdexcept>

namespace consent_audit {
namespace {

using G = RequirementGroup;
using M = AssessmentMode;

constexpr std::array<RequirementInfo, kNumRequirements> kRequirements{{
    {1, "R1", "Prior to storing an identifier", G::kPrior, M::kMixed,
     "Starting from an empty browser profile and without interacting with the banner, "
     "are any identifiers that need consent stored in any browser storage?",
     "An identifier is stored before the user consents."},
    {2, "R2", "Prior to sending an identifier", G::kPrior, M::kTechnical,
     "Before the user consents, does the browser send identifiers that need consent to "
     "third parties (cookies, URL parameters, scripted requests)?",
     "Identifiers needing consent leave the browser before consent."},
    {3, "R3", "No merging into a contract", G::kFree, M::kMixed,
     "Is the consent request kept separate from terms of service or any other contract "
     "the user must accept?",
     "Consent is bundled with acceptance of a contract."},
    {4, "R4", "No tracking walls", G::kFree, M::kManual,
     "Can the user reach the site content after refusing tracking, without being forced "
     "to accept?",
     "Access is blocked unless the user accepts tracking."},
    {5, "R5", "Separate consent per purpose", G::kSpecific, M::kManual,
     "Can the user give or refuse consent separately for each purpose?",
     "Purposes are bundled so they can only be accepted or refused together."},
    {6, "R6", "Accessibility of information page", G::kInformed, M::kMixed,
     "Does the banner link or button lead to an information page about the trackers?",
     "No information page is reachable from the banner."},
    {7, "R7", "Necessary information on BTT", G::kInformed, M::kMixed,
     "Does the information page list purposes, recipients, storage periods and "
     "identifier names for the trackers used?",
     "One or more of these items is missing."},
    {8, "R8", "Information on consent banner configuration", G::kInformed, M::kMixed,
     "Does the banner or information page explain how to accept all, some or none of the "
     "trackers and how to change that choice later?",
     "Configuration options are not explained."},
    {9, "R9", "Information on the data controller", G::kInformed, M::kMixed,
     "Does the information page identify each controller with contact details and a "
     "data protection officer contact?",
     "The controller is not identified."},
    {10, "R10", "Information on rights", G::kInformed, M::kMixed,
     "Does the information page describe the data subject rights: access, rectification, "
     "erasure, restriction, objection, portability, withdrawal, complaint to a DPA, "
     "automated decisions and transfers outside the EU?",
     "Rights are not described."},
    {11, "R11", "Affirmative action design", G::kUnambiguous, M::kMixed,
     "Is consent recorded only after a clear affirmative action (button click, unticked "
     "box) and never from closing the banner, scrolling or pre-ticked boxes?",
     "A non-affirmative action results in positive consent being recorded."},
    {12, "R12", "Configurable banner", G::kUnambiguous, M::kMixed,
     "Does the first layer of the banner offer a way to customize consent (a configure "
     "button, or accept, reject and configure)?",
     "No visible customization option on the banner."},
    {13, "R13", "Balanced choice", G::kUnambiguous, M::kManual,
     "Are accepting and refusing presented with equal ease and visual weight?",
     "The design steers the user towards acceptance."},
    {14, "R14", "Post-consent registration", G::kUnambiguous, M::kTechnical,
     "Is consent stored only after the user acts on the banner?",
     "Consent is present in storage before any user action."},
    {15, "R15", "Correct consent registration", G::kUnambiguous, M::kMixed,
     "Does the stored consent match the choice the user made in the banner?",
     "Stored consent differs from the user's choice."},
    {16, "R16", "Distinguishable", G::kReadableAccessible, M::kMixed,
     "Is the consent request clearly separated from unrelated content such as terms of "
     "use or warnings?",
     "The consent request is mixed with other matters."},
    {17, "R17", "Intelligible", G::kReadableAccessible, M::kUserStudy,
     "Would an average user understand what they are consenting to?",
     "Average users do not understand the request."},
    {18, "R18", "Accessible", G::kReadableAccessible, M::kUserStudy,
     "Are the consent settings easy to find from the banner?",
     "Settings are hard to reach from the banner."},
    {19, "R19", "Clear and plain language", G::kReadableAccessible, M::kUserStudy,
     "Is the wording concrete and neutral, free of legalese, positive framing or "
     "discouragement of refusal?",
     "Vague, technical or manipulative wording."},
    {20, "R20", "No consent wall", G::kReadableAccessible, M::kMixed,
     "Is the site usable while the banner is unanswered, on both desktop and mobile "
     "screen sizes?",
     "The banner blocks the site until the user accepts or rejects."},
    {21, "R21", "Possible to change in the future", G::kRevocable, M::kManual,
     "Can the user withdraw or change consent later, by the same means and as easily as "
     "it was given?",
     "Withdrawal is impossible or harder than giving consent."},
    {22, "R22", "Delete consent cookie and communicate to third parties", G::kRevocable,
     M::kNotPossible,
     "After withdrawal, is the consent record deleted and the withdrawal passed on to "
     "every third party that received consent?",
     "Withdrawal is not propagated."},
}};

constexpr std::array<RequirementGroup, kNumRequirementGroups> kGroups{
    G::kPrior, G::kFree, G::kSpecific, G::kInformed,
    G::kUnambiguous, G::kReadableAccessible, G::kRevocable};

}  // namespace

std::string_view ToString(RequirementGroup g) {
  switch (g) {
    case G::kPrior: return "Prior";
    case G::kFree: return "Free";
    case G::kSpecific: return "Specific";
    case G::kInformed: return "Informed";
    case G::kUnambiguous: return "Unambiguous";
    case G::kReadableAccessible: return "Readable and accessible";
    case G::kRevocable: return "Revocable";
  }
  return "";
}

std::string_view ToToken(RequirementGroup g) {
  switch (g) {
    case G::kPrior: return "prior";
    case G::kFree: return "free";
    case G::kSpecific: return "specific";
    case G::kInformed: return "informed";
    case G::kUnambiguous: return "unambiguous";
    case G::kReadableAccessible: return "readable_accessible";
    case G::kRevocable: return "revocable";
  }
  return "";
}

std::string_view ToString(AssessmentMode m) {
  switch (m) {
    case M::kTechnical: return "technical";
    case M::kManual: return "manual";
    case M::kUserStudy: return "user_study";
    case M::kMixed: return "mixed";
    case M::kNotPossible: return "not_possible";
  }
  return "";
}

std::span<const RequirementInfo> AllRequirements() { return kRequirements; }

const RequirementInfo& Requirement(int number) {
  if (number < 1 || number > kNumRequirements) {
    throw std::out_of_range("requirement number " + std::to_string(number));
  }
  return kRequirements[static_cast<std::size_t>(number - 1)];
}

std::optional<int> ParseRequirementId(std::string_view id) {
  if (id.size() < 2 || id.front() != 'R') return std::nullopt;
  int n = 0;
  auto [ptr, ec] = std::from_chars(id.data() + 1, id.data() + id.size(), n);
  if (ec != std::errc() || ptr != id.data() + id.size() || id[1] == '0') return std::nullopt;
  if (n < 1 || n > kNumRequirements) return std::nullopt;
  return n;
}

std::span<const RequirementGroup> AllRequirementGroups() { return kGroups; }

}  // namespace consent_audit

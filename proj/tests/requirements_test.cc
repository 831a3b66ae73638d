#include "consent_audit/requirements.h"

#include <gtest/gtest.h>

#include <set>

#include "consent_audit/verdict.h"
#include "golden_tables.h"

namespace consent_audit {
namespace {

TEST(Requirements, AssessmentModesGolden) {
  ASSERT_EQ(AllRequirements().size(), static_cast<std::size_t>(kNumRequirements));
  for (int n = 1; n <= kNumRequirements; ++n) {
    EXPECT_EQ(Requirement(n).assessment,
              golden::ModeOfNotation(golden::kAssessmentNotation[n - 1]))
        << "R" << n;
  }
}

TEST(Requirements, Groups) {
  const RequirementGroup expected[kNumRequirements] = {
      RequirementGroup::kPrior,       RequirementGroup::kPrior,
      RequirementGroup::kFree,        RequirementGroup::kFree,
      RequirementGroup::kSpecific,    RequirementGroup::kInformed,
      RequirementGroup::kInformed,    RequirementGroup::kInformed,
      RequirementGroup::kInformed,    RequirementGroup::kInformed,
      RequirementGroup::kUnambiguous, RequirementGroup::kUnambiguous,
      RequirementGroup::kUnambiguous, RequirementGroup::kUnambiguous,
      RequirementGroup::kUnambiguous, RequirementGroup::kReadableAccessible,
      RequirementGroup::kReadableAccessible, RequirementGroup::kReadableAccessible,
      RequirementGroup::kReadableAccessible, RequirementGroup::kReadableAccessible,
      RequirementGroup::kRevocable,   RequirementGroup::kRevocable};
  for (int n = 1; n <= kNumRequirements; ++n) EXPECT_EQ(Requirement(n).group, expected[n - 1]);
  EXPECT_EQ(AllRequirementGroups().size(), static_cast<std::size_t>(kNumRequirementGroups));
}

TEST(Requirements, IdsAndMetadata) {
  std::set<std::string_view> titles;
  for (const auto& r : AllRequirements()) {
    EXPECT_EQ(r.id, "R" + std::to_string(r.number));
    EXPECT_EQ(ParseRequirementId(r.id), r.number);
    EXPECT_FALSE(r.title.empty());
    EXPECT_FALSE(r.checklist_prompt.empty());
    EXPECT_FALSE(r.violation_hint.empty());
    titles.insert(r.title);
  }
  EXPECT_EQ(titles.size(), static_cast<std::size_t>(kNumRequirements));
  EXPECT_FALSE(ParseRequirementId("R0"));
  EXPECT_FALSE(ParseRequirementId("R23"));
  EXPECT_FALSE(ParseRequirementId("r1"));
  EXPECT_FALSE(ParseRequirementId("R01"));
  EXPECT_THROW(Requirement(0), std::out_of_range);
}

TEST(OutcomeRules, PermittedByMode) {
  using O = Outcome;
  using M = AssessmentMode;
  EXPECT_TRUE(AutomatedOutcomePermitted(M::kTechnical, O::kViolation));
  EXPECT_FALSE(AutomatedOutcomePermitted(M::kTechnical, O::kManualPending));
  EXPECT_TRUE(AutomatedOutcomePermitted(M::kManual, O::kManualPending));
  EXPECT_FALSE(AutomatedOutcomePermitted(M::kManual, O::kViolation));
  EXPECT_TRUE(AutomatedOutcomePermitted(M::kUserStudy, O::kUserStudyPending));
  EXPECT_FALSE(AutomatedOutcomePermitted(M::kUserStudy, O::kManualPending));
  EXPECT_TRUE(AutomatedOutcomePermitted(M::kNotPossible, O::kNotAssessable));
  EXPECT_FALSE(AutomatedOutcomePermitted(M::kNotPossible, O::kInconclusive));
  EXPECT_TRUE(AutomatedOutcomePermitted(M::kMixed, O::kManualPending));
  EXPECT_TRUE(AutomatedOutcomePermitted(M::kMixed, O::kViolation));
  EXPECT_FALSE(AutomatedOutcomePermitted(M::kMixed, O::kUserStudyPending));
}

TEST(OutcomeRules, StringsRoundTrip) {
  for (int i = 0; i < kNumOutcomes; ++i) {
    auto o = static_cast<Outcome>(i);
    EXPECT_EQ(OutcomeFromString(ToString(o)), o);
  }
  EXPECT_FALSE(OutcomeFromString("pass"));
}

}  // namespace
}  // namespace consent_audit

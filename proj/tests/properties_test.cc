// Cross-module invariants checked over the fixture corpus and synthetic
// sites with every plant combination.
#include <gtest/gtest.h>

#include "consent_audit/audit.h"
#include "consent_audit/checks.h"
#include "consent_audit/requirements.h"
#include "consent_audit/synth.h"
#include "test_support.h"

namespace consent_audit {
namespace {

std::vector<SiteCapture> Corpus() {
  auto corpus = LoadCorpus(test::FixtureDir());
  int index = 1;
  for (const auto& plants : ParsePlantSpec(
           "clean,R1,R2,R11,R14,R15,R20-wall,R1+R2,R11+R14,R14+R15,R2+R20-wall,"
           "R1+R2+R11+R14+R15+R20-wall")) {
    auto s = SynthesizeSite(plants, index++);
    corpus.push_back({s.site_id, s.site_url, s.sessions});
  }
  return corpus;
}

bool Resolves(const SiteCapture& site, const Evidence& e) {
  for (const auto& s : site.sessions) {
    if (s.source_name != e.session_ref.session_file) continue;
    if (!e.session_ref.t_ms) return true;
    for (const auto& ev : s.events) {
      if (ev.timestamp_ms == *e.session_ref.t_ms) return true;
    }
  }
  return false;
}

TEST(Properties, OutcomesRespectAssessmentMode) {
  for (const auto& site : Corpus()) {
    auto verdicts = RunAll(site, test::DefaultContext());
    ASSERT_EQ(verdicts.size(), 22u);
    for (const auto& v : verdicts) {
      const auto mode = Requirement(v.requirement).assessment;
      EXPECT_TRUE(AutomatedOutcomePermitted(mode, v.outcome))
          << site.site_id << " R" << v.requirement << " " << ToString(v.outcome);
      EXPECT_EQ(v.outcome, v.automated_outcome);
      EXPECT_EQ(v.provenance, Provenance::kAutomated);
    }
  }
}

TEST(Properties, ViolationsCarryResolvableEvidence) {
  auto ctx = test::DefaultContext();
  for (const auto& site : Corpus()) {
    auto result = AuditSite(site, ctx);
    for (const auto& v : result.verdicts) {
      if (v.outcome == Outcome::kViolation) {
        EXPECT_FALSE(v.evidence.empty()) << site.site_id << " R" << v.requirement;
      }
      for (const auto& e : v.evidence) {
        EXPECT_TRUE(Resolves(site, e)) << site.site_id << " " << e.ref << " -> "
                                       << e.session_ref.session_file;
      }
    }
    for (const auto& f : result.findings) {
      EXPECT_FALSE(f.evidence.empty());
      for (const auto& e : f.evidence) EXPECT_TRUE(Resolves(site, e)) << e.ref;
    }
  }
}

// Scenarios each requirement evaluates; a capture of any other scenario is
// unrelated to it.
bool Evaluates(int requirement, ScenarioKind scenario) {
  switch (requirement) {
    case 1:
    case 14:
    case 20:
      return scenario == ScenarioKind::kNoAction;
    case 2:
      return true;
    case 11:
      return scenario == ScenarioKind::kCloseBanner || scenario == ScenarioKind::kScroll;
    case 15:
      return scenario == ScenarioKind::kAcceptAll || scenario == ScenarioKind::kRejectAll;
    default:
      return false;
  }
}

TEST(Properties, AddingACaptureOnlyDecidesInconclusive) {
  auto ctx = test::DefaultContext();
  for (const auto& site : Corpus()) {
    const std::size_t n = site.sessions.size();
    ASSERT_LE(n, 6u);
    for (unsigned mask = 1; mask < (1u << n); ++mask) {
      SiteCapture subset{site.site_id, site.site_url, {}};
      for (std::size_t i = 0; i < n; ++i) {
        if (mask & (1u << i)) subset.sessions.push_back(site.sessions[i]);
      }
      auto before = RunAll(subset, ctx);
      for (std::size_t add = 0; add < n; ++add) {
        if (mask & (1u << add)) continue;
        SiteCapture grown = subset;
        grown.sessions.push_back(site.sessions[add]);
        auto after = RunAll(grown, ctx);
        for (std::size_t r = 0; r < before.size(); ++r) {
          const auto was = before[r].outcome;
          const auto now = after[r].outcome;
          if (was == now || was == Outcome::kInconclusive) continue;
          const std::string where = site.site_id + " mask " + std::to_string(mask) + " + " +
                                    site.sessions[add].source_name + " R" +
                                    std::to_string(before[r].requirement) + ": " +
                                    std::string(ToString(was)) + " -> " + std::string(ToString(now));
          EXPECT_TRUE(Evaluates(before[r].requirement, site.sessions[add].scenario)) << where;
          // A related capture can only add findings.
          EXPECT_EQ(now, Outcome::kViolation) << where;
        }
      }
    }
  }
}

TEST(Properties, RunAllIsDeterministic) {
  auto ctx = test::DefaultContext();
  for (const auto& site : Corpus()) {
    auto a = RunAll(site, ctx);
    SiteCapture reversed = site;
    std::reverse(reversed.sessions.begin(), reversed.sessions.end());
    EXPECT_EQ(RunAll(site, ctx), a) << site.site_id;
    auto b = RunAll(reversed, ctx);
    for (std::size_t r = 0; r < a.size(); ++r) {
      EXPECT_EQ(a[r].outcome, b[r].outcome) << site.site_id << " R" << a[r].requirement;
    }
  }
}

TEST(Properties, ExitCodeFromJsonAlone) {
  auto& inputs = test::DefaultInputs();
  auto corpus = Corpus();
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    std::vector<SiteCapture> one = {corpus[i]};
    auto report = AssembleReport(AuditCorpusSerial(one, inputs.context), inputs, {});
    auto doc = nlohmann::json::parse(RenderJson(report));
    int expected = 0;
    const auto& counts = doc["summary"]["by_outcome"];
    if (counts["violation"].get<int>() > 0) {
      expected = 2;
    } else if (counts["inconclusive"].get<int>() > 0) {
      expected = 3;
    }
    EXPECT_EQ(ExitCodeFor(report), expected) << corpus[i].site_id;
    EXPECT_EQ(ExitCodeFor(ParseReport(doc.dump())), expected);
  }
}

}  // namespace
}  // namespace consent_audit

#include "consent_audit/report.h"

#include <gtest/gtest.h>

#include <random>

#include "consent_audit/audit.h"
#include "consent_audit/errors.h"
#include "consent_audit/synth.h"
#include "test_support.h"

namespace consent_audit {
namespace {

AuditReport FixtureReport() {
  auto corpus = LoadCorpus(test::FixtureDir());
  return AssembleReport(AuditCorpusSerial(corpus, test::DefaultContext()), test::DefaultInputs(),
                        *ParseUtc("2024-03-02T00:00:00Z"));
}

ManualAnswer Answer(std::string site, int r, Outcome o, std::string who = "ana") {
  return {std::move(site), r, o, std::move(who), "checked", *ParseUtc("2024-03-03T09:00:00Z")};
}

TEST(ManualAnswerJson, ParseAndErrors) {
  auto j = nlohmann::json::parse(R"({"site_id": "a", "requirement": "R13", "outcome": "violation",
                                     "operator": "ana", "answered_at": "2024-03-03T09:00:00Z"})");
  auto a = ParseManualAnswer(j);
  EXPECT_EQ(a.requirement, 13);
  EXPECT_EQ(a.note, "");
  EXPECT_EQ(ParseManualAnswer(ManualAnswerToJson(a)), a);
  auto bad = [&](const char* key, nlohmann::json value, const std::string& path) {
    auto k = j;
    k[key] = value;
    try {
      ParseManualAnswer(k);
      ADD_FAILURE() << key;
    } catch (const SchemaError& e) {
      EXPECT_EQ(e.path(), path);
    }
  };
  bad("requirement", "R23", "$.requirement");
  bad("outcome", "manual_pending", "$.outcome");
  bad("operator", "", "$.operator");
  bad("answered_at", "yesterday", "$.answered_at");
  bad("extra", 1, "$.extra");
}

TEST(Merge, OnlyPendingVerdictsAcceptAnswers) {
  auto report = FixtureReport();
  const auto& site = *report.FindSite("ebay_like");
  ASSERT_EQ(site.verdicts[0].outcome, Outcome::kViolation);
  EXPECT_THROW(Merge(site.verdicts, std::vector{Answer("ebay_like", 1, Outcome::kCompliant)}), ConflictError);
  EXPECT_THROW(Merge(site.verdicts, std::vector{Answer("ebay_like", 22, Outcome::kCompliant)}), ConflictError);
  auto merged = Merge(site.verdicts, std::vector{Answer("ebay_like", 13, Outcome::kViolation),
                                                 Answer("ebay_like", 18, Outcome::kCompliant)});
  EXPECT_EQ(merged[12].outcome, Outcome::kViolation);
  EXPECT_EQ(merged[12].provenance, Provenance::kOperator);
  EXPECT_EQ(merged[12].automated_outcome, Outcome::kManualPending);
  EXPECT_EQ(merged[17].provenance, Provenance::kOperatorProxy);
  EXPECT_EQ(merged[17].answer->operator_name, "ana");
}

TEST(Merge, LaterAnswerWins) {
  auto report = FixtureReport();
  ApplyAnswer(report, Answer("ebay_like", 13, Outcome::kViolation));
  ApplyAnswer(report, Answer("ebay_like", 13, Outcome::kCompliant, "bo"));
  const auto& v = report.FindSite("ebay_like")->verdicts[12];
  EXPECT_EQ(v.outcome, Outcome::kCompliant);
  EXPECT_EQ(v.answer->operator_name, "bo");
  EXPECT_THROW(ApplyAnswer(report, Answer("nope", 13, Outcome::kCompliant)), NotFoundError);
}

TEST(MergeProperty, IdempotentAndReplayable) {
  auto base = FixtureReport();
  std::mt19937_64 rng(53);
  const int answerable[] = {3, 4, 5, 6, 7, 8, 9, 10, 12, 13, 16, 17, 18, 19, 21};
  const Outcome outcomes[] = {Outcome::kCompliant, Outcome::kViolation, Outcome::kInconclusive};
  for (int round = 0; round < 100; ++round) {
    std::vector<ManualAnswer> answers;
    const int n = static_cast<int>(rng() % 12);
    for (int i = 0; i < n; ++i) {
      const auto& site = base.sites[rng() % base.sites.size()];
      answers.push_back(Answer(site.site_id, answerable[rng() % 15], outcomes[rng() % 3]));
    }
    const auto& verdicts = base.sites[0].verdicts;
    std::vector<ManualAnswer> own;
    for (const auto& a : answers) {
      if (a.site_id == base.sites[0].site_id) own.push_back(a);
    }
    auto once = Merge(verdicts, own);
    ASSERT_EQ(Merge(once, own), once);

    AuditReport folded = base;
    for (const auto& a : answers) ApplyAnswer(folded, a);
    AuditReport twice = folded;
    for (const auto& a : answers) ApplyAnswer(twice, a);
    ASSERT_EQ(RenderJson(folded), RenderJson(twice));
  }
}

TEST(ReportJson, RoundTripsAndSummaryMatches) {
  auto report = FixtureReport();
  ApplyAnswer(report, Answer("fandom_like", 17, Outcome::kViolation));
  const std::string text = RenderJson(report);
  auto back = ParseReport(text);
  EXPECT_EQ(back, report);
  EXPECT_EQ(RenderJson(back), text);
  auto doc = nlohmann::json::parse(text);
  EXPECT_EQ(doc["summary"], Summary(report));
  EXPECT_EQ(doc["summary"]["sites"], 4);
  int total = 0;
  for (auto& [k, v] : doc["summary"]["by_outcome"].items()) total += v.get<int>();
  EXPECT_EQ(total, 4 * 22);
  // Metadata carries the jurisdiction matrix and the limitations.
  EXPECT_EQ(doc["metadata"]["dpa_positioning"]["positions"].size(), 22u);
  EXPECT_FALSE(doc["metadata"]["limitations"].empty());
}

TEST(ReportJson, RejectsTamperedSummaryAndVerdicts) {
  auto doc = nlohmann::json::parse(RenderJson(FixtureReport()));
  auto tampered = doc;
  tampered["summary"]["by_outcome"]["violation"] = 0;
  EXPECT_THROW(ReportFromJson(tampered), Error);
  tampered = doc;
  tampered["sites"][0]["verdicts"].erase(3);
  EXPECT_THROW(ReportFromJson(tampered), Error);
  tampered = doc;
  tampered["sites"][0]["verdicts"][0]["evidence"].push_back("R9-9");
  EXPECT_THROW(ReportFromJson(tampered), Error);
}

TEST(ReportMarkdown, GroupsPerSite) {
  auto md = RenderMarkdown(FixtureReport());
  std::size_t count = 0;
  for (auto pos = md.find("\n### "); pos != std::string::npos; pos = md.find("\n### ", pos + 1)) ++count;
  EXPECT_EQ(count, 4u * 7u);
  EXPECT_NE(md.find("### Readable and accessible"), std::string::npos);
  EXPECT_NE(md.find("| R20 "), std::string::npos);
}

TEST(ExitCode, FromReportContent) {
  AuditReport empty;
  EXPECT_EQ(ExitCodeFor(empty), 0);
  auto report = FixtureReport();
  EXPECT_EQ(ExitCodeFor(report), 2);
  EXPECT_EQ(ExitCodeFor(ParseReport(RenderJson(report))), 2);

  auto clean = SynthesizeSite(std::vector{Plant::kClean}, 1);
  SiteCapture capture{clean.site_id, clean.site_url, clean.sessions};
  AuditReport ok;
  ok.sites.push_back(AuditSite(capture, test::DefaultContext()));
  EXPECT_EQ(ExitCodeFor(ok), 0);
  // Pending verdicts alone never make the exit code nonzero.
  capture.sessions.erase(capture.sessions.begin() + 1, capture.sessions.end());
  AuditReport partial;
  partial.sites.push_back(AuditSite(capture, test::DefaultContext()));
  EXPECT_EQ(ExitCodeFor(partial), 3);
}

}  // namespace
}  // namespace consent_audit

#include "consent_audit/audit.h"

#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include <fstream>

#include "consent_audit/errors.h"
#include "consent_audit/synth.h"
#include "test_support.h"

namespace consent_audit {
namespace {

namespace fs = std::filesystem;
using ::testing::HasSubstr;

std::vector<SiteCapture> ToCaptures(const std::vector<SynthSite>& sites) {
  std::vector<SiteCapture> out;
  for (const auto& s : sites) out.push_back({s.site_id, s.site_url, s.sessions});
  return out;
}

std::vector<SynthSite> PlantedCorpus() {
  std::vector<SynthSite> sites;
  int i = 1;
  for (auto p : AllPlants()) sites.push_back(SynthesizeSite(std::vector{p}, i++));
  return sites;
}

std::string LoadError(const fs::path& dir) {
  try {
    LoadCorpus(dir);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

TEST(LoadCorpus, FixtureLayout) {
  auto corpus = LoadCorpus(test::FixtureDir());
  ASSERT_EQ(corpus.size(), 4u);
  EXPECT_EQ(corpus[0].site_id, "ebay_like");
  EXPECT_EQ(corpus[0].sessions.size(), 2u);
  EXPECT_EQ(corpus[0].sessions[0].source_name, "ebay_like/no_action-twin.session.json");
  EXPECT_EQ(corpus[0].site_url, "https://www.ebay-like.fixture.test/");
}

TEST(LoadCorpus, ErrorsNameTheFile) {
  test::TempDir dir;
  EXPECT_THAT(LoadError(dir.path() / "missing"), HasSubstr("not a directory"));
  fs::create_directories(dir.path() / "a");
  EXPECT_THAT(LoadError(dir.path()), HasSubstr("no .session.json files"));
  { std::ofstream(dir.path() / "a" / "no_action.session.json") << "{}"; }
  EXPECT_THAT(LoadError(dir.path()), HasSubstr("a/no_action.session.json: schema error"));

  fs::remove_all(dir.path() / "a");
  auto site = SynthesizeSite(std::vector{Plant::kClean}, 1);
  WriteSynthCorpus(dir.path(), std::vector{site});
  auto other = SynthesizeSite(std::vector{Plant::kClean}, 2);
  auto moved = dir.path() / site.site_id / "accept_all.session.json";
  {
    std::ofstream out(moved, std::ios::trunc);
    out << SerializeSession(other.sessions[3]);
  }
  EXPECT_THAT(LoadError(dir.path()), HasSubstr("differs from"));
}

TEST(LoadCorpus, IncompleteSessionsNeedOptIn) {
  test::TempDir dir;
  auto site = SynthesizeSite(std::vector{Plant::kClean}, 1);
  site.sessions[0].incomplete = true;
  fs::create_directories(dir.path() / site.site_id);
  {
    std::ofstream(dir.path() / site.site_id / "no_action.session.json")
        << SerializeSession(site.sessions[0]);
  }
  EXPECT_THAT(LoadError(dir.path()), HasSubstr("incomplete"));
  ParseOptions lenient;
  lenient.reject_incomplete = false;
  EXPECT_EQ(LoadCorpus(dir.path(), lenient).size(), 1u);
}

TEST(Synth, DeterministicAndValid) {
  for (auto p : AllPlants()) {
    auto a = SynthesizeSite(std::vector{p}, 3);
    auto b = SynthesizeSite(std::vector{p}, 3);
    ASSERT_EQ(a.sessions.size(), 5u);
    for (std::size_t i = 0; i < a.sessions.size(); ++i) {
      EXPECT_EQ(SerializeSession(a.sessions[i]), SerializeSession(b.sessions[i]));
      EXPECT_NO_THROW(ValidateSession(a.sessions[i])) << a.site_id << " " << i;
    }
  }
}

TEST(Synth, WrittenCorpusReloadsIdentically) {
  test::TempDir dir;
  auto sites = PlantedCorpus();
  WriteSynthCorpus(dir.path(), sites);
  auto loaded = LoadCorpus(dir.path());
  auto direct = ToCaptures(sites);
  ASSERT_EQ(loaded.size(), direct.size());
  auto ctx = test::DefaultContext();
  // Files are read back in name order, so compare the audit results.
  EXPECT_EQ(AuditCorpusSerial(loaded, ctx).size(), direct.size());
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    EXPECT_EQ(loaded[i].site_id, direct[i].site_id);
    auto a = RunAll(loaded[i], ctx);
    auto b = RunAll(direct[i], ctx);
    for (std::size_t r = 0; r < a.size(); ++r) EXPECT_EQ(a[r].outcome, b[r].outcome);
  }
}

TEST(Synth, PlantSpec) {
  auto plan = ParsePlantSpec("R1,R2+R11,clean,R20-wall");
  ASSERT_EQ(plan.size(), 4u);
  EXPECT_EQ(plan[1], (std::vector{Plant::kR2, Plant::kR11}));
  EXPECT_EQ(ExpectedViolations(plan[1]), (std::set<int>{2, 11}));
  EXPECT_TRUE(ExpectedViolations(plan[2]).empty());
  EXPECT_THROW(ParsePlantSpec("R99"), ConfigError);
  EXPECT_THROW(ParsePlantSpec("clean+R1"), ConfigError);
  EXPECT_THROW(ParsePlantSpec(""), ConfigError);
}

TEST(PlantedCorpus, MatchesGroundTruth) {
  auto sites = PlantedCorpus();
  auto results = AuditCorpusSerial(ToCaptures(sites), test::DefaultContext());
  for (std::size_t i = 0; i < sites.size(); ++i) {
    std::set<int> got;
    for (const auto& v : results[i].verdicts) {
      if (v.outcome == Outcome::kViolation) got.insert(v.requirement);
      EXPECT_NE(v.outcome, Outcome::kInconclusive) << sites[i].site_id << " R" << v.requirement;
    }
    EXPECT_EQ(got, ExpectedViolations(sites[i].plants)) << sites[i].site_id;
  }
}

TEST(PlantedCorpus, CombinedPlants) {
  for (const auto& plants : ParsePlantSpec("R1+R2,R11+R14,R15+R20-wall,R1+R2+R11+R14+R15+R20-wall")) {
    auto site = SynthesizeSite(plants, 9);
    auto result = AuditSite({site.site_id, site.site_url, site.sessions}, test::DefaultContext());
    std::set<int> got;
    for (const auto& v : result.verdicts) {
      if (v.outcome == Outcome::kViolation) got.insert(v.requirement);
    }
    EXPECT_EQ(got, ExpectedViolations(plants)) << site.site_id;
  }
}

TEST(Parallel, EqualsSerial) {
  std::vector<SynthSite> sites;
  for (int i = 0; i < 40; ++i) {
    sites.push_back(SynthesizeSite(std::vector{AllPlants()[i % AllPlants().size()]}, i + 1));
  }
  auto corpus = ToCaptures(sites);
  auto fixtures = LoadCorpus(test::FixtureDir());
  corpus.insert(corpus.end(), fixtures.begin(), fixtures.end());
  auto ctx = test::DefaultContext();
  auto serial = AuditCorpusSerial(corpus, ctx);
  for (int jobs : {1, 2, 4, 8}) {
    EXPECT_EQ(AuditCorpusParallel(corpus, ctx, jobs), serial) << jobs;
  }
  EXPECT_EQ(AuditCorpusParallel(corpus, ctx), serial);
}

TEST(Parallel, PropagatesErrors) {
  auto corpus = LoadCorpus(test::FixtureDir());
  auto ctx = test::DefaultContext();
  ctx.config.identifier.threshold = 2.0;
  EXPECT_THROW(AuditCorpusSerial(corpus, ctx), ConfigError);
  EXPECT_THROW(AuditCorpusParallel(corpus, ctx, 2), ConfigError);
}

TEST(Parallel, SiteWithoutCapturesIsInconclusive) {
  auto corpus = LoadCorpus(test::FixtureDir());
  corpus[1].sessions.clear();
  auto ctx = test::DefaultContext();
  auto serial = AuditCorpusSerial(corpus, ctx);
  EXPECT_EQ(AuditCorpusParallel(corpus, ctx, 2), serial);
  EXPECT_EQ(serial[1].verdicts[0].outcome, Outcome::kInconclusive);
  EXPECT_EQ(serial[1].verdicts[1].outcome, Outcome::kInconclusive);
}

TEST(Report, ByteIdenticalAcrossRuns) {
  auto corpus = ToCaptures(PlantedCorpus());
  auto& inputs = test::DefaultInputs();
  auto t = *ParseUtc("2024-03-05T12:00:00Z");
  auto a = RenderJson(AssembleReport(AuditCorpusParallel(corpus, inputs.context, 3), inputs, t));
  auto b = RenderJson(AssembleReport(AuditCorpusSerial(corpus, inputs.context), inputs, t));
  EXPECT_EQ(a, b);
}

TEST(WriteFileAtomic, ReplacesContent) {
  test::TempDir dir;
  auto p = dir.path() / "x.json";
  WriteFileAtomic(p, "one");
  WriteFileAtomic(p, "two");
  EXPECT_EQ(ReadFile(p), "two");
  EXPECT_FALSE(fs::exists(dir.path() / "x.json.tmp"));
  EXPECT_THROW(WriteFileAtomic(dir.path() / "no" / "x", "a"), Error);
}

}  // namespace
}  // namespace consent_audit

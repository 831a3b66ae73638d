#include "consent_audit/purpose.h"

#include <gtest/gtest.h>

#include <map>
#include <random>

#include "consent_audit/errors.h"
#include "golden_tables.h"
#include "test_support.h"

namespace consent_audit {
namespace {

const AuditContext& Ctx() { return test::DefaultContext(); }

TEST(PurposeTaxonomy, ConsentSplitGolden) {
  const auto& golden = golden::ConsentSplit();
  ASSERT_EQ(AllPurposeClasses().size(), golden.size());
  for (PurposeClass p : AllPurposeClasses()) {
    auto it = golden.find(std::string(ToString(p)));
    ASSERT_NE(it, golden.end()) << ToString(p);
    EXPECT_EQ(ConsentRequired(p), it->second) << ToString(p);
    EXPECT_EQ(PurposeFromString(ToString(p)), p);
    EXPECT_EQ(PurposeFromString(ToToken(p)), p);
  }
}

TEST(PublicSuffix, Rules) {
  auto psl = PublicSuffixList::Parse("com\nco.uk\n*.ck\n!www.ck\n// comment\n");
  EXPECT_EQ(psl.RegistrableDomain("a.b.example.com"), "example.com");
  EXPECT_EQ(psl.RegistrableDomain("shop.bbc.co.uk"), "bbc.co.uk");
  EXPECT_EQ(psl.RegistrableDomain("x.foo.ck"), "x.foo.ck");
  EXPECT_EQ(psl.RegistrableDomain("a.www.ck"), "www.ck");
  EXPECT_EQ(psl.RegistrableDomain("co.uk"), "co.uk");
  EXPECT_EQ(psl.RegistrableDomain("a.b.unlisted"), "b.unlisted");
  EXPECT_EQ(psl.RegistrableDomain(".Doubleclick.NET"), "doubleclick.net");
  EXPECT_EQ(psl.RegistrableDomain("10.1.2.3"), "10.1.2.3");
  EXPECT_THROW(psl.RegistrableDomain(""), SuffixError);
  EXPECT_THROW(psl.RegistrableDomain("bad host"), SuffixError);
}

TEST(PartyRelation, IgnoresSchemePortAndCase) {
  const auto& psl = Ctx().suffixes;
  for (const char* site : {"https://www.example.com/", "http://WWW.EXAMPLE.COM:8080/x",
                           "https://shop.example.com", "www.example.com"}) {
    EXPECT_EQ(RelationOf(site, "cdn.Example.com", psl).party, Party::kFirstParty) << site;
    EXPECT_EQ(RelationOf(site, ".doubleclick.net", psl).party, Party::kThirdParty) << site;
  }
}

TEST(Manifest, MatchPrecedence) {
  auto m = CookieManifest::Parse(R"({"manifest_version": 1, "entries": [
    {"domain": "example.com", "name": "pref*", "purposes": ["short_term_customization"], "declared_by": "x"},
    {"domain": "example.com", "name": "pref_ads", "purposes": ["Advertising"], "declared_by": "x"},
    {"domain": "shop.example.com", "name": "pref*", "purposes": ["long_term_customization"], "declared_by": "x"}
  ]})");
  EXPECT_EQ(m.Match("example.com", "pref_ads")->purpose_classes[0], PurposeClass::kAdvertising);
  EXPECT_EQ(m.Match("www.example.com", "pref_lang")->purpose_classes[0],
            PurposeClass::kShortTermCustomization);
  EXPECT_EQ(m.Match("shop.example.com", "pref_lang")->purpose_classes[0],
            PurposeClass::kLongTermCustomization);
  EXPECT_EQ(m.Match("notexample.com", "pref_lang"), nullptr);
}

TEST(Manifest, Errors) {
  EXPECT_THROW(CookieManifest::Parse(R"({"manifest_version": 2, "entries": []})"), SchemaError);
  EXPECT_THROW(CookieManifest::Parse(R"({"manifest_version": 1, "entries": [
    {"domain": "a.com", "name": "a*b", "purposes": ["advertising"], "declared_by": "x"}]})"),
               InvariantError);
  EXPECT_THROW(CookieManifest::Parse(R"({"manifest_version": 1, "entries": [
    {"domain": "a.com", "name": "n", "purposes": ["advertising"], "declared_by": "x"},
    {"domain": "a.com", "name": "n", "purposes": ["load_balancing"], "declared_by": "y"}]})"),
               InvariantError);
  EXPECT_THROW(CookieManifest::Parse(R"({"manifest_version": 1, "entries": [
    {"domain": "a.com", "name": "n", "purposes": ["tracking"], "declared_by": "x"}]})"),
               SchemaError);
}

TEST(TrackerList, ParseErrorsNameLine) {
  try {
    TrackerList::Parse("# header\nads.example advertising\nads.example load_balancing\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3);
  }
  try {
    TrackerList::Parse("a.example unknown\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 1);
  }
  EXPECT_NO_THROW(TrackerList::Parse("a.example advertising\na.example advertising\n"));
}

TEST(Classify, SourcesAndParty) {
  const auto& c = Ctx();
  auto nid = Classify(".google.com", "NID", "https://www.w3schools-like.fixture.test/", c.manifest,
                      c.trackers, c.suffixes);
  EXPECT_EQ(nid.source, ClassificationSource::kManifest);
  EXPECT_EQ(nid.relation.party, Party::kThirdParty);
  EXPECT_EQ(nid.consent_required, ConsentRequirement::kYes);

  auto tracked = Classify("stats.hotjar.com", "_hjx", "https://news.example/", c.manifest,
                          c.trackers, c.suffixes);
  EXPECT_EQ(tracked.source, ClassificationSource::kTrackerList);
  EXPECT_EQ(tracked.purpose, PurposeClass::kNonLocalAnalytics);

  auto unknown = Classify("news.example", "xyz", "https://news.example/", c.manifest, c.trackers,
                          c.suffixes);
  EXPECT_EQ(unknown.source, ClassificationSource::kFallback);
  EXPECT_EQ(unknown.consent_required, ConsentRequirement::kUnknown);

  auto lb = Classify("www.lbc-like.fixture.test", "lb", "https://www.lbc-like.fixture.test/",
                     c.manifest, c.trackers, c.suffixes);
  EXPECT_EQ(lb.purpose, PurposeClass::kLoadBalancing);
  EXPECT_EQ(lb.consent_required, ConsentRequirement::kNo);
}

TEST(Classify, LocalAnalyticsUpgradesWhenThirdParty) {
  const auto& c = Ctx();
  auto first = Classify("www.news.example", "_ga", "https://www.news.example/", c.manifest,
                        c.trackers, c.suffixes);
  EXPECT_EQ(first.purpose, PurposeClass::kLocalAnalytics);
  EXPECT_EQ(first.consent_required, ConsentRequirement::kConditional);
  auto third = Classify("cdn.other.example", "_ga", "https://www.news.example/", c.manifest,
                        c.trackers, c.suffixes);
  EXPECT_EQ(third.purpose, PurposeClass::kNonLocalAnalytics);
  EXPECT_EQ(third.consent_required, ConsentRequirement::kYes);
}

TEST(ClassifyProperty, UpgradeNeverRelaxes) {
  const auto& all = AllPurposeClasses();
  std::mt19937_64 rng(47);
  for (int i = 0; i < 2000; ++i) {
    Classification c;
    const int n = 1 + static_cast<int>(rng() % 3);
    for (int k = 0; k < n; ++k) c.all_classes.push_back(all[rng() % all.size()]);
    c.purpose = c.all_classes[0];
    c.consent_required = ConsentRequirement::kNo;
    for (auto p : c.all_classes) c.consent_required = std::max(c.consent_required, ConsentRequired(p));
    auto third = AsThirdParty(c);
    ASSERT_GE(third.consent_required, c.consent_required);
    ASSERT_EQ(third.consent_required, ConsentRequired(third.purpose));
  }
}

TEST(ClassifyProperty, DeterministicAndTotal) {
  const auto& c = Ctx();
  const char* hosts[] = {"www.a.example", ".doubleclick.net", "x.google.com", "10.0.0.2", "b.co.uk"};
  const char* names[] = {"_ga", "IDE", "NID", "lb", "zzz"};
  for (auto h : hosts) {
    for (auto n : names) {
      auto a = Classify(h, n, "https://www.a.example/", c.manifest, c.trackers, c.suffixes);
      auto b = Classify(h, n, "https://www.a.example/", c.manifest, c.trackers, c.suffixes);
      EXPECT_EQ(a.purpose, b.purpose);
      EXPECT_EQ(a.consent_required, b.consent_required);
      EXPECT_EQ(a.consent_required, ConsentRequired(a.purpose));
    }
  }
}

}  // namespace
}  // namespace consent_audit

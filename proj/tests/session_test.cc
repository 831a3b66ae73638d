#include "consent_audit/session.h"

#include <gtest/gtest.h>

#include <map>
#include <random>
#include <tuple>

#include "consent_audit/errors.h"
#include "consent_audit/time_util.h"
#include "consent_audit/url.h"
#include "test_support.h"

namespace consent_audit {
namespace {

using test::SessionBuilder;

std::string FixtureText(const std::string& rel) { return ReadFile(test::FixtureDir() / rel); }

TEST(TimeUtil, ParsesAndFormats) {
  auto t = ParseUtc("2024-02-29T23:59:59Z");
  ASSERT_TRUE(t);
  EXPECT_EQ(FormatUtc(*t), "2024-02-29T23:59:59Z");
  EXPECT_FALSE(ParseUtc("2024-02-30T00:00:00Z"));
  EXPECT_FALSE(ParseUtc("2024-01-01 00:00:00"));
  EXPECT_FALSE(ParseUtc("2024-01-01T00:00:00+01:00"));
}

TEST(Url, HostExtraction) {
  EXPECT_EQ(HostOfUrl("https://User@WWW.Example.COM:8443/a?b#c"), "www.example.com");
  EXPECT_EQ(HostOfUrl("http://10.0.0.1/"), "10.0.0.1");
  EXPECT_FALSE(HostOfUrl("not a url"));
  EXPECT_FALSE(HostOfUrl("https:///path"));
  EXPECT_EQ(NormalizeHost(".Google.com."), "google.com");
  EXPECT_TRUE(IsValidHostName(".doubleclick.net"));
  EXPECT_FALSE(IsValidHostName("bad host"));
}

TEST(SessionParse, EbayFixture) {
  auto s = ParseSession(FixtureText("ebay_like/no_action.session.json"));
  EXPECT_EQ(s.scenario, ScenarioKind::kNoAction);
  ASSERT_NE(InitialSnapshot(s), nullptr);
  EXPECT_TRUE(InitialSnapshot(s)->cookies.empty());
  int ide_responses = 0;
  for (const auto& ev : s.events) {
    if (const auto* r = ev.As<ResponseEvent>()) {
      for (const auto& c : r->set_cookies) ide_responses += c.name == "IDE";
    }
  }
  EXPECT_EQ(ide_responses, 1);
  EXPECT_FALSE(FirstActionTime(s));
}

TEST(SessionParse, EveryFixtureRoundTrips) {
  for (const auto& site : std::filesystem::directory_iterator(test::FixtureDir())) {
    for (const auto& f : std::filesystem::directory_iterator(site.path())) {
      const std::string text = ReadFile(f.path());
      const auto s = ParseSession(text);
      EXPECT_EQ(ParseSession(SerializeSession(s)), s) << f.path();
      EXPECT_EQ(nlohmann::json::parse(SerializeSession(s)), nlohmann::json::parse(text)) << f.path();
    }
  }
}

TEST(SessionParse, MissingViewportNamesField) {
  auto j = nlohmann::json::parse(FixtureText("fandom_like/no_action.session.json"));
  j.erase("viewport");
  try {
    ParseSession(j.dump());
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.path(), "viewport");
  }
}

TEST(SessionParse, SchemaErrorPaths) {
  auto base = nlohmann::json::parse(FixtureText("ebay_like/no_action.session.json"));
  auto expect_path = [](const nlohmann::json& j, const std::string& path) {
    try {
      ParseSession(j.dump());
      ADD_FAILURE() << "accepted";
    } catch (const SchemaError& e) {
      EXPECT_EQ(e.path(), path);
    }
  };
  auto j = base;
  j["events"][2]["set_cookies"][0].erase("name");
  expect_path(j, "events[2].set_cookies[0].name");
  j = base;
  j["events"][0]["kind"] = "teleport";
  expect_path(j, "events[0].kind");
  j = base;
  j["surprise"] = 1;
  expect_path(j, "surprise");
  j = base;
  j["format_version"] = 2;
  expect_path(j, "format_version");
}

TEST(SessionParse, InvariantErrors) {
  auto base = nlohmann::json::parse(FixtureText("ebay_like/no_action.session.json"));
  auto expect_invariant = [](const nlohmann::json& j, const std::string& path) {
    try {
      ParseSession(j.dump());
      ADD_FAILURE() << "accepted";
    } catch (const InvariantError& e) {
      EXPECT_EQ(e.path(), path);
    }
  };
  auto j = base;
  std::swap(j["events"][2], j["events"][3]);
  expect_invariant(j, "events[3].t");
  j = base;
  j["events"].erase(6);
  j["events"].erase(0);
  expect_invariant(j, "events");
  j = base;
  j["events"][1]["url"] = "https://bad host/";
  expect_invariant(j, "events[1].url");
  j = base;
  j["events"].push_back({{"t", 9000}, {"kind", "user_action"}, {"action", "accept_all"}});
  expect_invariant(j, "events[7].action");
  j = base;
  j["incomplete"] = true;
  expect_invariant(j, "incomplete");
  ParseOptions lenient;
  lenient.reject_incomplete = false;
  EXPECT_TRUE(ParseSession(j.dump(), lenient).incomplete);
}

TEST(SessionParse, ActionBeforeSnapshotRejected) {
  auto s = SessionBuilder("https://a.example/", ScenarioKind::kAcceptAll)
               .Action(0, ScenarioKind::kAcceptAll)
               .Snapshot(10)
               .Build();
  try {
    ParseSession(SerializeSession(s));
    FAIL();
  } catch (const InvariantError& e) {
    EXPECT_EQ(e.path(), "events[0]");
  }
}

TEST(SessionParse, TwoActionsRejected) {
  auto s = SessionBuilder("https://a.example/", ScenarioKind::kAcceptAll)
               .Snapshot(0)
               .Action(100, ScenarioKind::kAcceptAll)
               .Action(200, ScenarioKind::kAcceptAll)
               .Build();
  EXPECT_THROW(ParseSession(SerializeSession(s)), InvariantError);
}

TEST(SessionQueries, FirstActionTime) {
  auto s = SessionBuilder("https://a.example/", ScenarioKind::kAcceptAll)
               .Snapshot(0)
               .Action(4200, ScenarioKind::kAcceptAll)
               .Build();
  EXPECT_EQ(FirstActionTime(s), 4200);
  EXPECT_EQ(EndTime(s), 4200);
}

TEST(SessionQueries, BannerAreaRatio) {
  EXPECT_DOUBLE_EQ(test::Banner("#b", 0, 0, 1366, 768).AreaRatio({1366, 768}), 1.0);
  EXPECT_DOUBLE_EQ(test::Banner("#b", 0, 0, 2732, 768).AreaRatio({1366, 768}), 2.0);
}

TEST(CookiesAt, EmptyProfileAndOverride) {
  SessionBuilder b("https://a.example/", ScenarioKind::kNoAction);
  auto old_c = b.Cookie("k", "old", "a.example", 0, 10);
  auto new_c = b.Cookie("k", "new", "a.example", 2000, 10);
  auto s = b.Snapshot(0).Snapshot(1000, {old_c}).Request(1500, "https://a.example/")
               .Response(2000, {new_c}).Build();
  EXPECT_TRUE(CookiesAt(s, 0).empty());
  ASSERT_EQ(CookiesAt(s, 1000).size(), 1u);
  EXPECT_EQ(CookiesAt(s, 1000)[0].value, "old");
  ASSERT_EQ(CookiesAt(s, 2000).size(), 1u);
  EXPECT_EQ(CookiesAt(s, 2000)[0].value, "new");
}

TEST(CookiesAt, ExpiredCookiesDropped) {
  SessionBuilder b("https://a.example/", ScenarioKind::kNoAction);
  auto c = b.Cookie("k", "v", "a.example", 0);
  c.expiry = c.set_time + std::chrono::seconds(2);
  auto s = b.Snapshot(0).Request(10, "https://a.example/").Response(20, {c}).Snapshot(5000).Build();
  EXPECT_EQ(CookiesAt(s, 1999).size(), 1u);
  EXPECT_TRUE(CookiesAt(s, 2000).empty());
}

// Random valid sessions for the property tests below.
CapturedSession RandomSession(std::mt19937_64& rng) {
  auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
  const char* names[] = {"a", "b", "uid", "_ga"};
  const char* domains[] = {"a.example", ".a.example", "tracker.example", "cdn.other.example"};
  SessionBuilder b("https://www.a.example/", ScenarioKind::kNoAction);
  b.Profile("p" + std::to_string(pick(100)));
  b.Snapshot(0);
  std::int64_t t = 0;
  const int n = 1 + pick(25);
  for (int i = 0; i < n; ++i) {
    t += pick(3) * 500;
    auto cookie = [&] {
      std::optional<std::int64_t> days;
      if (pick(3)) days = pick(3);  // 0 days expires immediately
      auto c = b.Cookie(names[pick(4)], "v" + std::to_string(pick(1000)), domains[pick(4)], t, days);
      if (pick(2)) c.path = "/x";
      return c;
    };
    switch (pick(4)) {
      case 0: {
        std::vector<CookieRecord> cs;
        for (int k = pick(3); k > 0; --k) cs.push_back(cookie());
        b.Snapshot(t, cs, {{"www.a.example", "k" + std::to_string(pick(3)), "v"}});
        break;
      }
      case 1:
        b.Request(t, "https://tracker.example/p?x=1", {cookie()}, {{"x", "1"}});
        break;
      default: {
        b.Request(t, "https://www.a.example/");
        std::vector<CookieRecord> cs;
        for (int k = pick(3); k > 0; --k) cs.push_back(cookie());
        b.Response(t, cs);
        break;
      }
    }
    if (pick(5) == 0) {
      b.Dom(t, {test::Banner("#cookie-banner", pick(100), 600, 1366, 168, pick(2))}, pick(2),
            pick(2) ? std::optional<std::string>("privacy text") : std::nullopt);
    }
  }
  return b.Build();
}

// Replays every event from scratch for each identity.
std::vector<CookieRecord> BruteForceCookiesAt(const CapturedSession& s, std::int64_t t) {
  std::size_t last_snapshot = 0;
  for (std::size_t i = 0; i < s.events.size() && s.events[i].timestamp_ms <= t; ++i) {
    if (s.events[i].As<StorageSnapshotEvent>()) last_snapshot = i;
  }
  std::vector<CookieRecord> candidates;
  for (std::size_t i = last_snapshot; i < s.events.size() && s.events[i].timestamp_ms <= t; ++i) {
    if (auto* snap = s.events[i].As<StorageSnapshotEvent>()) {
      for (const auto& c : snap->cookies) candidates.push_back(c);
    } else if (auto* r = s.events[i].As<ResponseEvent>()) {
      for (const auto& c : r->set_cookies) candidates.push_back(c);
    }
  }
  auto same = [](const CookieRecord& a, const CookieRecord& b) {
    return NormalizeHost(a.domain) == NormalizeHost(b.domain) && a.path == b.path && a.name == b.name;
  };
  std::vector<CookieRecord> out;
  const auto now_ms = std::chrono::time_point_cast<std::chrono::milliseconds>(s.captured_at) +
                      std::chrono::milliseconds(t);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    bool superseded = false;
    for (std::size_t j = i + 1; j < candidates.size(); ++j) superseded |= same(candidates[i], candidates[j]);
    if (superseded) continue;
    if (candidates[i].expiry && *candidates[i].expiry <= now_ms) continue;
    out.push_back(candidates[i]);
  }
  std::sort(out.begin(), out.end(), [](const CookieRecord& a, const CookieRecord& b) {
    return std::tie(a.domain, a.name, a.path) < std::tie(b.domain, b.name, b.path);
  });
  return out;
}

TEST(SessionProperty, ParseSerializeRoundTrip) {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 200; ++i) {
    const auto s = RandomSession(rng);
    ASSERT_NO_THROW(ValidateSession(s));
    ASSERT_EQ(ParseSession(SerializeSession(s)), s) << i;
  }
}

TEST(SessionProperty, CookiesAtMatchesBruteForce) {
  std::mt19937_64 rng(29);
  for (int i = 0; i < 200; ++i) {
    const auto s = RandomSession(rng);
    for (std::int64_t t = 0; t <= EndTime(s) + 500; t += 250) {
      ASSERT_EQ(CookiesAt(s, t), BruteForceCookiesAt(s, t)) << "session " << i << " t " << t;
    }
  }
}

TEST(SessionProperty, LaterEventsDoNotChangeEarlierState) {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 200; ++i) {
    auto s = RandomSession(rng);
    const auto end = EndTime(s);
    std::vector<std::vector<CookieRecord>> before;
    for (std::int64_t t = 0; t <= end; t += 250) before.push_back(CookiesAt(s, t));
    SessionBuilder extra("https://www.a.example/", ScenarioKind::kNoAction);
    s.events.push_back({end + 1, StorageSnapshotEvent{}});
    s.events.push_back({end + 2, ResponseEvent{"r1", 200, {extra.Cookie("late", "v", "a.example", end)}}});
    std::size_t k = 0;
    for (std::int64_t t = 0; t <= end; t += 250) ASSERT_EQ(CookiesAt(s, t), before[k++]);
  }
}

}  // namespace
}  // namespace consent_audit

#include "consent_audit/synth.h"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <random>

#include "consent_audit/audit.h"
#include "consent_audit/errors.h"
#include "consent_audit/tcf.h"

namespace consent_audit {
namespace {

constexpr std::int64_t kActionMs = 4200;
constexpr int kDay = 86400;

constexpr std::string_view kInfoPageText =
    "Cookie policy. We use cookies for the following purposes: audience measurement, "
    "advertising and load balancing. Recipients: our advertising partners and the third "
    "parties listed below receive data. Storage period: each cookie is kept for at most 13 "
    "months; the retention period is shown in the table. Cookie list: lb (session, load "
    "balancing), _fpa (13 months, analytics), euconsent-v2 (6 months, consent). You can change "
    "your settings at any time via the cookie settings link in the footer. Data controller: "
    "Example Media SA, contact: privacy@example.test, data protection officer: "
    "dpo@example.test. Your rights: you have the right of access, the right to rectification, "
    "the right to erasure, the right to restriction of processing, the right to object, the "
    "right to data portability, and you may withdraw your consent at any time. You may lodge "
    "a complaint with the supervisory authority. You will not be subject to automated "
    "decision-making. Data may be transferred outside the EU under standard contractual "
    "clauses.";

bool Has(std::span<const Plant> plants, Plant p) {
  return std::find(plants.begin(), plants.end(), p) != plants.end();
}

std::string RandomHex(std::mt19937_64& rng, std::size_t n) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  for (std::size_t i = 0; i < n; ++i) out += kDigits[rng() & 0xF];
  return out;
}

std::string ConsentString(UtcTime at, bool positive) {
  tcf::TcfConsentRecord r;
  r.tcf_version = 2;
  r.created = std::chrono::duration_cast<tcf::Deciseconds>(at.time_since_epoch());
  r.last_updated = r.created;
  r.cmp_id = 10;
  r.cmp_version = 2;
  r.consent_screen = 1;
  r.vendor_list_version = 150;
  r.vendor_consents.max_vendor_id = 755;
  if (positive) {
    for (int p = 1; p <= 4; ++p) r.SetPurpose(p);
    r.vendor_consents.ids = {9, 755};
  }
  return tcf::EncodeTcf(r);
}

class SessionBuilder {
 public:
  SessionBuilder(std::string site_url, ScenarioKind scenario, std::string profile_id) {
    s_.site_url = std::move(site_url);
    s_.scenario = scenario;
    s_.viewport = {1366, 768};
    s_.profile_id = std::move(profile_id);
    s_.captured_at = *ParseUtc("2024-03-01T10:00:00Z");
  }

  CookieRecord Cookie(std::string name, std::string value, std::string domain, std::int64_t t,
                      std::optional<int> days, CookieSource source = CookieSource::kHeader) const {
    CookieRecord c;
    c.name = std::move(name);
    c.value = std::move(value);
    c.domain = std::move(domain);
    c.set_time = AbsoluteTime(s_, t);
    if (days) c.expiry = c.set_time + std::chrono::seconds(std::int64_t{*days} * kDay);
    c.source = source;
    return c;
  }

  std::string Request(std::int64_t t, std::string url, NameValueList params = {},
                      std::vector<CookieRecord> cookies_sent = {}) {
    RequestEvent r;
    r.id = "req-" + std::to_string(++next_request_);
    if (!params.empty()) {
      url += "?";
      for (std::size_t i = 0; i < params.size(); ++i) {
        url += (i ? "&" : "") + params[i].first + "=" + params[i].second;
      }
    }
    r.url = std::move(url);
    r.headers = {{"Accept", "*/*"}};
    r.query_params = std::move(params);
    r.cookies_sent = std::move(cookies_sent);
    Push(t, r);
    return r.id;
  }

  void Response(std::int64_t t, std::string request_id, std::vector<CookieRecord> set_cookies) {
    ResponseEvent r;
    r.request_id = std::move(request_id);
    r.set_cookies = std::move(set_cookies);
    Push(t, std::move(r));
  }

  void Snapshot(std::int64_t t) {
    StorageSnapshotEvent snap;
    if (!s_.events.empty()) snap.cookies = CookiesAt(s_, t);
    Push(t, std::move(snap));
  }

  std::vector<CookieRecord> JarFor(std::int64_t t, std::string_view suffix) const {
    std::vector<CookieRecord> out;
    for (auto& c : CookiesAt(s_, t)) {
      if (c.domain.ends_with(suffix)) out.push_back(std::move(c));
    }
    return out;
  }

  template <typename T>
  void Push(std::int64_t t, T payload) {
    s_.events.push_back({t, std::move(payload)});
  }

  const CapturedSession& session() const { return s_; }
  CapturedSession Build() && { return std::move(s_); }

 private:
  CapturedSession s_;
  int next_request_ = 0;
};

CapturedSession BuildSession(const SynthSite& site, std::string_view host, ScenarioKind scenario,
                             int index) {
  std::span<const Plant> plants = site.plants;
  std::seed_seq seed{index, static_cast<int>(scenario), 20240301};
  std::mt19937_64 rng(seed);
  SessionBuilder b(site.site_url, scenario,
                   "synth-" + site.site_id + "-" + std::string(ToString(scenario)));
  const std::string first_party = "https://" + std::string(host);
  const std::string h(host);

  b.Snapshot(0);
  auto main = b.Request(150, first_party + "/");
  b.Response(300, main, {b.Cookie("lb", "node-" + std::to_string(index % 7), h, 300, std::nullopt)});

  // The leak precedes the pre-registered consent of the R14 plant, which
  // would otherwise close the pre-consent window.
  if (Has(plants, Plant::kR2)) {
    std::string fpa = RandomHex(rng, 32);
    auto collect = b.Request(400, first_party + "/collect");
    b.Response(500, collect, {b.Cookie("_fpa", fpa, h, 500, 390, CookieSource::kScript)});
    b.Request(700, "https://sync.adnet.example/match", {{"uid", fpa}, {"src", "synth"}},
              b.JarFor(700, "adnet.example"));
  }
  if (Has(plants, Plant::kR1)) {
    auto px = b.Request(900, "https://ads.adnet.example/pixel.gif");
    b.Response(1000, px, {b.Cookie("IDE", RandomHex(rng, 64), ".adnet.example", 1000, 730)});
  }
  if (Has(plants, Plant::kR14)) {
    auto cmp = b.Request(1100, first_party + "/cmp.js");
    b.Response(1200, cmp,
               {b.Cookie("euconsent-v2", ConsentString(AbsoluteTime(b.session(), 1200), true), h,
                         1200, 150, CookieSource::kScript)});
  }

  DomSnapshotEvent dom;
  BannerRegion banner;
  banner.selector = "#cookie-banner";
  banner.text = "We use cookies to measure audience and show ads. Accept all | Reject all | Settings";
  if (Has(plants, Plant::kR20Wall)) {
    banner.bounding_box = {0, 76.8, 1366, 614.4};
    banner.is_overlay_blocking = true;
    dom.page_interactive = false;
  } else {
    banner.bounding_box = {0, 660, 1366, 108};
  }
  dom.banner_candidates = {banner};
  dom.info_page_text = std::string(kInfoPageText);
  dom.screenshot_ref = site.site_id + "/" + std::string(ToString(scenario)) + "-banner.png";
  b.Push(2500, std::move(dom));
  b.Snapshot(3000);

  if (scenario != ScenarioKind::kNoAction) b.Push(kActionMs, UserActionEvent{scenario});

  std::optional<bool> stored;
  switch (scenario) {
    case ScenarioKind::kAcceptAll:
      stored = true;
      break;
    case ScenarioKind::kRejectAll:
      stored = Has(plants, Plant::kR15);
      break;
    case ScenarioKind::kCloseBanner:
    case ScenarioKind::kScroll:
      if (Has(plants, Plant::kR11)) {
        stored = true;
      } else if (Has(plants, Plant::kR14)) {
        stored = false;
      }
      break;
    default:
      break;
  }
  if (stored) {
    auto consent = b.Request(4400, first_party + "/consent");
    b.Response(4500, consent,
               {b.Cookie("euconsent-v2", ConsentString(AbsoluteTime(b.session(), 4500), *stored), h,
                         4500, 150, CookieSource::kScript)});
  }
  if (scenario == ScenarioKind::kAcceptAll) {
    auto bid = b.Request(4700, "https://ads.adnet.example/bid", {}, b.JarFor(4700, "adnet.example"));
    b.Response(4800, bid, {b.Cookie("uid", RandomHex(rng, 32), ".adnet.example", 4800, 365)});
  }
  b.Snapshot(5000);
  return std::move(b).Build();
}

}  // namespace

std::string_view ToToken(Plant p) {
  switch (p) {
    case Plant::kClean: return "clean";
    case Plant::kR1: return "R1";
    case Plant::kR2: return "R2";
    case Plant::kR11: return "R11";
    case Plant::kR14: return "R14";
    case Plant::kR15: return "R15";
    case Plant::kR20Wall: return "R20-wall";
  }
  return "";
}

const std::vector<Plant>& AllPlants() {
  static const std::vector<Plant> kAll = {Plant::kClean, Plant::kR1,  Plant::kR2,     Plant::kR11,
                                          Plant::kR14,   Plant::kR15, Plant::kR20Wall};
  return kAll;
}

std::optional<Plant> PlantFromToken(std::string_view token) {
  for (auto p : AllPlants()) {
    if (ToToken(p) == token) return p;
  }
  return std::nullopt;
}

std::vector<std::vector<Plant>> ParsePlantSpec(std::string_view spec) {
  std::vector<std::vector<Plant>> sites;
  auto split = [](std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    while (true) {
      auto pos = s.find(sep);
      parts.push_back(s.substr(0, pos));
      if (pos == std::string_view::npos) break;
      s.remove_prefix(pos + 1);
    }
    return parts;
  };
  for (auto site : split(spec, ',')) {
    std::vector<Plant> plants;
    for (auto token : split(site, '+')) {
      while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
      while (!token.empty() && token.back() == ' ') token.remove_suffix(1);
      auto p = PlantFromToken(token);
      if (!p) throw ConfigError("unknown plant token '" + std::string(token) + "'");
      if (std::find(plants.begin(), plants.end(), *p) == plants.end()) plants.push_back(*p);
    }
    if (plants.size() > 1 && Has(plants, Plant::kClean)) {
      throw ConfigError("'clean' cannot be combined with other plants");
    }
    sites.push_back(std::move(plants));
  }
  return sites;
}

std::set<int> ExpectedViolations(std::span<const Plant> plants) {
  std::set<int> out;
  for (auto p : plants) {
    switch (p) {
      case Plant::kR1: out.insert(1); break;
      case Plant::kR2: out.insert(2); break;
      case Plant::kR11: out.insert(11); break;
      case Plant::kR14: out.insert(14); break;
      case Plant::kR15: out.insert(15); break;
      case Plant::kR20Wall: out.insert(20); break;
      case Plant::kClean: break;
    }
  }
  return out;
}

SynthSite SynthesizeSite(std::span<const Plant> plants, int index) {
  SynthSite site;
  site.plants.assign(plants.begin(), plants.end());
  std::string label;
  for (auto p : plants) {
    if (!label.empty()) label += "-";
    for (char c : ToToken(p)) label += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  char prefix[8];
  std::snprintf(prefix, sizeof prefix, "%02d", index);
  site.site_id = std::string(prefix) + "-" + label;
  std::string host = "www.s" + site.site_id + ".synth.test";
  site.site_url = "https://" + host + "/";
  for (auto scenario : {ScenarioKind::kNoAction, ScenarioKind::kCloseBanner, ScenarioKind::kScroll,
                        ScenarioKind::kAcceptAll, ScenarioKind::kRejectAll}) {
    site.sessions.push_back(BuildSession(site, host, scenario, index));
    site.sessions.back().source_name =
        site.site_id + "/" + std::string(ToString(scenario)) + std::string(kSessionSuffix);
  }
  return site;
}

void WriteSynthCorpus(const std::filesystem::path& out, std::span<const SynthSite> sites) {
  for (const auto& site : sites) {
    auto dir = out / site.site_id;
    std::filesystem::create_directories(dir);
    for (const auto& s : site.sessions) {
      ValidateSession(s);
      WriteFileAtomic(dir / (std::string(ToString(s.scenario)) + std::string(kSessionSuffix)),
                      SerializeSession(s));
    }
  }
}

}  // namespace consent_audit

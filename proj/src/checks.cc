#include "consent_audit/checks.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <set>
#include <tuple>
#include <utility>

#include <openssl/evp.h>

#include "consent_audit/errors.h"
#include "consent_audit/url.h"

namespace consent_audit {
namespace {

using nlohmann::json;

std::string ToLowerAscii(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> SplitLines(std::string_view text) {
  std::vector<std::string_view> lines;
  while (!text.empty()) {
    auto nl = text.find('\n');
    lines.push_back(text.substr(0, nl));
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  return lines;
}

std::string SiteHost(std::string_view site_url) {
  if (auto h = HostOfUrl(site_url)) return *h;
  return NormalizeHost(site_url);
}

std::string ViewportName(const Viewport& v) {
  return std::to_string(v.width_px) + "x" + std::to_string(v.height_px);
}

// Something written to browser storage during a session.
struct StoredElement {
  bool is_cookie = true;
  std::string host;
  std::string name;
  std::string value;
  std::optional<std::int64_t> lifespan_seconds;
  std::int64_t t_ms = 0;
};

using ElementKey = std::tuple<bool, std::string, std::string>;

ElementKey KeyOf(const StoredElement& e) { return {e.is_cookie, NormalizeHost(e.host), e.name}; }

// Every element written strictly before |before_ms| (all, when unset), first
// occurrence per (kind, host, name).
std::vector<StoredElement> StoredElements(const CapturedSession& s,
                                          std::optional<std::int64_t> before_ms) {
  std::vector<StoredElement> out;
  std::set<ElementKey> seen;
  auto add = [&](StoredElement e) {
    if (seen.insert(KeyOf(e)).second) out.push_back(std::move(e));
  };
  auto add_cookie = [&](const CookieRecord& c, std::int64_t t) {
    add({true, c.domain, c.name, c.value, c.LifespanSeconds(), t});
  };
  for (const auto& ev : s.events) {
    if (before_ms && ev.timestamp_ms >= *before_ms) break;
    if (const auto* snap = ev.As<StorageSnapshotEvent>()) {
      for (const auto& c : snap->cookies) add_cookie(c, ev.timestamp_ms);
      for (const auto& e : snap->local_storage) {
        add({false, e.origin, e.key, e.value, std::nullopt, ev.timestamp_ms});
      }
    } else if (const auto* resp = ev.As<ResponseEvent>()) {
      for (const auto& c : resp->set_cookies) add_cookie(c, ev.timestamp_ms);
    }
  }
  return out;
}

std::map<ElementKey, std::string> ValuesByKey(const CapturedSession* s) {
  std::map<ElementKey, std::string> out;
  if (s == nullptr) return out;
  for (auto& e : StoredElements(*s, std::nullopt)) out.emplace(KeyOf(e), std::move(e.value));
  return out;
}

json ClassificationJson(const Classification& c) {
  json classes = json::array();
  for (auto p : c.all_classes) classes.push_back(ToToken(p));
  return {{"purpose", ToToken(c.purpose)},
          {"purpose_classes", classes},
          {"consent_required", ToString(c.consent_required)},
          {"party", ToString(c.relation.party)},
          {"classified_by", ToString(c.source)}};
}

json IdentifierJson(const IdentifierVerdict& v) {
  return {{"identifier_score", v.score}, {"triggered_features", v.triggered_features}};
}

Evidence MakeEvidence(EvidenceKind kind, json payload, const CapturedSession& s,
                      std::optional<std::int64_t> t) {
  Evidence e;
  e.kind = kind;
  e.payload = std::move(payload);
  e.session_ref = {s.source_name, t};
  return e;
}

Evidence ElementEvidence(const StoredElement& e, const IdentifierVerdict& id,
                         const Classification& c, const CapturedSession& s) {
  json p = {{"name", e.name}, {"value", e.value}};
  p[e.is_cookie ? "domain" : "origin"] = e.host;
  if (e.is_cookie) {
    p["lifespan_seconds"] = e.lifespan_seconds ? json(*e.lifespan_seconds) : json(nullptr);
  }
  p.update(IdentifierJson(id));
  p.update(ClassificationJson(c));
  return MakeEvidence(e.is_cookie ? EvidenceKind::kCookie : EvidenceKind::kStorageEntry,
                      std::move(p), s, e.t_ms);
}

Verdict MakeVerdict(int requirement, Outcome outcome, std::string note = {}) {
  Verdict v;
  v.requirement = requirement;
  v.outcome = outcome;
  v.automated_outcome = outcome;
  v.confidence_note = std::move(note);
  return v;
}

int Severity(Outcome o) {
  switch (o) {
    case Outcome::kViolation:
      return 3;
    case Outcome::kInconclusive:
      return 2;
    case Outcome::kCompliant:
      return 1;
    default:
      return 0;
  }
}

void AppendNote(std::string& note, std::string_view extra) {
  if (extra.empty() || note.find(extra) != std::string::npos) return;
  if (!note.empty()) note += "; ";
  note += extra;
}

// Worst outcome wins: violation, then inconclusive, then compliant.
Verdict Combine(int requirement, std::vector<Verdict> parts) {
  Verdict out = MakeVerdict(requirement, Outcome::kCompliant);
  for (auto& p : parts) {
    if (Severity(p.outcome) > Severity(out.outcome)) out.outcome = p.outcome;
    for (auto& e : p.evidence) out.evidence.push_back(std::move(e));
    AppendNote(out.confidence_note, p.confidence_note);
    for (auto& a : p.advisories) {
      if (std::find(out.advisories.begin(), out.advisories.end(), a) == out.advisories.end()) {
        out.advisories.push_back(std::move(a));
      }
    }
  }
  out.automated_outcome = out.outcome;
  return out;
}

void RequireCleanStart(const CapturedSession& s) {
  const auto* init = InitialSnapshot(s);
  if (init == nullptr) {
    throw PreconditionError("no initial storage snapshot in " + s.source_name);
  }
  if (!init->cookies.empty() || !init->local_storage.empty()) {
    throw PreconditionError("initial storage snapshot is not empty in " + s.source_name);
  }
}

void RequireScenario(const CapturedSession& s, std::initializer_list<ScenarioKind> allowed) {
  if (std::find(allowed.begin(), allowed.end(), s.scenario) == allowed.end()) {
    throw PreconditionError(std::string("unexpected scenario ") +
                            std::string(ToString(s.scenario)) + " in " + s.source_name);
  }
}

constexpr std::string_view kUnknownPurposeNote =
    "identifier-like values of unknown purpose found; set strict_unknown to treat them as "
    "consent-requiring";

// Collects elements whose consent requirement decides the outcome.
struct Candidates {
  std::vector<Evidence> offending;
  std::vector<Evidence> unknown;

  void Add(ConsentRequirement req, Evidence e, bool strict_unknown) {
    if (req == ConsentRequirement::kYes ||
        (req == ConsentRequirement::kUnknown && strict_unknown)) {
      offending.push_back(std::move(e));
    } else if (req == ConsentRequirement::kUnknown) {
      unknown.push_back(std::move(e));
    }
  }

  Verdict ToVerdict(int requirement) && {
    if (!offending.empty()) {
      Verdict v = MakeVerdict(requirement, Outcome::kViolation);
      v.evidence = std::move(offending);
      return v;
    }
    if (!unknown.empty()) {
      Verdict v = MakeVerdict(requirement, Outcome::kInconclusive, std::string(kUnknownPurposeNote));
      v.evidence = std::move(unknown);
      return v;
    }
    return MakeVerdict(requirement, Outcome::kCompliant);
  }
};

std::string HexLower(std::string_view s) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(s.size() * 2);
  for (unsigned char c : s) {
    out.push_back(kDigits[c >> 4]);
    out.push_back(kDigits[c & 0xF]);
  }
  return out;
}

std::string Base64(std::string_view s) {
  std::string out(4 * ((s.size() + 2) / 3) + 1, '\0');
  int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                          reinterpret_cast<const unsigned char*>(s.data()),
                          static_cast<int>(s.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

// Encodings under which a stored value is recognized inside a parameter.
std::vector<std::pair<std::string, std::string>> Recodings(const std::string& value) {
  std::vector<std::pair<std::string, std::string>> out = {{"exact", value},
                                                          {"hex", HexLower(value)}};
  std::string b64 = Base64(value);
  std::string unpadded = b64.substr(0, b64.find_last_not_of('=') + 1);
  std::string url = unpadded;
  std::replace(url.begin(), url.end(), '+', '-');
  std::replace(url.begin(), url.end(), '/', '_');
  // Unpadded forms are prefixes of the padded ones, so substring search on
  // them covers both.
  out.emplace_back("base64", unpadded);
  if (url != unpadded) out.emplace_back("base64url", url);
  return out;
}

std::optional<std::int64_t> FirstPositiveConsent(const CapturedSession& s,
                                                 const CheckConfig& config) {
  for (const auto& item : ConsentWrites(s, 0, std::nullopt, config)) {
    if (item.reading == ConsentReading::kPositive) return item.t_ms;
  }
  return std::nullopt;
}

json ConsentJson(const ConsentItem& item) {
  json p = {{"name", item.name},
            {"value", item.value},
            {item.is_cookie ? "domain" : "origin", item.host},
            {"reading", item.reading == ConsentReading::kPositive   ? "positive"
                        : item.reading == ConsentReading::kNegative ? "negative"
                                                                    : "unrecognized"}};
  if (item.record) {
    std::vector<int> purposes;
    for (int i = 1; i <= tcf::kNumPurposes; ++i) {
      if (item.record->HasPurpose(i)) purposes.push_back(i);
    }
    p["tcf_version"] = item.record->tcf_version;
    p["cmp_id"] = item.record->cmp_id;
    p["purposes"] = purposes;
    p["vendor_count"] = item.record->vendor_consents.ids.size();
  }
  return p;
}

Evidence ConsentEvidence(const ConsentItem& item, const CapturedSession& s) {
  return MakeEvidence(EvidenceKind::kConsentString, ConsentJson(item), s, item.t_ms);
}

void AddConsentItem(std::vector<ConsentItem>& out, std::string name, std::string value,
                    std::string host, bool is_cookie, std::optional<std::int64_t> lifespan,
                    std::int64_t t, const CheckConfig& config) {
  if (!IsConsentStorageName(name, config)) return;
  ConsentItem item;
  item.reading = ReadConsentValue(name, value, &item.record);
  item.name = std::move(name);
  item.value = std::move(value);
  item.host = std::move(host);
  item.is_cookie = is_cookie;
  item.lifespan_seconds = lifespan;
  item.t_ms = t;
  out.push_back(std::move(item));
}

struct InfoPageSource {
  std::optional<std::string> text;
  SessionRef ref;  // the DOM event holding the text, else the first capture
};

InfoPageSource InfoPageText(const SiteCapture& site) {
  for (const auto& s : site.sessions) {
    for (const auto& ev : s.events) {
      if (const auto* dom = ev.As<DomSnapshotEvent>(); dom && dom->info_page_text) {
        return {dom->info_page_text, {s.source_name, ev.timestamp_ms}};
      }
    }
  }
  InfoPageSource none;
  if (!site.sessions.empty()) none.ref.session_file = site.sessions.front().source_name;
  return none;
}

std::optional<Evidence> ScreenshotEvidence(const SiteCapture& site) {
  for (const auto* s : site.All(ScenarioKind::kNoAction)) {
    for (const auto& ev : s->events) {
      if (const auto* dom = ev.As<DomSnapshotEvent>(); dom && dom->screenshot_ref) {
        return MakeEvidence(EvidenceKind::kScreenshotRef,
                            {{"asset", *dom->screenshot_ref},
                             {"viewport", ViewportName(s->viewport)}},
                            *s, ev.timestamp_ms);
      }
    }
  }
  return std::nullopt;
}

bool IsWordChar(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

std::string Snippet(std::string_view text, std::size_t offset, std::size_t length) {
  constexpr std::size_t kContext = 40;
  std::size_t begin = offset > kContext ? offset - kContext : 0;
  std::size_t end = std::min(text.size(), offset + length + kContext);
  return std::string(text.substr(begin, end - begin));
}

constexpr std::size_t kMaxMatchesPerCategory = 8;

constexpr std::array<std::string_view, 16> kInformationCategories = {
    "purposes",
    "recipients",
    "storage_period",
    "cookie_names",
    "controller",
    "configuration",
    "rights.access",
    "rights.rectification",
    "rights.erasure",
    "rights.restriction",
    "rights.objection",
    "rights.portability",
    "rights.withdraw_consent",
    "rights.complaint",
    "rights.automated_decision",
    "rights.international_transfer",
};

Evidence CategoryEvidence(const InformationEvidence& info, std::string_view category) {
  json matches = json::array();
  auto it = info.matches.find(std::string(category));
  if (it != info.matches.end()) {
    for (const auto& m : it->second) {
      matches.push_back({{"phrase", m.phrase}, {"offset", m.offset}, {"snippet", m.snippet}});
    }
  }
  Evidence e;
  e.kind = EvidenceKind::kTextMatch;
  e.payload = {{"category", category}, {"present", !matches.empty()}, {"matches", matches}};
  return e;
}

Verdict InformedVerdict(int requirement, const InformationEvidence& info, const SessionRef& source,
                        std::initializer_list<std::string_view> categories) {
  Verdict v = MakeVerdict(requirement, Outcome::kManualPending,
                          "keyword evidence only; the operator decides");
  for (auto c : categories) {
    v.evidence.push_back(CategoryEvidence(info, c));
    v.evidence.back().session_ref = source;
  }
  return v;
}

Verdict Guarded(int requirement, const auto& fn) {
  try {
    return fn();
  } catch (const PreconditionError& e) {
    return MakeVerdict(requirement, Outcome::kInconclusive, e.what());
  }
}

}  // namespace

const std::vector<LifespanProfile>& LifespanProfile::Builtins() {
  static const std::vector<LifespanProfile> kProfiles = {
      {"cnil", 395, 180},
      {"spanish", std::nullopt, 730},
      {"danish", std::nullopt, 1825},
      {"irish", std::nullopt, 180},
  };
  return kProfiles;
}

std::optional<LifespanProfile> LifespanProfile::Builtin(std::string_view name) {
  std::string lower = ToLowerAscii(name);
  for (const auto& p : Builtins()) {
    if (p.name == lower) return p;
  }
  return std::nullopt;
}

Lexicon Lexicon::Parse(std::string_view text) {
  Lexicon lex;
  std::string* current = nullptr;
  std::string current_name;
  int line_no = 0;
  for (auto raw : SplitLines(text)) {
    ++line_no;
    auto line = Trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) throw ParseError(line_no, "bad category header");
      current_name = std::string(Trim(line.substr(1, line.size() - 2)));
      lex.categories_[current_name];
      current = &current_name;
      continue;
    }
    if (current == nullptr) throw ParseError(line_no, "phrase outside a category");
    lex.categories_[current_name].push_back(ToLowerAscii(line));
  }
  return lex;
}

std::span<const std::string_view> InformationCategories() { return kInformationCategories; }

SelectorRules SelectorRules::Parse(std::string_view text) {
  SelectorRules rules;
  int line_no = 0;
  for (auto raw : SplitLines(text)) {
    ++line_no;
    auto line = Trim(raw);
    if (line.empty() || line.front() == '!' || line.front() == '[') continue;
    auto sep = line.find("##");
    if (sep == std::string_view::npos) throw ParseError(line_no, "expected '##'");
    Rule rule;
    rule.selector = std::string(Trim(line.substr(sep + 2)));
    if (rule.selector.empty()) throw ParseError(line_no, "empty selector");
    auto hosts = line.substr(0, sep);
    while (!hosts.empty()) {
      auto comma = hosts.find(',');
      auto h = Trim(hosts.substr(0, comma));
      if (!h.empty()) {
        if (!IsValidHostName(h)) throw ParseError(line_no, "invalid host " + std::string(h));
        rule.hosts.push_back(NormalizeHost(h));
      }
      if (comma == std::string_view::npos) break;
      hosts.remove_prefix(comma + 1);
    }
    rules.rules_.push_back(std::move(rule));
  }
  return rules;
}

bool SelectorRules::Matches(std::string_view selector, std::string_view site_host) const {
  std::string host = NormalizeHost(site_host);
  auto host_matches = [&](const std::string& h) {
    return host == h || (host.size() > h.size() && host.ends_with(h) &&
                         host[host.size() - h.size() - 1] == '.');
  };
  auto sel = Trim(selector);
  for (const auto& r : rules_) {
    if (r.selector != sel) continue;
    if (r.hosts.empty() || std::any_of(r.hosts.begin(), r.hosts.end(), host_matches)) return true;
  }
  return false;
}

std::vector<const CapturedSession*> SiteCapture::All(ScenarioKind scenario) const {
  std::vector<const CapturedSession*> out;
  for (const auto& s : sessions) {
    if (s.scenario == scenario) out.push_back(&s);
  }
  return out;
}

const CapturedSession* SiteCapture::TwinOf(const CapturedSession& session) const {
  if (session.scenario != ScenarioKind::kNoAction) return nullptr;
  const CapturedSession* fallback = nullptr;
  for (const auto& s : sessions) {
    if (&s == &session || s.scenario != ScenarioKind::kNoAction ||
        s.profile_id == session.profile_id) {
      continue;
    }
    if (s.viewport == session.viewport) return &s;
    if (fallback == nullptr) fallback = &s;
  }
  return fallback;
}

bool IsConsentStorageName(std::string_view name, const CheckConfig& config) {
  if (tcf::IsTcfStorageName(name)) return true;
  return std::find(config.consent_storage_names.begin(), config.consent_storage_names.end(),
                   name) != config.consent_storage_names.end();
}

ConsentReading ReadConsentValue(std::string_view name, std::string_view value,
                                std::optional<tcf::TcfConsentRecord>* record) {
  if (!tcf::IsTcfStorageName(name)) return ConsentReading::kUnrecognized;
  try {
    auto decoded = tcf::DecodeTcf(value);
    auto polarity = tcf::Polarity(decoded);
    if (record != nullptr) *record = std::move(decoded);
    return polarity == tcf::ConsentPolarity::kPositive ? ConsentReading::kPositive
                                                       : ConsentReading::kNegative;
  } catch (const tcf::DecodeError&) {
    return ConsentReading::kUnrecognized;
  }
}

std::vector<ConsentItem> ConsentStateAtEnd(const CapturedSession& session,
                                           const CheckConfig& config) {
  std::vector<ConsentItem> out;
  std::int64_t end = EndTime(session);
  for (const auto& c : CookiesAt(session, end)) {
    AddConsentItem(out, c.name, c.value, c.domain, true, c.LifespanSeconds(), end, config);
  }
  for (const auto& e : LocalStorageAt(session, end)) {
    AddConsentItem(out, e.key, e.value, e.origin, false, std::nullopt, end, config);
  }
  return out;
}

std::vector<ConsentItem> ConsentWrites(const CapturedSession& session, std::int64_t from_ms,
                                       std::optional<std::int64_t> until_ms,
                                       const CheckConfig& config) {
  std::vector<ConsentItem> out;
  for (const auto& ev : session.events) {
    std::int64_t t = ev.timestamp_ms;
    if (t < from_ms) continue;
    if (until_ms && t >= *until_ms) break;
    if (const auto* snap = ev.As<StorageSnapshotEvent>()) {
      for (const auto& c : snap->cookies) {
        AddConsentItem(out, c.name, c.value, c.domain, true, c.LifespanSeconds(), t, config);
      }
      for (const auto& e : snap->local_storage) {
        AddConsentItem(out, e.key, e.value, e.origin, false, std::nullopt, t, config);
      }
    } else if (const auto* resp = ev.As<ResponseEvent>()) {
      for (const auto& c : resp->set_cookies) {
        AddConsentItem(out, c.name, c.value, c.domain, true, c.LifespanSeconds(), t, config);
      }
    }
  }
  return out;
}

Verdict CheckPriorStorage(const CapturedSession& session, const CapturedSession* twin,
                          const AuditContext& ctx) {
  RequireScenario(session, {ScenarioKind::kNoAction});
  RequireCleanStart(session);
  const auto& cfg = ctx.config;
  auto twin_values = ValuesByKey(twin);
  Candidates found;
  for (const auto& e : StoredElements(session, FirstActionTime(session))) {
    if (IsConsentStorageName(e.name, cfg)) continue;
    auto twin_it = twin_values.find(KeyOf(e));
    const std::string* twin_value = twin_it == twin_values.end() ? nullptr : &twin_it->second;
    auto id = ScoreIdentifier(ExtractFeatures(e.value, e.lifespan_seconds, twin_value),
                              cfg.identifier);
    if (!id.is_likely_identifier) continue;
    auto c = Classify(e.host, e.name, session.site_url, ctx.manifest, ctx.trackers, ctx.suffixes);
    found.Add(c.consent_required, ElementEvidence(e, id, c, session), cfg.strict_unknown);
  }
  Verdict v = std::move(found).ToVerdict(1);
  if (twin == nullptr) {
    AppendNote(v.confidence_note, "no second clean profile; cross-profile comparison skipped");
  }
  return v;
}

Verdict CheckPriorSending(const CapturedSession& session, const CapturedSession* twin,
                          const AuditContext& ctx) {
  const auto& cfg = ctx.config;
  std::optional<std::int64_t> window_end = FirstPositiveConsent(session, cfg);
  if (session.scenario == ScenarioKind::kAcceptAll) {
    if (auto action = FirstActionTime(session)) {
      window_end = window_end ? std::min(*window_end, *action) : *action;
    }
  }
  auto twin_values = ValuesByKey(twin);
  auto score = [&](const StoredElement& e) {
    auto it = twin_values.find(KeyOf(e));
    return ScoreIdentifier(
        ExtractFeatures(e.value, e.lifespan_seconds, it == twin_values.end() ? nullptr : &it->second),
        cfg.identifier);
  };

  Candidates found;
  for (const auto& ev : session.events) {
    if (window_end && ev.timestamp_ms >= *window_end) break;
    const auto* req = ev.As<RequestEvent>();
    if (req == nullptr) continue;
    auto dest = HostOfUrl(req->url);
    if (!dest) continue;
    PartyRelation rel;
    try {
      rel = RelationOf(session.site_url, *dest, ctx.suffixes);
    } catch (const SuffixError&) {
      continue;
    }
    if (rel.party != Party::kThirdParty) continue;

    std::set<std::string> reported;
    auto report = [&](const StoredElement& e, const IdentifierVerdict& id, json detail) {
      auto c = AsThirdParty(
          Classify(e.host, e.name, session.site_url, ctx.manifest, ctx.trackers, ctx.suffixes));
      json p = {{"request_id", req->id},
                {"url", req->url},
                {"destination", *dest},
                {"destination_domain", rel.element_registrable_domain},
                {"element", {{"name", e.name}, {e.is_cookie ? "domain" : "origin", e.host}}}};
      p.update(detail);
      p.update(IdentifierJson(id));
      p.update(ClassificationJson(c));
      found.Add(c.consent_required,
                MakeEvidence(EvidenceKind::kRequest, std::move(p), session, ev.timestamp_ms),
                cfg.strict_unknown);
    };

    for (const auto& c : req->cookies_sent) {
      if (IsConsentStorageName(c.name, cfg)) continue;
      StoredElement e{true, c.domain, c.name, c.value, c.LifespanSeconds(), ev.timestamp_ms};
      auto id = score(e);
      if (!id.is_likely_identifier) continue;
      reported.insert(c.name);
      report(e, id, {{"via", "cookie"}, {"value", c.value}});
    }

    if (req->query_params.empty()) continue;
    for (const auto& e : StoredElements(session, ev.timestamp_ms)) {
      if (e.value.size() < cfg.identifier.min_length || IsConsentStorageName(e.name, cfg) ||
          reported.count(e.name) != 0) {
        continue;
      }
      auto id = score(e);
      if (!id.is_likely_identifier) continue;
      bool hit = false;
      for (const auto& [encoding, needle] : Recodings(e.value)) {
        for (const auto& [param, value] : req->query_params) {
          if (value.find(needle) == std::string::npos) continue;
          report(e, id,
                 {{"via", "query_param"}, {"param", param}, {"value", value}, {"encoding", encoding}});
          hit = true;
          break;
        }
        if (hit) break;
      }
      if (hit) reported.insert(e.name);
    }
  }
  Verdict v = std::move(found).ToVerdict(2);
  AppendNote(v.confidence_note,
             "identifiers sent encrypted or obfuscated are not detected; only exact, hex and "
             "base64 re-encodings of stored values are matched; fingerprinting is not assessed");
  return v;
}

Verdict CheckAffirmativeAction(const CapturedSession& session, const AuditContext& ctx) {
  RequireScenario(session, {ScenarioKind::kCloseBanner, ScenarioKind::kScroll});
  auto items = ConsentStateAtEnd(session, ctx.config);
  std::vector<Evidence> positive, unrecognized;
  for (const auto& item : items) {
    if (item.reading == ConsentReading::kPositive) positive.push_back(ConsentEvidence(item, session));
    if (item.reading == ConsentReading::kUnrecognized) {
      unrecognized.push_back(ConsentEvidence(item, session));
    }
  }
  if (!positive.empty()) {
    Verdict v = MakeVerdict(11, Outcome::kViolation);
    v.evidence = std::move(positive);
    return v;
  }
  if (!unrecognized.empty()) {
    Verdict v = MakeVerdict(11, Outcome::kInconclusive, "consent stored in an unrecognized format");
    v.evidence = std::move(unrecognized);
    return v;
  }
  return MakeVerdict(11, Outcome::kCompliant);
}

Verdict CheckPostConsentRegistration(const CapturedSession& session, const AuditContext& ctx) {
  RequireScenario(session, {ScenarioKind::kNoAction});
  RequireCleanStart(session);
  std::vector<Evidence> positive, negative, unrecognized;
  for (const auto& item : ConsentWrites(session, 0, FirstActionTime(session), ctx.config)) {
    auto& bucket = item.reading == ConsentReading::kPositive   ? positive
                   : item.reading == ConsentReading::kNegative ? negative
                                                               : unrecognized;
    bucket.push_back(ConsentEvidence(item, session));
  }
  if (!positive.empty()) {
    Verdict v = MakeVerdict(14, Outcome::kViolation);
    v.evidence = std::move(positive);
    return v;
  }
  if (!unrecognized.empty()) {
    Verdict v = MakeVerdict(14, Outcome::kInconclusive, "consent stored in an unrecognized format");
    v.evidence = std::move(unrecognized);
    return v;
  }
  Verdict v = MakeVerdict(14, Outcome::kCompliant);
  if (!negative.empty()) {
    v.advisories.push_back("refusal pre-registered");
    v.evidence = std::move(negative);
  }
  return v;
}

Verdict CheckCorrectRegistration(const CapturedSession& session, const AuditContext& ctx) {
  RequireScenario(session, {ScenarioKind::kAcceptAll, ScenarioKind::kRejectAll});
  if (!FirstActionTime(session)) {
    throw PreconditionError("no user action in " + session.source_name);
  }
  bool accepting = session.scenario == ScenarioKind::kAcceptAll;
  auto items = ConsentStateAtEnd(session, ctx.config);
  std::vector<Evidence> evidence;
  bool any_positive = false, any_negative = false, any_unrecognized = false;
  for (const auto& item : items) {
    any_positive |= item.reading == ConsentReading::kPositive;
    any_negative |= item.reading == ConsentReading::kNegative;
    any_unrecognized |= item.reading == ConsentReading::kUnrecognized;
    evidence.push_back(ConsentEvidence(item, session));
  }
  Verdict v;
  if (accepting) {
    if (any_negative && !any_positive) {
      v = MakeVerdict(15, Outcome::kViolation, "accepted, but the stored consent is negative");
    } else if (any_positive) {
      v = MakeVerdict(15, Outcome::kCompliant);
    } else if (any_unrecognized) {
      v = MakeVerdict(15, Outcome::kInconclusive, "consent stored in an unrecognized format");
    } else {
      v = MakeVerdict(15, Outcome::kInconclusive, "accepted, but no consent storage found");
    }
  } else {
    if (any_positive) {
      v = MakeVerdict(15, Outcome::kViolation, "refused, but the stored consent is positive");
      std::erase_if(evidence, [](const Evidence& e) { return e.payload["reading"] != "positive"; });
    } else if (any_negative) {
      v = MakeVerdict(15, Outcome::kCompliant);
    } else if (any_unrecognized) {
      v = MakeVerdict(15, Outcome::kInconclusive, "consent stored in an unrecognized format");
    } else {
      v = MakeVerdict(15, Outcome::kCompliant);
      v.advisories.push_back("refusal not registered");
    }
  }
  v.evidence = std::move(evidence);
  return v;
}

Verdict CheckConsentWall(const CapturedSession& session, const AuditContext& ctx) {
  RequireScenario(session, {ScenarioKind::kNoAction});
  const DomSnapshotEvent* dom = nullptr;
  std::int64_t dom_t = 0;
  auto action = FirstActionTime(session);
  for (const auto& ev : session.events) {
    if (action && ev.timestamp_ms >= *action) break;
    if (const auto* d = ev.As<DomSnapshotEvent>()) {
      dom = d;
      dom_t = ev.timestamp_ms;
    }
  }
  std::string viewport = ViewportName(session.viewport);
  if (dom == nullptr) {
    return MakeVerdict(20, Outcome::kInconclusive, "no DOM snapshot at " + viewport);
  }
  std::string host = SiteHost(session.site_url);
  Verdict v = MakeVerdict(20, Outcome::kCompliant);
  bool detected = false;
  for (const auto& b : dom->banner_candidates) {
    if (!ctx.selector_rules.Matches(b.selector, host)) continue;
    detected = true;
    double ratio = b.AreaRatio(session.viewport);
    bool wall = (b.is_overlay_blocking || ratio >= ctx.config.wall_area_threshold) &&
                !dom->page_interactive;
    if (wall) v.outcome = Outcome::kViolation;
    v.evidence.push_back(MakeEvidence(
        EvidenceKind::kBannerGeometry,
        {{"selector", b.selector},
         {"viewport", viewport},
         {"bounding_box",
          {{"x", b.bounding_box.x}, {"y", b.bounding_box.y}, {"w", b.bounding_box.w},
           {"h", b.bounding_box.h}}},
         {"area_ratio", ratio},
         {"is_overlay_blocking", b.is_overlay_blocking},
         {"page_interactive", dom->page_interactive},
         {"consent_wall", wall}},
        session, dom_t));
  }
  if (!detected) {
    return MakeVerdict(20, Outcome::kInconclusive, "no banner matched the selector rules at " + viewport);
  }
  v.automated_outcome = v.outcome;
  return v;
}

bool InformationEvidence::Present(std::string_view category) const {
  auto it = matches.find(std::string(category));
  return it != matches.end() && !it->second.empty();
}

InformationEvidence InfoPageScan(std::optional<std::string_view> text, const Lexicon& lexicon,
                                 std::span<const std::string> observed_cookie_names) {
  InformationEvidence info;
  for (auto c : kInformationCategories) info.matches[std::string(c)];
  if (!text || Trim(*text).empty()) return info;
  info.page_present = true;
  std::string lower = ToLowerAscii(*text);
  auto scan = [&](const std::string& category, const std::string& phrase, bool whole_word) {
    auto& out = info.matches[category];
    for (std::size_t pos = lower.find(phrase); pos != std::string::npos && !phrase.empty();
         pos = lower.find(phrase, pos + 1)) {
      if (out.size() >= kMaxMatchesPerCategory) return;
      if (whole_word) {
        std::size_t end = pos + phrase.size();
        if ((pos > 0 && IsWordChar(lower[pos - 1])) || (end < lower.size() && IsWordChar(lower[end]))) {
          continue;
        }
      }
      out.push_back({phrase, pos, Snippet(*text, pos, phrase.size())});
    }
  };
  for (const auto& [category, phrases] : lexicon.categories()) {
    for (const auto& phrase : phrases) scan(category, phrase, false);
  }
  for (const auto& name : observed_cookie_names) {
    if (name.size() >= 3) scan("cookie_names", ToLowerAscii(name), true);
  }
  return info;
}

std::vector<Finding> LifespanFindings(const SiteCapture& site, const AuditContext& ctx) {
  const auto& profile = ctx.lifespan_profile;
  struct Longest {
    StoredElement element;
    const CapturedSession* session;
  };
  std::map<ElementKey, Longest> cookies;
  for (const auto& s : site.sessions) {
    for (auto& e : StoredElements(s, std::nullopt)) {
      if (!e.is_cookie || !e.lifespan_seconds) continue;
      auto key = KeyOf(e);
      auto it = cookies.find(key);
      if (it == cookies.end() || *it->second.element.lifespan_seconds < *e.lifespan_seconds) {
        cookies[key] = {std::move(e), &s};
      }
    }
  }
  std::vector<Finding> out;
  auto add = [&](const Longest& l, std::string kind, int max_days) {
    const auto& e = l.element;
    Finding f;
    f.kind = std::move(kind);
    f.message = e.name + " on " + e.host + " lives " +
                std::to_string(*e.lifespan_seconds / kSecondsPerDay) + " days; " +
                profile.name + " limit is " + std::to_string(max_days) + " days";
    f.evidence.push_back(MakeEvidence(EvidenceKind::kCookie,
                                      {{"name", e.name},
                                       {"domain", e.host},
                                       {"lifespan_seconds", *e.lifespan_seconds},
                                       {"max_days", max_days},
                                       {"profile", profile.name}},
                                      *l.session, e.t_ms));
    out.push_back(std::move(f));
  };
  for (const auto& [key, l] : cookies) {
    const auto& e = l.element;
    std::int64_t lifespan = *e.lifespan_seconds;
    if (IsConsentStorageName(e.name, ctx.config)) {
      if (profile.consent_storage_max_days &&
          lifespan > std::int64_t{*profile.consent_storage_max_days} * kSecondsPerDay) {
        add(l, "lifespan_consent_storage", *profile.consent_storage_max_days);
      }
      continue;
    }
    if (!profile.analytics_max_days ||
        lifespan <= std::int64_t{*profile.analytics_max_days} * kSecondsPerDay) {
      continue;
    }
    auto c = Classify(e.host, e.name, site.site_url, ctx.manifest, ctx.trackers, ctx.suffixes);
    bool analytics = std::any_of(c.all_classes.begin(), c.all_classes.end(), [](PurposeClass p) {
      return p == PurposeClass::kLocalAnalytics || p == PurposeClass::kNonLocalAnalytics;
    });
    if (analytics) add(l, "lifespan_analytics", *profile.analytics_max_days);
  }
  return out;
}

std::vector<Verdict> RunAll(const SiteCapture& site, const AuditContext& ctx) {
  std::vector<Verdict> out;
  out.reserve(kNumRequirements);
  auto no_action = site.All(ScenarioKind::kNoAction);

  auto over = [&](int requirement, const std::vector<const CapturedSession*>& sessions,
                  std::string_view missing, const auto& check) {
    if (sessions.empty()) {
      return MakeVerdict(requirement, Outcome::kInconclusive,
                         "missing " + std::string(missing) + " capture");
    }
    std::vector<Verdict> parts;
    for (const auto* s : sessions) {
      parts.push_back(Guarded(requirement, [&] { return check(*s); }));
    }
    return Combine(requirement, std::move(parts));
  };

  std::vector<const CapturedSession*> all;
  for (const auto& s : site.sessions) all.push_back(&s);

  std::vector<const CapturedSession*> unaffirmed = site.All(ScenarioKind::kCloseBanner);
  for (auto* s : site.All(ScenarioKind::kScroll)) unaffirmed.push_back(s);

  auto accepts = site.All(ScenarioKind::kAcceptAll);
  auto rejects = site.All(ScenarioKind::kRejectAll);
  std::vector<const CapturedSession*> decided = accepts;
  decided.insert(decided.end(), rejects.begin(), rejects.end());

  std::vector<std::string> cookie_names;
  for (const auto& s : site.sessions) {
    for (const auto& e : StoredElements(s, std::nullopt)) {
      if (e.is_cookie) cookie_names.push_back(e.name);
    }
  }
  std::sort(cookie_names.begin(), cookie_names.end());
  cookie_names.erase(std::unique(cookie_names.begin(), cookie_names.end()), cookie_names.end());
  auto info_source = InfoPageText(site);
  auto info = InfoPageScan(
      info_source.text ? std::optional<std::string_view>(*info_source.text) : std::nullopt,
      ctx.lexicon, cookie_names);
  auto screenshot = ScreenshotEvidence(site);

  auto manual = [&](int requirement, bool with_screenshot) {
    Verdict v = MakeVerdict(requirement, Outcome::kManualPending);
    if (with_screenshot && screenshot) v.evidence.push_back(*screenshot);
    return v;
  };

  for (const auto& req : AllRequirements()) {
    int n = req.number;
    switch (n) {
      case 1:
        out.push_back(over(n, no_action, "no_action", [&](const CapturedSession& s) {
          return CheckPriorStorage(s, site.TwinOf(s), ctx);
        }));
        break;
      case 2:
        out.push_back(over(n, all, "any", [&](const CapturedSession& s) {
          return CheckPriorSending(s, site.TwinOf(s), ctx);
        }));
        break;
      case 6: {
        Verdict v = MakeVerdict(n, Outcome::kManualPending, "keyword evidence only; the operator decides");
        Evidence e;
        e.kind = EvidenceKind::kTextMatch;
        e.payload = {{"category", "information_page"},
                     {"present", info.page_present},
                     {"message", info.page_present ? "information page found"
                                                   : "information page missing"}};
        v.evidence.push_back(std::move(e));
        for (auto& ev : v.evidence) ev.session_ref = info_source.ref;
        out.push_back(std::move(v));
        break;
      }
      case 7:
        out.push_back(InformedVerdict(
            n, info, info_source.ref,
            {"purposes", "recipients", "storage_period", "cookie_names"}));
        break;
      case 8:
        out.push_back(InformedVerdict(n, info, info_source.ref, {"configuration"}));
        break;
      case 9:
        out.push_back(InformedVerdict(n, info, info_source.ref, {"controller"}));
        break;
      case 10:
        out.push_back(InformedVerdict(
            n, info, info_source.ref,
            {"rights.access", "rights.rectification", "rights.erasure", "rights.restriction",
             "rights.objection", "rights.portability", "rights.withdraw_consent",
             "rights.complaint", "rights.automated_decision", "rights.international_transfer"}));
        break;
      case 11:
        out.push_back(over(n, unaffirmed, "close_banner/scroll", [&](const CapturedSession& s) {
          return CheckAffirmativeAction(s, ctx);
        }));
        break;
      case 14:
        out.push_back(over(n, no_action, "no_action", [&](const CapturedSession& s) {
          return CheckPostConsentRegistration(s, ctx);
        }));
        break;
      case 15: {
        Verdict v = over(n, decided, "accept_all/reject_all", [&](const CapturedSession& s) {
          return CheckCorrectRegistration(s, ctx);
        });
        if (!decided.empty() && (accepts.empty() || rejects.empty())) {
          if (v.outcome == Outcome::kCompliant) v.outcome = v.automated_outcome = Outcome::kInconclusive;
          AppendNote(v.confidence_note,
                     accepts.empty() ? "missing accept_all capture" : "missing reject_all capture");
        }
        out.push_back(std::move(v));
        break;
      }
      case 20:
        out.push_back(over(n, no_action, "no_action", [&](const CapturedSession& s) {
          return CheckConsentWall(s, ctx);
        }));
        break;
      case 17:
      case 18:
      case 19:
        out.push_back(MakeVerdict(n, Outcome::kUserStudyPending,
                                  "needs a user study; operator answers are recorded as proxies"));
        break;
      case 22:
        out.push_back(MakeVerdict(n, Outcome::kNotAssessable,
                                  "propagation of a withdrawal to third parties cannot be "
                                  "observed from the browser"));
        break;
      default:
        out.push_back(manual(n, n == 3 || n == 4 || n == 5 || n == 12 || n == 13 || n == 16));
        break;
    }
  }
  return out;
}

}  // namespace consent_audit

#include "consent_audit/session.h"

#include <algorithm>
#include <array>
#include <map>
#include <tuple>

#include <json.hpp>

#include "consent_audit/errors.h"
#include "consent_audit/url.h"

namespace consent_audit {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr std::array<std::pair<ScenarioKind, std::string_view>, 6> kScenarioNames{{
    {ScenarioKind::kNoAction, "no_action"},
    {ScenarioKind::kCloseBanner, "close_banner"},
    {ScenarioKind::kScroll, "scroll"},
    {ScenarioKind::kAcceptAll, "accept_all"},
    {ScenarioKind::kRejectAll, "reject_all"},
    {ScenarioKind::kCustom, "custom"},
}};

std::string Join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

std::string Index(const std::string& path, size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

// Field access with path-tagged schema errors.
class Obj {
 public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw SchemaError(path_.empty() ? "$" : path_, "expected object");
  }

  const json& Required(std::string_view key) const {
    auto it = j_.find(std::string(key));
    if (it == j_.end()) throw SchemaError(Join(path_, key), "missing field");
    return *it;
  }
  const json* Optional(std::string_view key) const {
    auto it = j_.find(std::string(key));
    return it == j_.end() ? nullptr : &*it;
  }

  std::string String(std::string_view key) const {
    const json& v = Required(key);
    if (!v.is_string()) throw SchemaError(Join(path_, key), "expected string");
    return v.get<std::string>();
  }
  std::optional<std::string> OptString(std::string_view key) const {
    const json* v = Optional(key);
    if (!v) return std::nullopt;
    if (!v->is_string()) throw SchemaError(Join(path_, key), "expected string");
    return v->get<std::string>();
  }
  std::int64_t Int(std::string_view key) const {
    const json& v = Required(key);
    if (!v.is_number_integer()) throw SchemaError(Join(path_, key), "expected integer");
    return v.get<std::int64_t>();
  }
  double Number(std::string_view key) const {
    const json& v = Required(key);
    if (!v.is_number()) throw SchemaError(Join(path_, key), "expected number");
    return v.get<double>();
  }
  bool Bool(std::string_view key) const {
    const json& v = Required(key);
    if (!v.is_boolean()) throw SchemaError(Join(path_, key), "expected boolean");
    return v.get<bool>();
  }
  const json& Array(std::string_view key) const {
    const json& v = Required(key);
    if (!v.is_array()) throw SchemaError(Join(path_, key), "expected array");
    return v;
  }
  UtcTime Time(std::string_view key) const {
    auto t = ParseUtc(String(key));
    if (!t) throw SchemaError(Join(path_, key), "expected UTC timestamp YYYY-MM-DDTHH:MM:SSZ");
    return *t;
  }
  std::optional<UtcTime> OptTime(std::string_view key) const {
    auto s = OptString(key);
    if (!s) return std::nullopt;
    auto t = ParseUtc(*s);
    if (!t) throw SchemaError(Join(path_, key), "expected UTC timestamp YYYY-MM-DDTHH:MM:SSZ");
    return t;
  }

  // Rejects keys outside |allowed|.
  void OnlyKeys(std::initializer_list<std::string_view> allowed) const {
    for (const auto& [key, _] : j_.items()) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        throw SchemaError(Join(path_, key), "unknown field");
      }
    }
  }

  const std::string& path() const { return path_; }
  std::string Sub(std::string_view key) const { return Join(path_, key); }

 private:
  const json& j_;
  std::string path_;
};

CookieSource CookieSourceFrom(const std::string& s, const std::string& path) {
  if (s == "header") return CookieSource::kHeader;
  if (s == "script") return CookieSource::kScript;
  if (s == "unknown") return CookieSource::kUnknown;
  throw SchemaError(path, "expected one of header|script|unknown");
}

std::string_view ToString(CookieSource s) {
  switch (s) {
    case CookieSource::kHeader: return "header";
    case CookieSource::kScript: return "script";
    case CookieSource::kUnknown: return "unknown";
  }
  return "unknown";
}

CookieRecord ParseCookie(const json& j, const std::string& path) {
  Obj o(j, path);
  o.OnlyKeys({"name", "value", "domain", "path", "expiry", "set_time", "source"});
  CookieRecord c;
  c.name = o.String("name");
  c.value = o.String("value");
  c.domain = o.String("domain");
  c.path = o.String("path");
  c.expiry = o.OptTime("expiry");
  c.set_time = o.Time("set_time");
  c.source = CookieSourceFrom(o.String("source"), o.Sub("source"));
  return c;
}

std::vector<CookieRecord> ParseCookies(const Obj& o, std::string_view key) {
  std::vector<CookieRecord> out;
  const json& arr = o.Array(key);
  for (size_t i = 0; i < arr.size(); ++i) {
    out.push_back(ParseCookie(arr[i], Index(o.Sub(key), i)));
  }
  return out;
}

NameValueList ParsePairs(const Obj& o, std::string_view key) {
  NameValueList out;
  const json& arr = o.Array(key);
  for (size_t i = 0; i < arr.size(); ++i) {
    const json& p = arr[i];
    if (!p.is_array() || p.size() != 2 || !p[0].is_string() || !p[1].is_string()) {
      throw SchemaError(Index(o.Sub(key), i), "expected [name, value] string pair");
    }
    out.emplace_back(p[0].get<std::string>(), p[1].get<std::string>());
  }
  return out;
}

ScenarioKind ParseScenario(const Obj& o, std::string_view key) {
  auto kind = ScenarioFromString(o.String(key));
  if (!kind) throw SchemaError(o.Sub(key), "unknown scenario");
  return *kind;
}

SessionEvent ParseEvent(const json& j, const std::string& path) {
  Obj o(j, path);
  SessionEvent ev;
  ev.timestamp_ms = o.Int("t");
  const std::string kind = o.String("kind");
  if (kind == "request") {
    o.OnlyKeys({"t", "kind", "id", "url", "method", "headers", "cookies_sent", "query_params"});
    RequestEvent r;
    r.id = o.String("id");
    r.url = o.String("url");
    r.method = o.String("method");
    r.headers = ParsePairs(o, "headers");
    r.cookies_sent = ParseCookies(o, "cookies_sent");
    r.query_params = ParsePairs(o, "query_params");
    ev.payload = std::move(r);
  } else if (kind == "response") {
    o.OnlyKeys({"t", "kind", "request_id", "status", "set_cookies"});
    ResponseEvent r;
    r.request_id = o.String("request_id");
    r.status = static_cast<int>(o.Int("status"));
    r.set_cookies = ParseCookies(o, "set_cookies");
    ev.payload = std::move(r);
  } else if (kind == "storage_snapshot") {
    o.OnlyKeys({"t", "kind", "cookies", "local_storage"});
    StorageSnapshotEvent s;
    s.cookies = ParseCookies(o, "cookies");
    const json& ls = o.Array("local_storage");
    for (size_t i = 0; i < ls.size(); ++i) {
      Obj e(ls[i], Index(o.Sub("local_storage"), i));
      e.OnlyKeys({"origin", "key", "value"});
      s.local_storage.push_back({e.String("origin"), e.String("key"), e.String("value")});
    }
    ev.payload = std::move(s);
  } else if (kind == "user_action") {
    o.OnlyKeys({"t", "kind", "action"});
    ev.payload = UserActionEvent{ParseScenario(o, "action")};
  } else if (kind == "dom_snapshot") {
    o.OnlyKeys({"t", "kind", "banner_candidates", "page_interactive", "info_page_text",
                "screenshot_ref"});
    DomSnapshotEvent d;
    const json& arr = o.Array("banner_candidates");
    for (size_t i = 0; i < arr.size(); ++i) {
      Obj b(arr[i], Index(o.Sub("banner_candidates"), i));
      b.OnlyKeys({"selector", "bounding_box", "is_overlay_blocking", "text"});
      BannerRegion region;
      region.selector = b.String("selector");
      Obj box(b.Required("bounding_box"), b.Sub("bounding_box"));
      box.OnlyKeys({"x", "y", "w", "h"});
      region.bounding_box = {box.Number("x"), box.Number("y"), box.Number("w"),
                             box.Number("h")};
      if (region.bounding_box.w < 0 || region.bounding_box.h < 0) {
        throw SchemaError(b.Sub("bounding_box"), "negative width or height");
      }
      region.is_overlay_blocking = b.Bool("is_overlay_blocking");
      region.text = b.String("text");
      d.banner_candidates.push_back(std::move(region));
    }
    d.page_interactive = o.Bool("page_interactive");
    d.info_page_text = o.OptString("info_page_text");
    d.screenshot_ref = o.OptString("screenshot_ref");
    ev.payload = std::move(d);
  } else {
    throw SchemaError(o.Sub("kind"), "unknown event kind '" + kind + "'");
  }
  return ev;
}

ordered_json CookieJson(const CookieRecord& c) {
  ordered_json j;
  j["name"] = c.name;
  j["value"] = c.value;
  j["domain"] = c.domain;
  j["path"] = c.path;
  if (c.expiry) j["expiry"] = FormatUtc(*c.expiry);
  j["set_time"] = FormatUtc(c.set_time);
  j["source"] = ToString(c.source);
  return j;
}

ordered_json CookiesJson(const std::vector<CookieRecord>& cookies) {
  ordered_json arr = ordered_json::array();
  for (const auto& c : cookies) arr.push_back(CookieJson(c));
  return arr;
}

ordered_json PairsJson(const NameValueList& pairs) {
  ordered_json arr = ordered_json::array();
  for (const auto& [n, v] : pairs) arr.push_back({n, v});
  return arr;
}

struct EventJson {
  ordered_json& j;
  void operator()(const RequestEvent& r) const {
    j["kind"] = "request";
    j["id"] = r.id;
    j["url"] = r.url;
    j["method"] = r.method;
    j["headers"] = PairsJson(r.headers);
    j["cookies_sent"] = CookiesJson(r.cookies_sent);
    j["query_params"] = PairsJson(r.query_params);
  }
  void operator()(const ResponseEvent& r) const {
    j["kind"] = "response";
    j["request_id"] = r.request_id;
    j["status"] = r.status;
    j["set_cookies"] = CookiesJson(r.set_cookies);
  }
  void operator()(const StorageSnapshotEvent& s) const {
    j["kind"] = "storage_snapshot";
    j["cookies"] = CookiesJson(s.cookies);
    ordered_json ls = ordered_json::array();
    for (const auto& e : s.local_storage) {
      ls.push_back({{"origin", e.origin}, {"key", e.key}, {"value", e.value}});
    }
    j["local_storage"] = std::move(ls);
  }
  void operator()(const UserActionEvent& a) const {
    j["kind"] = "user_action";
    j["action"] = ToString(a.action);
  }
  void operator()(const DomSnapshotEvent& d) const {
    j["kind"] = "dom_snapshot";
    ordered_json arr = ordered_json::array();
    for (const auto& b : d.banner_candidates) {
      ordered_json bj;
      bj["selector"] = b.selector;
      bj["bounding_box"] = {{"x", b.bounding_box.x},
                            {"y", b.bounding_box.y},
                            {"w", b.bounding_box.w},
                            {"h", b.bounding_box.h}};
      bj["is_overlay_blocking"] = b.is_overlay_blocking;
      bj["text"] = b.text;
      arr.push_back(std::move(bj));
    }
    j["banner_candidates"] = std::move(arr);
    j["page_interactive"] = d.page_interactive;
    if (d.info_page_text) j["info_page_text"] = *d.info_page_text;
    if (d.screenshot_ref) j["screenshot_ref"] = *d.screenshot_ref;
  }
};

void CheckCookieHosts(const std::vector<CookieRecord>& cookies, const std::string& path) {
  for (size_t i = 0; i < cookies.size(); ++i) {
    if (!IsValidHostName(cookies[i].domain)) {
      throw InvariantError(Index(path, i) + ".domain",
                           "not a parseable host name: '" + cookies[i].domain + "'");
    }
    if (cookies[i].expiry && *cookies[i].expiry < cookies[i].set_time) {
      throw InvariantError(Index(path, i) + ".expiry", "expiry precedes set_time");
    }
  }
}

using CookieKey = std::tuple<std::string, std::string, std::string>;

CookieKey KeyOf(const CookieRecord& c) {
  return {NormalizeHost(c.domain), c.path, c.name};
}

}  // namespace

std::string_view ToString(ScenarioKind kind) {
  for (const auto& [k, name] : kScenarioNames) {
    if (k == kind) return name;
  }
  return "custom";
}

std::optional<ScenarioKind> ScenarioFromString(std::string_view text) {
  for (const auto& [k, name] : kScenarioNames) {
    if (name == text) return k;
  }
  return std::nullopt;
}

std::optional<std::int64_t> CookieRecord::LifespanSeconds() const {
  if (!expiry) return std::nullopt;
  return (*expiry - set_time).count();
}

double BannerRegion::AreaRatio(const Viewport& viewport) const {
  const double screen = static_cast<double>(viewport.width_px) * viewport.height_px;
  if (screen <= 0) return 0.0;
  return bounding_box.w * bounding_box.h / screen;
}

void ValidateSession(const CapturedSession& s) {
  if (!HostOfUrl(s.site_url)) {
    throw InvariantError("site_url", "no parseable host in '" + s.site_url + "'");
  }
  if (s.viewport.width_px <= 0) throw InvariantError("viewport.width_px", "must be positive");
  if (s.viewport.height_px <= 0) throw InvariantError("viewport.height_px", "must be positive");

  std::set<std::string> request_ids;
  int actions = 0;
  bool snapshot_seen = false;
  std::int64_t last_t = 0;
  for (size_t i = 0; i < s.events.size(); ++i) {
    const SessionEvent& ev = s.events[i];
    const std::string path = Index("events", i);
    if (ev.timestamp_ms < 0) throw InvariantError(path + ".t", "negative timestamp");
    if (i > 0 && ev.timestamp_ms < last_t) {
      throw InvariantError(path + ".t", "events are not sorted by timestamp");
    }
    last_t = ev.timestamp_ms;

    if (const auto* r = ev.As<RequestEvent>()) {
      if (!HostOfUrl(r->url)) {
        throw InvariantError(path + ".url", "no parseable host in '" + r->url + "'");
      }
      if (!request_ids.insert(r->id).second) {
        throw InvariantError(path + ".id", "duplicate request id '" + r->id + "'");
      }
      CheckCookieHosts(r->cookies_sent, path + ".cookies_sent");
    } else if (const auto* r = ev.As<ResponseEvent>()) {
      if (!request_ids.count(r->request_id)) {
        throw InvariantError(path + ".request_id",
                             "response references no earlier request '" + r->request_id + "'");
      }
      CheckCookieHosts(r->set_cookies, path + ".set_cookies");
    } else if (const auto* snap = ev.As<StorageSnapshotEvent>()) {
      snapshot_seen = true;
      CheckCookieHosts(snap->cookies, path + ".cookies");
      for (size_t k = 0; k < snap->local_storage.size(); ++k) {
        if (!IsValidHostName(snap->local_storage[k].origin)) {
          throw InvariantError(Index(path + ".local_storage", k) + ".origin",
                               "not a parseable host name");
        }
      }
    } else if (const auto* a = ev.As<UserActionEvent>()) {
      ++actions;
      if (!snapshot_seen) {
        throw InvariantError(path, "user action precedes the initial storage snapshot");
      }
      if (a->action != s.scenario) {
        throw InvariantError(path + ".action", "action does not match the session scenario");
      }
    }
  }
  if (!snapshot_seen) throw InvariantError("events", "no initial storage snapshot");
  if (s.scenario == ScenarioKind::kNoAction && actions != 0) {
    throw InvariantError("events", "no_action session contains a user action");
  }
  if (s.scenario != ScenarioKind::kNoAction && actions != 1) {
    throw InvariantError("events", "expected exactly one user action, found " +
                                       std::to_string(actions));
  }
}

CapturedSession ParseSession(std::string_view bytes, const ParseOptions& options) {
  json root;
  try {
    root = json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error& e) {
    throw SchemaError("$", std::string("invalid JSON: ") + e.what());
  }
  Obj o(root, "");
  o.OnlyKeys({"format_version", "site_url", "scenario", "viewport", "profile_id",
              "captured_at", "events", "incomplete"});
  if (o.Int("format_version") != kSessionFormatVersion) {
    throw SchemaError("format_version", "unsupported version");
  }
  CapturedSession s;
  s.site_url = o.String("site_url");
  s.scenario = ParseScenario(o, "scenario");
  Obj vp(o.Required("viewport"), "viewport");
  vp.OnlyKeys({"width_px", "height_px"});
  s.viewport = {static_cast<int>(vp.Int("width_px")), static_cast<int>(vp.Int("height_px"))};
  s.profile_id = o.String("profile_id");
  s.captured_at = o.Time("captured_at");
  if (o.Optional("incomplete")) s.incomplete = o.Bool("incomplete");
  const json& events = o.Array("events");
  for (size_t i = 0; i < events.size(); ++i) {
    s.events.push_back(ParseEvent(events[i], Index("events", i)));
  }
  if (s.incomplete && options.reject_incomplete) {
    throw InvariantError("incomplete", "capture was flagged incomplete");
  }
  ValidateSession(s);
  return s;
}

std::string SerializeSession(const CapturedSession& s) {
  ordered_json root;
  root["format_version"] = kSessionFormatVersion;
  root["site_url"] = s.site_url;
  root["scenario"] = ToString(s.scenario);
  root["viewport"] = {{"width_px", s.viewport.width_px}, {"height_px", s.viewport.height_px}};
  root["profile_id"] = s.profile_id;
  root["captured_at"] = FormatUtc(s.captured_at);
  if (s.incomplete) root["incomplete"] = true;
  ordered_json events = ordered_json::array();
  for (const auto& ev : s.events) {
    ordered_json j;
    j["t"] = ev.timestamp_ms;
    std::visit(EventJson{j}, ev.payload);
    events.push_back(std::move(j));
  }
  root["events"] = std::move(events);
  return root.dump(2) + "\n";
}

UtcTime AbsoluteTime(const CapturedSession& session, std::int64_t t_ms) {
  return session.captured_at + std::chrono::seconds(t_ms / 1000);
}

std::vector<CookieRecord> CookiesAt(const CapturedSession& session, std::int64_t t_ms) {
  std::map<CookieKey, CookieRecord> jar;
  for (const auto& ev : session.events) {
    if (ev.timestamp_ms > t_ms) break;
    if (const auto* snap = ev.As<StorageSnapshotEvent>()) {
      jar.clear();
      for (const auto& c : snap->cookies) jar[KeyOf(c)] = c;
    } else if (const auto* resp = ev.As<ResponseEvent>()) {
      for (const auto& c : resp->set_cookies) jar[KeyOf(c)] = c;
    }
  }
  const auto now = std::chrono::time_point_cast<std::chrono::milliseconds>(session.captured_at) +
                   std::chrono::milliseconds(t_ms);
  std::vector<CookieRecord> out;
  for (auto& [key, c] : jar) {
    if (c.expiry && *c.expiry <= now) continue;
    out.push_back(std::move(c));
  }
  std::sort(out.begin(), out.end(), [](const CookieRecord& a, const CookieRecord& b) {
    return std::tie(a.domain, a.name, a.path) < std::tie(b.domain, b.name, b.path);
  });
  return out;
}

std::vector<StorageEntry> LocalStorageAt(const CapturedSession& session, std::int64_t t_ms) {
  std::vector<StorageEntry> out;
  for (const auto& ev : session.events) {
    if (ev.timestamp_ms > t_ms) break;
    if (const auto* snap = ev.As<StorageSnapshotEvent>()) out = snap->local_storage;
  }
  return out;
}

std::optional<std::int64_t> FirstActionTime(const CapturedSession& session) {
  for (const auto& ev : session.events) {
    if (ev.As<UserActionEvent>()) return ev.timestamp_ms;
  }
  return std::nullopt;
}

std::int64_t EndTime(const CapturedSession& session) {
  return session.events.empty() ? 0 : session.events.back().timestamp_ms;
}

const StorageSnapshotEvent* InitialSnapshot(const CapturedSession& session) {
  for (const auto& ev : session.events) {
    if (const auto* snap = ev.As<StorageSnapshotEvent>()) return snap;
  }
  return nullptr;
}

}  // namespace consent_audit

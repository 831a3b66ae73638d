#ifndef CONSENT_AUDIT_SESSION_H_
#define CONSENT_AUDIT_SESSION_H_

// Captured browsing session: the only input the checkers consume.
//
// A session is one scripted visit of one site under one scenario. Event
// timestamps are milliseconds relative to the start of the visit;
// |captured_at| anchors t = 0 in absolute UTC time so cookie expiry can be
// compared against event times.

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "consent_audit/time_util.h"

namespace consent_audit {

inline constexpr int kSessionFormatVersion = 1;

enum class ScenarioKind {
  kNoAction,
  kCloseBanner,
  kScroll,
  kAcceptAll,
  kRejectAll,
  kCustom,
};

std::string_view ToString(ScenarioKind kind);
std::optional<ScenarioKind> ScenarioFromString(std::string_view text);

struct Viewport {
  int width_px = 0;
  int height_px = 0;
  bool operator==(const Viewport&) const = default;
};

enum class CookieSource { kHeader, kScript, kUnknown };

struct CookieRecord {
  std::string name;
  std::string value;
  std::string domain;
  std::string path = "/";
  std::optional<UtcTime> expiry;  // absent: session cookie
  UtcTime set_time{};
  CookieSource source = CookieSource::kUnknown;

  std::optional<std::int64_t> LifespanSeconds() const;
  bool operator==(const CookieRecord&) const = default;
};

// One localStorage (or equivalent key/value storage) item.
struct StorageEntry {
  std::string origin;  // host owning the storage area
  std::string key;
  std::string value;
  bool operator==(const StorageEntry&) const = default;
};

struct BoundingBox {
  double x = 0, y = 0, w = 0, h = 0;
  bool operator==(const BoundingBox&) const = default;
};

struct BannerRegion {
  std::string selector;
  BoundingBox bounding_box;
  bool is_overlay_blocking = false;
  std::string text;

  // (w * h) / (viewport width * viewport height). May exceed 1.
  double AreaRatio(const Viewport& viewport) const;
  bool operator==(const BannerRegion&) const = default;
};

using NameValueList = std::vector<std::pair<std::string, std::string>>;

struct RequestEvent {
  std::string id;
  std::string url;
  std::string method = "GET";
  NameValueList headers;
  std::vector<CookieRecord> cookies_sent;
  NameValueList query_params;
  bool operator==(const RequestEvent&) const = default;
};

struct ResponseEvent {
  std::string request_id;
  int status = 200;
  std::vector<CookieRecord> set_cookies;
  bool operator==(const ResponseEvent&) const = default;
};

struct StorageSnapshotEvent {
  std::vector<CookieRecord> cookies;
  std::vector<StorageEntry> local_storage;
  bool operator==(const StorageSnapshotEvent&) const = default;
};

struct UserActionEvent {
  ScenarioKind action = ScenarioKind::kCustom;
  bool operator==(const UserActionEvent&) const = default;
};

struct DomSnapshotEvent {
  std::vector<BannerRegion> banner_candidates;
  bool page_interactive = true;
  std::optional<std::string> info_page_text;
  std::optional<std::string> screenshot_ref;
  bool operator==(const DomSnapshotEvent&) const = default;
};

using EventPayload = std::variant<RequestEvent, ResponseEvent,
                                  StorageSnapshotEvent, UserActionEvent,
                                  DomSnapshotEvent>;

struct SessionEvent {
  std::int64_t timestamp_ms = 0;
  EventPayload payload;

  template <typename T>
  const T* As() const { return std::get_if<T>(&payload); }
  bool operator==(const SessionEvent&) const = default;
};

struct CapturedSession {
  std::string site_url;
  ScenarioKind scenario = ScenarioKind::kNoAction;
  Viewport viewport;
  std::string profile_id;
  UtcTime captured_at{};
  std::vector<SessionEvent> events;
  // Capture driver gave up before the visit finished.
  bool incomplete = false;

  // Where the session was loaded from; used in evidence references. Not part
  // of the file format.
  std::string source_name;

  bool operator==(const CapturedSession& other) const {
    return site_url == other.site_url && scenario == other.scenario &&
           viewport == other.viewport && profile_id == other.profile_id &&
           captured_at == other.captured_at && events == other.events &&
           incomplete == other.incomplete;
  }
};

struct ParseOptions {
  // Reject sessions flagged incomplete by the capture driver.
  bool reject_incomplete = true;
};

// Parses and validates the JSON session format. Throws SchemaError for
// structural problems and InvariantError for semantic ones; both name the
// offending path.
CapturedSession ParseSession(std::string_view bytes,
                             const ParseOptions& options = {});

// Canonical JSON serialization (2-space indented, trailing newline).
std::string SerializeSession(const CapturedSession& session);

// Re-checks every session invariant. Throws InvariantError.
void ValidateSession(const CapturedSession& session);

// Cookie jar state at time |t_ms|: the latest storage snapshot at or before
// |t_ms| with later Set-Cookie records applied on top (identity is
// (domain, path, name)), minus anything expired at |t_ms|. Sorted by
// (domain, name, path).
std::vector<CookieRecord> CookiesAt(const CapturedSession& session,
                                    std::int64_t t_ms);

// Local storage from the latest snapshot at or before |t_ms|.
std::vector<StorageEntry> LocalStorageAt(const CapturedSession& session,
                                         std::int64_t t_ms);

std::optional<std::int64_t> FirstActionTime(const CapturedSession& session);

// Timestamp of the last event, or 0 for an event-less session.
std::int64_t EndTime(const CapturedSession& session);

// The first storage snapshot (the empty-profile precondition lives here).
const StorageSnapshotEvent* InitialSnapshot(const CapturedSession& session);

// Absolute time of a relative event timestamp.
UtcTime AbsoluteTime(const CapturedSession& session, std::int64_t t_ms);

}  // namespace consent_audit

#endif  // CONSENT_AUDIT_SESSION_H_

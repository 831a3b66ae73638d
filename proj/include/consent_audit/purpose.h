#ifndef CONSENT_AUDIT_PURPOSE_H_
#define CONSENT_AUDIT_PURPOSE_H_

// Purpose classes of browser-based tracking technologies, and whether each
// needs consent. Also owns the first/third-party relation, which is derived
// here rather than stored in captures.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "consent_audit/errors.h"
#include "consent_audit/session.h"

namespace consent_audit {

enum class PurposeClass {
  kLoadBalancing,
  kSessionUserInput,
  kSessionAuthentication,
  kUserSecurityRequested,
  kSocialPluginRequested,
  kShortTermCustomization,
  kSessionMultimedia,
  kLocalAnalytics,
  kNonLocalAnalytics,
  kAdvertising,
  kPersistentAuthentication,
  kLongTermCustomization,
  kUserSecurityNotRequested,
  kSocialPluginNotRequested,
  kUnknown,
};

inline constexpr int kNumPurposeClasses = 15;

// Ordered so that max() over a multipurpose element yields the strictest
// requirement: kNo < kConditional < kUnknown < kYes.
enum class ConsentRequirement { kNo, kConditional, kUnknown, kYes };

std::string_view ToString(PurposeClass p);       // "Advertising"
std::string_view ToToken(PurposeClass p);        // "advertising"
std::optional<PurposeClass> PurposeFromString(std::string_view name);  // either form
std::string_view ToString(ConsentRequirement r);

const std::vector<PurposeClass>& AllPurposeClasses();

ConsentRequirement ConsentRequired(PurposeClass p);

enum class Party { kFirstParty, kThirdParty };

std::string_view ToString(Party p);

struct PartyRelation {
  Party party = Party::kFirstParty;
  std::string site_registrable_domain;
  std::string element_registrable_domain;
};

class SuffixError : public Error {
 public:
  using Error::Error;
};

// Public suffix rules in the standard one-rule-per-line format: '//'
// comments, '*' wildcard labels, '!' exceptions. The implicit "*" default
// rule applies when nothing matches.
class PublicSuffixList {
 public:
  static PublicSuffixList Parse(std::string_view text);

  // eTLD+1 of |host|. A host that is itself a public suffix is returned
  // unchanged. Throws SuffixError for empty or malformed hosts.
  std::string RegistrableDomain(std::string_view host) const;

  std::size_t size() const { return rules_.size() + exceptions_.size(); }

 private:
  std::set<std::string, std::less<>> rules_;       // "co.uk", "*.ck"
  std::set<std::string, std::less<>> exceptions_;  // "www.ck" for "!www.ck"
};

PartyRelation RelationOf(std::string_view site_url_or_host, std::string_view element_host,
                         const PublicSuffixList& suffixes);

// Machine-readable cookie purpose declarations.
struct ManifestEntry {
  std::string domain_pattern;  // literal, or prefix with one trailing '*'
  std::string name_pattern;    // literal, or prefix with one trailing '*'
  std::vector<PurposeClass> purpose_classes;
  std::string declared_by;
  std::string description;
};

class CookieManifest {
 public:
  // Parses the JSON manifest format. Throws SchemaError / InvariantError.
  static CookieManifest Parse(std::string_view json_text);

  // Most specific entry matching (host, name): literal name beats wildcard,
  // then the longer domain pattern wins.
  const ManifestEntry* Match(std::string_view host, std::string_view name) const;

  const std::vector<ManifestEntry>& entries() const { return entries_; }

 private:
  std::vector<ManifestEntry> entries_;
};

// Known-tracker list: registrable domain -> purpose class.
class TrackerList {
 public:
  // "<registrable-domain> <class-token>" per line, '#' comments. Throws
  // ParseError with the line number.
  static TrackerList Parse(std::string_view text);

  std::optional<PurposeClass> Lookup(std::string_view registrable_domain) const;
  std::size_t size() const { return domains_.size(); }

 private:
  std::map<std::string, PurposeClass, std::less<>> domains_;
};

enum class ClassificationSource { kManifest, kTrackerList, kFallback };

std::string_view ToString(ClassificationSource s);

struct Classification {
  PurposeClass purpose = PurposeClass::kUnknown;  // strictest class
  std::vector<PurposeClass> all_classes;
  ConsentRequirement consent_required = ConsentRequirement::kUnknown;
  PartyRelation relation;
  ClassificationSource source = ClassificationSource::kFallback;
};

// Manifest match wins over tracker-list match wins over Unknown. Local
// analytics on a third-party relation is treated as non-local analytics.
Classification Classify(std::string_view element_host, std::string_view element_name,
                        std::string_view site_url, const CookieManifest& manifest,
                        const TrackerList& trackers, const PublicSuffixList& suffixes);

inline Classification Classify(const CookieRecord& cookie, std::string_view site_url,
                               const CookieManifest& manifest, const TrackerList& trackers,
                               const PublicSuffixList& suffixes) {
  return Classify(cookie.domain, cookie.name, site_url, manifest, trackers, suffixes);
}

// Re-derives the requirement as if the element were handled by a third
// party (used when a value is shipped to another domain).
Classification AsThirdParty(Classification c);

}  // namespace consent_audit

#endif  // CONSENT_AUDIT_PURPOSE_H_

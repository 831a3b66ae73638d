#include "consent_audit/purpose.h"

#include <algorithm>
#include <array>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "consent_audit/url.h"

namespace consent_audit {
namespace {

struct PurposeInfo {
  PurposeClass purpose;
  std::string_view name;
  std::string_view token;
  ConsentRequirement consent;
};

constexpr std::array<PurposeInfo, kNumPurposeClasses> kPurposes{{
    {PurposeClass::kLoadBalancing, "LoadBalancing", "load_balancing", ConsentRequirement::kNo},
    {PurposeClass::kSessionUserInput, "SessionUserInput", "session_user_input",
     ConsentRequirement::kNo},
    {PurposeClass::kSessionAuthentication, "SessionAuthentication", "session_authentication",
     ConsentRequirement::kNo},
    {PurposeClass::kUserSecurityRequested, "UserSecurityRequested", "user_security_requested",
     ConsentRequirement::kNo},
    {PurposeClass::kSocialPluginRequested, "SocialPluginRequested", "social_plugin_requested",
     ConsentRequirement::kNo},
    {PurposeClass::kShortTermCustomization, "ShortTermCustomization",
     "short_term_customization", ConsentRequirement::kNo},
    {PurposeClass::kSessionMultimedia, "SessionMultimedia", "session_multimedia",
     ConsentRequirement::kNo},
    {PurposeClass::kLocalAnalytics, "LocalAnalytics", "local_analytics",
     ConsentRequirement::kConditional},
    {PurposeClass::kNonLocalAnalytics, "NonLocalAnalytics", "non_local_analytics",
     ConsentRequirement::kYes},
    {PurposeClass::kAdvertising, "Advertising", "advertising", ConsentRequirement::kYes},
    {PurposeClass::kPersistentAuthentication, "PersistentAuthentication",
     "persistent_authentication", ConsentRequirement::kYes},
    {PurposeClass::kLongTermCustomization, "LongTermCustomization", "long_term_customization",
     ConsentRequirement::kYes},
    {PurposeClass::kUserSecurityNotRequested, "UserSecurityNotRequested",
     "user_security_not_requested", ConsentRequirement::kYes},
    {PurposeClass::kSocialPluginNotRequested, "SocialPluginNotRequested",
     "social_plugin_not_requested", ConsentRequirement::kYes},
    {PurposeClass::kUnknown, "Unknown", "unknown", ConsentRequirement::kUnknown},
}};

const PurposeInfo& Info(PurposeClass p) {
  return kPurposes[static_cast<std::size_t>(p)];
}

std::vector<std::string_view> SplitLabels(std::string_view host) {
  std::vector<std::string_view> labels;
  std::size_t start = 0;
  while (start <= host.size()) {
    const std::size_t dot = host.find('.', start);
    labels.push_back(host.substr(start, dot == std::string_view::npos ? dot : dot - start));
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  return labels;
}

std::string JoinLabels(const std::vector<std::string_view>& labels, std::size_t from) {
  std::string out;
  for (std::size_t i = from; i < labels.size(); ++i) {
    if (!out.empty()) out.push_back('.');
    out += labels[i];
  }
  return out;
}

bool IsIpv4(std::string_view host) {
  const auto labels = SplitLabels(host);
  return labels.size() == 4 && std::all_of(labels.begin(), labels.end(), [](std::string_view l) {
           return !l.empty() && l.size() <= 3 &&
                  std::all_of(l.begin(), l.end(), [](char c) { return c >= '0' && c <= '9'; });
         });
}

// Literal match, or prefix match when |pattern| ends with a single '*'.
bool PatternMatches(std::string_view pattern, std::string_view text) {
  if (!pattern.empty() && pattern.back() == '*') {
    return text.substr(0, pattern.size() - 1) == pattern.substr(0, pattern.size() - 1);
  }
  return pattern == text;
}

bool DomainPatternMatches(std::string_view pattern, std::string_view host) {
  if (!pattern.empty() && pattern.back() == '*') return PatternMatches(pattern, host);
  if (host == pattern) return true;
  return host.size() > pattern.size() && host.ends_with(pattern) &&
         host[host.size() - pattern.size() - 1] == '.';
}

bool IsValidPattern(std::string_view pattern) {
  if (pattern.empty()) return false;
  const auto star = pattern.find('*');
  return star == std::string_view::npos || star == pattern.size() - 1;
}

std::string Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::string_view ToString(PurposeClass p) { return Info(p).name; }
std::string_view ToToken(PurposeClass p) { return Info(p).token; }

std::optional<PurposeClass> PurposeFromString(std::string_view name) {
  for (const auto& info : kPurposes) {
    if (info.name == name || info.token == name) return info.purpose;
  }
  return std::nullopt;
}

std::string_view ToString(ConsentRequirement r) {
  switch (r) {
    case ConsentRequirement::kNo: return "no";
    case ConsentRequirement::kConditional: return "conditional";
    case ConsentRequirement::kUnknown: return "unknown";
    case ConsentRequirement::kYes: return "yes";
  }
  return "unknown";
}

const std::vector<PurposeClass>& AllPurposeClasses() {
  static const std::vector<PurposeClass> all = [] {
    std::vector<PurposeClass> v;
    for (const auto& info : kPurposes) v.push_back(info.purpose);
    return v;
  }();
  return all;
}

ConsentRequirement ConsentRequired(PurposeClass p) { return Info(p).consent; }

std::string_view ToString(Party p) {
  return p == Party::kFirstParty ? "first_party" : "third_party";
}

std::string_view ToString(ClassificationSource s) {
  switch (s) {
    case ClassificationSource::kManifest: return "manifest";
    case ClassificationSource::kTrackerList: return "tracker_list";
    case ClassificationSource::kFallback: return "fallback";
  }
  return "fallback";
}

PublicSuffixList PublicSuffixList::Parse(std::string_view text) {
  PublicSuffixList list;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    // Only the first whitespace-delimited token of a line is the rule.
    std::string rule = Trim(line);
    if (rule.empty() || rule.starts_with("//")) continue;
    if (const auto ws = rule.find_first_of(" \t"); ws != std::string::npos) rule.resize(ws);
    rule = NormalizeHost(rule);
    if (rule.starts_with("!")) {
      list.exceptions_.insert(rule.substr(1));
    } else {
      list.rules_.insert(rule);
    }
  }
  return list;
}

std::string PublicSuffixList::RegistrableDomain(std::string_view raw_host) const {
  const std::string host = NormalizeHost(raw_host);
  if (host.empty()) throw SuffixError("empty host");
  if (!IsValidHostName(host)) throw SuffixError("malformed host '" + host + "'");
  if (IsIpv4(host)) return host;

  const auto labels = SplitLabels(host);
  const std::size_t n = labels.size();
  std::size_t suffix_labels = 0;
  for (std::size_t i = 0; i < n && suffix_labels == 0; ++i) {
    if (exceptions_.count(JoinLabels(labels, i))) suffix_labels = n - i - 1;
  }
  if (suffix_labels == 0) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::string exact = JoinLabels(labels, i);
      const bool wildcard = i + 1 < n && rules_.count("*." + JoinLabels(labels, i + 1));
      if (rules_.count(exact) || wildcard) {
        suffix_labels = n - i;
        break;
      }
    }
  }
  if (suffix_labels == 0) suffix_labels = 1;  // implicit "*" rule
  if (suffix_labels >= n) return host;
  return JoinLabels(labels, n - suffix_labels - 1);
}

PartyRelation RelationOf(std::string_view site_url_or_host, std::string_view element_host,
                         const PublicSuffixList& suffixes) {
  std::string site_host;
  if (site_url_or_host.find("://") != std::string_view::npos) {
    auto h = HostOfUrl(site_url_or_host);
    if (!h) throw SuffixError("site URL has no host: " + std::string(site_url_or_host));
    site_host = *h;
  } else {
    site_host = NormalizeHost(site_url_or_host);
  }
  PartyRelation rel;
  rel.site_registrable_domain = suffixes.RegistrableDomain(site_host);
  rel.element_registrable_domain = suffixes.RegistrableDomain(element_host);
  rel.party = rel.site_registrable_domain == rel.element_registrable_domain
                  ? Party::kFirstParty
                  : Party::kThirdParty;
  return rel;
}

CookieManifest CookieManifest::Parse(std::string_view json_text) {
  using nlohmann::json;
  json root;
  try {
    root = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    throw SchemaError("$", std::string("invalid JSON: ") + e.what());
  }
  if (!root.is_object()) throw SchemaError("$", "expected object");
  if (!root.contains("manifest_version") || root["manifest_version"] != 1) {
    throw SchemaError("manifest_version", "expected 1");
  }
  if (!root.contains("entries") || !root["entries"].is_array()) {
    throw SchemaError("entries", "expected array");
  }
  CookieManifest manifest;
  const json& entries = root["entries"];
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const std::string path = "entries[" + std::to_string(i) + "]";
    const json& e = entries[i];
    if (!e.is_object()) throw SchemaError(path, "expected object");
    auto str = [&](const char* key) {
      if (!e.contains(key) || !e[key].is_string()) {
        throw SchemaError(path + "." + key, "expected string");
      }
      return e[key].get<std::string>();
    };
    ManifestEntry entry;
    entry.domain_pattern = NormalizeHost(str("domain"));
    entry.name_pattern = str("name");
    entry.declared_by = str("declared_by");
    entry.description = e.contains("description") ? str("description") : std::string();
    if (!IsValidPattern(entry.domain_pattern)) {
      throw InvariantError(path + ".domain", "pattern must be literal or end in a single '*'");
    }
    if (!IsValidPattern(entry.name_pattern)) {
      throw InvariantError(path + ".name", "pattern must be literal or end in a single '*'");
    }
    if (!e.contains("purposes") || !e["purposes"].is_array() || e["purposes"].empty()) {
      throw SchemaError(path + ".purposes", "expected non-empty array");
    }
    for (std::size_t k = 0; k < e["purposes"].size(); ++k) {
      const json& p = e["purposes"][k];
      auto purpose = p.is_string() ? PurposeFromString(p.get<std::string>()) : std::nullopt;
      if (!purpose) {
        throw SchemaError(path + ".purposes[" + std::to_string(k) + "]", "unknown purpose class");
      }
      entry.purpose_classes.push_back(*purpose);
    }
    for (const auto& existing : manifest.entries_) {
      if (existing.domain_pattern == entry.domain_pattern &&
          existing.name_pattern == entry.name_pattern) {
        throw InvariantError(path, "duplicate (domain, name) key");
      }
    }
    manifest.entries_.push_back(std::move(entry));
  }
  return manifest;
}

const ManifestEntry* CookieManifest::Match(std::string_view raw_host, std::string_view name) const {
  const std::string host = NormalizeHost(raw_host);
  const ManifestEntry* best = nullptr;
  auto rank = [](const ManifestEntry& e) {
    const bool literal_name = e.name_pattern.back() != '*';
    return std::make_tuple(literal_name, e.name_pattern.size(), e.domain_pattern.size());
  };
  for (const auto& e : entries_) {
    if (!DomainPatternMatches(e.domain_pattern, host) || !PatternMatches(e.name_pattern, name)) {
      continue;
    }
    if (!best || rank(e) > rank(*best)) best = &e;
  }
  return best;
}

TrackerList TrackerList::Parse(std::string_view text) {
  TrackerList list;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    std::string domain, token, extra;
    if (!(fields >> domain)) continue;
    if (!(fields >> token)) throw ParseError(line_no, "missing class token");
    if (fields >> extra) throw ParseError(line_no, "unexpected trailing field '" + extra + "'");
    domain = NormalizeHost(domain);
    if (!IsValidHostName(domain)) throw ParseError(line_no, "invalid domain '" + domain + "'");
    auto purpose = PurposeFromString(token);
    if (!purpose || *purpose == PurposeClass::kUnknown) {
      throw ParseError(line_no, "unknown class token '" + token + "'");
    }
    auto [it, inserted] = list.domains_.emplace(domain, *purpose);
    if (!inserted && it->second != *purpose) {
      throw ParseError(line_no, "conflicting class for duplicate domain '" + domain + "'");
    }
  }
  return list;
}

std::optional<PurposeClass> TrackerList::Lookup(std::string_view registrable_domain) const {
  auto it = domains_.find(registrable_domain);
  if (it == domains_.end()) return std::nullopt;
  return it->second;
}

Classification AsThirdParty(Classification c) {
  c.relation.party = Party::kThirdParty;
  c.consent_required = ConsentRequirement::kNo;
  for (auto& p : c.all_classes) {
    if (p == PurposeClass::kLocalAnalytics) p = PurposeClass::kNonLocalAnalytics;
  }
  c.purpose = c.all_classes.front();
  for (PurposeClass p : c.all_classes) {
    if (ConsentRequired(p) > c.consent_required) {
      c.consent_required = ConsentRequired(p);
      c.purpose = p;
    }
  }
  return c;
}

Classification Classify(std::string_view element_host, std::string_view element_name,
                        std::string_view site_url, const CookieManifest& manifest,
                        const TrackerList& trackers, const PublicSuffixList& suffixes) {
  Classification c;
  c.relation = RelationOf(site_url, element_host, suffixes);
  if (const ManifestEntry* entry = manifest.Match(element_host, element_name)) {
    c.all_classes = entry->purpose_classes;
    c.source = ClassificationSource::kManifest;
  } else if (auto tracked = trackers.Lookup(c.relation.element_registrable_domain)) {
    c.all_classes = {*tracked};
    c.source = ClassificationSource::kTrackerList;
  } else {
    c.all_classes = {PurposeClass::kUnknown};
    c.source = ClassificationSource::kFallback;
  }
  if (c.relation.party == Party::kThirdParty) return AsThirdParty(std::move(c));
  c.consent_required = ConsentRequirement::kNo;
  c.purpose = c.all_classes.front();
  for (PurposeClass p : c.all_classes) {
    if (ConsentRequired(p) > c.consent_required) {
      c.consent_required = ConsentRequired(p);
      c.purpose = p;
    }
  }
  return c;
}

}  // namespace consent_audit

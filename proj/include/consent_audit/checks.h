#ifndef CONSENT_AUDIT_CHECKS_H_
#define CONSENT_AUDIT_CHECKS_H_

// Automated requirement checkers and the per-site orchestration.
//
// Every checker is a pure function of its sessions and the immutable
// AuditContext, so sites (and checkers within a site) can run concurrently.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "consent_audit/identifier.h"
#include "consent_audit/purpose.h"
#include "consent_audit/session.h"
#include "consent_audit/tcf.h"
#include "consent_audit/verdict.h"

namespace consent_audit {

struct LifespanProfile {
  std::string name;
  std::optional<int> analytics_max_days;
  std::optional<int> consent_storage_max_days;

  // Bundled profiles: "cnil", "spanish", "danish", "irish".
  static const std::vector<LifespanProfile>& Builtins();
  static std::optional<LifespanProfile> Builtin(std::string_view name);
};

// Keyword lexicon: "[category]" headers followed by one phrase per line.
// Lines starting with '#' are comments. Matching is case-insensitive.
class Lexicon {
 public:
  static Lexicon Parse(std::string_view text);
  const std::map<std::string, std::vector<std::string>>& categories() const {
    return categories_;
  }

 private:
  std::map<std::string, std::vector<std::string>> categories_;
};

// Every category the information scan reports on, in report order.
std::span<const std::string_view> InformationCategories();

// Cosmetic banner rules: "##selector" or "host1,host2##selector"; '!' starts
// a comment.
class SelectorRules {
 public:
  static SelectorRules Parse(std::string_view text);
  bool Matches(std::string_view selector, std::string_view site_host) const;
  std::size_t size() const { return rules_.size(); }

 private:
  struct Rule {
    std::vector<std::string> hosts;  // empty: any site
    std::string selector;
  };
  std::vector<Rule> rules_;
};

struct CheckConfig {
  IdentifierConfig identifier;
  // Treat Unknown-purpose identifiers as consent-requiring.
  bool strict_unknown = false;
  double wall_area_threshold = 0.5;
  // Storage names holding a consent record in a non-TCF format. TCF names
  // are always recognized.
  std::vector<std::string> consent_storage_names = {
      "OptanonConsent", "OptanonAlertBoxClosed", "CookieConsent",
      "cookieconsent_status", "didomi_token", "cmplz_consent_status"};
};

struct AuditContext {
  PublicSuffixList suffixes;
  CookieManifest manifest;
  TrackerList trackers;
  SelectorRules selector_rules;
  Lexicon lexicon;
  LifespanProfile lifespan_profile;
  CheckConfig config;
};

// All captures of one site.
struct SiteCapture {
  std::string site_id;
  std::string site_url;
  std::vector<CapturedSession> sessions;

  std::vector<const CapturedSession*> All(ScenarioKind scenario) const;
  // A second no_action capture from a different clean profile, preferring
  // the same viewport.
  const CapturedSession* TwinOf(const CapturedSession& session) const;
};

// Consent storage as read back by the registration checks.
enum class ConsentReading { kPositive, kNegative, kUnrecognized };

struct ConsentItem {
  std::string name;
  std::string value;
  std::string host;  // cookie domain or storage origin
  bool is_cookie = true;
  std::optional<std::int64_t> lifespan_seconds;
  std::int64_t t_ms = 0;
  ConsentReading reading = ConsentReading::kUnrecognized;
  std::optional<tcf::TcfConsentRecord> record;
};

bool IsConsentStorageName(std::string_view name, const CheckConfig& config);
ConsentReading ReadConsentValue(std::string_view name, std::string_view value,
                                std::optional<tcf::TcfConsentRecord>* record = nullptr);

// Consent items held in storage at the end of |session|.
std::vector<ConsentItem> ConsentStateAtEnd(const CapturedSession& session,
                                           const CheckConfig& config);
// Consent items written at or after |from_ms| and before |until_ms|.
std::vector<ConsentItem> ConsentWrites(const CapturedSession& session, std::int64_t from_ms,
                                       std::optional<std::int64_t> until_ms,
                                       const CheckConfig& config);

Verdict CheckPriorStorage(const CapturedSession& session, const CapturedSession* twin,
                          const AuditContext& ctx);
Verdict CheckPriorSending(const CapturedSession& session, const CapturedSession* twin,
                          const AuditContext& ctx);
// |session| must be a close_banner or scroll capture.
Verdict CheckAffirmativeAction(const CapturedSession& session, const AuditContext& ctx);
Verdict CheckPostConsentRegistration(const CapturedSession& session, const AuditContext& ctx);
Verdict CheckCorrectRegistration(const CapturedSession& session, const AuditContext& ctx);
Verdict CheckConsentWall(const CapturedSession& session, const AuditContext& ctx);

struct TextMatch {
  std::string phrase;
  std::size_t offset = 0;
  std::string snippet;
};

struct InformationEvidence {
  bool page_present = false;
  // One entry per InformationCategories() item; empty vector = absent.
  std::map<std::string, std::vector<TextMatch>> matches;
  bool Present(std::string_view category) const;
};

InformationEvidence InfoPageScan(std::optional<std::string_view> text, const Lexicon& lexicon,
                                 std::span<const std::string> observed_cookie_names = {});

std::vector<Finding> LifespanFindings(const SiteCapture& site, const AuditContext& ctx);

// Exactly 22 verdicts, ordered R1..R22.
std::vector<Verdict> RunAll(const SiteCapture& site, const AuditContext& ctx);

}  // namespace consent_audit

#endif  // CONSENT_AUDIT_CHECKS_H_

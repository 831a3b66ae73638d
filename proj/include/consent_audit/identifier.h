#ifndef CONSENT_AUDIT_IDENTIFIER_H_
#define CONSENT_AUDIT_IDENTIFIER_H_

// Likelihood that a stored value is a per-user identifier.
//
// Whether a stored string identifies a user cannot be known with certainty,
// so the result is a score with the triggered features listed, never a
// yes/no oracle. Cookies and localStorage entries share one threshold set.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "consent_audit/session.h"

namespace consent_audit {

enum class CharsetClass { kAlpha, kHex, kBase64ish, kMixed, kNumeric };

std::string_view ToString(CharsetClass c);

struct IdentifierFeatures {
  std::size_t value_length = 0;
  double entropy_bits_per_char = 0.0;
  std::optional<std::int64_t> lifespan_seconds;
  // Set only when a twin record from a second clean profile was available.
  std::optional<bool> cross_profile_distinct;
  CharsetClass charset_class = CharsetClass::kMixed;
};

// Thresholds and weights. Each satisfied threshold adds its weight to the
// score; a value that differs across two clean profiles and is at least
// |min_length| long scores 1.0 outright.
struct IdentifierConfig {
  std::size_t min_length = 8;
  double min_entropy = 2.5;
  std::int64_t min_lifespan_days = 30;
  double weight_length = 0.3;
  double weight_entropy = 0.4;
  double weight_lifespan = 0.3;
  double threshold = 0.5;
  // Values identical across clean profiles are capped at this score.
  double identical_twin_cap = 0.25;

  // Throws ConfigError when a field is outside its documented range.
  void Validate() const;
};

// Values shorter than this always score 0.
inline constexpr std::size_t kDegenerateLength = 4;

struct IdentifierVerdict {
  double score = 0.0;
  bool is_likely_identifier = false;
  std::vector<std::string> triggered_features;
};

// Shannon entropy over byte frequencies, in bits per character. 0 for
// strings of length <= 1.
double ShannonEntropy(std::string_view value);

CharsetClass ClassifyCharset(std::string_view value);

IdentifierFeatures ExtractFeatures(std::string_view value,
                                   std::optional<std::int64_t> lifespan_seconds,
                                   const std::string* twin_value);
IdentifierFeatures ExtractFeatures(const CookieRecord& cookie, const CookieRecord* twin);
IdentifierFeatures ExtractFeatures(const StorageEntry& entry, const StorageEntry* twin);

IdentifierVerdict ScoreIdentifier(const IdentifierFeatures& features,
                                  const IdentifierConfig& config);

}  // namespace consent_audit

#endif  // CONSENT_AUDIT_IDENTIFIER_H_

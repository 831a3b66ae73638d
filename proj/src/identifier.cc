#include "consent_audit/identifier.h"

#include <array>
#include <cctype>
#include <cmath>

#include "consent_audit/errors.h"

namespace consent_audit {

std::string_view ToString(CharsetClass c) {
  switch (c) {
    case CharsetClass::kAlpha: return "alpha";
    case CharsetClass::kHex: return "hex";
    case CharsetClass::kBase64ish: return "base64ish";
    case CharsetClass::kMixed: return "mixed";
    case CharsetClass::kNumeric: return "numeric";
  }
  return "mixed";
}

void IdentifierConfig::Validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("[identifier] " + what); };
  if (min_length < 1 || min_length > 4096) fail("min_length must be in [1, 4096]");
  if (!(min_entropy >= 0.0 && min_entropy <= 8.0)) fail("min_entropy must be in [0, 8]");
  if (min_lifespan_days < 0 || min_lifespan_days > 36500) {
    fail("min_lifespan_days must be in [0, 36500]");
  }
  for (double w : {weight_length, weight_entropy, weight_lifespan}) {
    if (!(w >= 0.0 && w <= 1.0)) fail("weights must be in [0, 1]");
  }
  if (std::abs(weight_length + weight_entropy + weight_lifespan - 1.0) > 1e-9) {
    fail("weights must sum to 1");
  }
  if (!(threshold > 0.0 && threshold <= 1.0)) fail("threshold must be in (0, 1]");
  if (!(identical_twin_cap >= 0.0 && identical_twin_cap < threshold)) {
    fail("identical_twin_cap must be in [0, threshold)");
  }
}

double ShannonEntropy(std::string_view value) {
  if (value.size() <= 1) return 0.0;
  std::array<std::size_t, 256> counts{};
  for (unsigned char c : value) ++counts[c];
  const double n = static_cast<double>(value.size());
  double h = 0.0;
  for (std::size_t count : counts) {
    if (count == 0) continue;
    const double p = static_cast<double>(count) / n;
    h -= p * std::log2(p);
  }
  // Clamp -0.0 and rounding noise for single-symbol strings.
  return h < 1e-12 ? 0.0 : h;
}

CharsetClass ClassifyCharset(std::string_view value) {
  bool digits = true, letters = true, hex = true, b64 = true;
  for (unsigned char c : value) {
    const bool is_digit = std::isdigit(c) != 0;
    const bool is_alpha = std::isalpha(c) != 0;
    digits &= is_digit;
    letters &= is_alpha;
    hex &= std::isxdigit(c) != 0;
    b64 &= is_digit || is_alpha || c == '+' || c == '/' || c == '=' || c == '-' || c == '_';
  }
  if (value.empty()) return CharsetClass::kMixed;
  if (digits) return CharsetClass::kNumeric;
  if (letters) return CharsetClass::kAlpha;
  if (hex) return CharsetClass::kHex;
  if (b64) return CharsetClass::kBase64ish;
  return CharsetClass::kMixed;
}

IdentifierFeatures ExtractFeatures(std::string_view value,
                                   std::optional<std::int64_t> lifespan_seconds,
                                   const std::string* twin_value) {
  IdentifierFeatures f;
  f.value_length = value.size();
  f.entropy_bits_per_char = ShannonEntropy(value);
  f.lifespan_seconds = lifespan_seconds;
  if (twin_value) f.cross_profile_distinct = *twin_value != value;
  f.charset_class = ClassifyCharset(value);
  return f;
}

IdentifierFeatures ExtractFeatures(const CookieRecord& cookie, const CookieRecord* twin) {
  return ExtractFeatures(cookie.value, cookie.LifespanSeconds(), twin ? &twin->value : nullptr);
}

IdentifierFeatures ExtractFeatures(const StorageEntry& entry, const StorageEntry* twin) {
  // localStorage never expires on its own.
  return ExtractFeatures(entry.value, std::nullopt, twin ? &twin->value : nullptr);
}

IdentifierVerdict ScoreIdentifier(const IdentifierFeatures& f, const IdentifierConfig& config) {
  config.Validate();
  IdentifierVerdict v;
  if (f.value_length < kDegenerateLength) {
    v.triggered_features.push_back("degenerate_length");
    return v;
  }
  const bool long_enough = f.value_length >= config.min_length;
  if (long_enough && f.cross_profile_distinct == true) {
    v.score = 1.0;
    v.is_likely_identifier = true;
    v.triggered_features = {"length", "cross_profile_distinct"};
    return v;
  }
  if (long_enough) {
    v.score += config.weight_length;
    v.triggered_features.push_back("length");
  }
  if (f.entropy_bits_per_char >= config.min_entropy) {
    v.score += config.weight_entropy;
    v.triggered_features.push_back("entropy");
  }
  // Session-only values never satisfy the lifespan threshold.
  if (f.lifespan_seconds && *f.lifespan_seconds >= config.min_lifespan_days * kSecondsPerDay) {
    v.score += config.weight_lifespan;
    v.triggered_features.push_back("lifespan");
  }
  if (f.cross_profile_distinct == false && v.score > config.identical_twin_cap) {
    v.score = config.identical_twin_cap;
    v.triggered_features.push_back("cross_profile_identical");
  }
  v.score = std::min(v.score, 1.0);
  v.is_likely_identifier = v.score >= config.threshold;
  return v;
}

}  // namespace consent_audit

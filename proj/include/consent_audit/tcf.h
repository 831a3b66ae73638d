#ifndef CONSENT_AUDIT_TCF_H_
#define CONSENT_AUDIT_TCF_H_

// IAB Transparency & Consent Framework consent strings.
//
// Supports the v1.1 consent string and the v2 core segment. Further v2
// segments (disclosed vendors, publisher TC) are carried as opaque text so an
// unmodified decode re-encodes byte-identically.

#include <bitset>
#include <chrono>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "consent_audit/errors.h"

namespace consent_audit::tcf {

inline constexpr int kNumPurposes = 24;

// TCF timestamps count deciseconds since the Unix epoch.
using Deciseconds = std::chrono::duration<std::int64_t, std::deci>;

enum class VendorEncoding { kBitField, kRange };

struct VendorRange {
  std::uint16_t start = 0;
  std::uint16_t end = 0;  // inclusive; equal to start for single ids
  bool operator==(const VendorRange&) const = default;
};

// A vendor section: consent (or legitimate-interest) set plus the layout
// choices needed to reproduce its bits.
struct VendorField {
  std::uint16_t max_vendor_id = 0;
  VendorEncoding encoding = VendorEncoding::kBitField;
  // v1.1 range encoding only: status of vendors not listed in a range.
  bool default_consent = false;
  std::set<std::uint16_t> ids;
  // Range entries exactly as decoded. Used by the encoder when they still
  // describe |ids|; otherwise canonical maximal runs are emitted. Not part of
  // equality.
  std::vector<VendorRange> range_entries;

  bool operator==(const VendorField& other) const {
    return max_vendor_id == other.max_vendor_id && encoding == other.encoding &&
           default_consent == other.default_consent && ids == other.ids;
  }
};

struct PublisherRestriction {
  std::uint8_t purpose_id = 0;        // 6 bits
  std::uint8_t restriction_type = 0;  // 2 bits
  std::vector<VendorRange> vendors;
  bool operator==(const PublisherRestriction&) const = default;
};

// Core-segment fields that only exist in v2.
struct CoreV2Fields {
  std::uint8_t policy_version = 2;
  bool is_service_specific = false;
  bool use_non_standard_stacks = false;
  std::bitset<12> special_feature_optins;
  std::bitset<kNumPurposes> purposes_li_transparency;
  bool purpose_one_treatment = false;
  std::string publisher_cc = "AA";
  VendorField vendor_legitimate_interests;
  std::vector<PublisherRestriction> publisher_restrictions;
  bool operator==(const CoreV2Fields&) const = default;
};

struct TcfConsentRecord {
  int tcf_version = 2;
  Deciseconds created{0};
  Deciseconds last_updated{0};
  int cmp_id = 0;
  int cmp_version = 0;
  int consent_screen = 0;
  std::string consent_language = "EN";
  int vendor_list_version = 0;
  // Bit i holds purpose i + 1.
  std::bitset<kNumPurposes> purposes_consent;
  VendorField vendor_consents;
  std::optional<CoreV2Fields> v2 = CoreV2Fields{};  // present iff tcf_version == 2
  // Non-padding bits following the last core field.
  std::vector<bool> trailing_bits;
  // Further '.'-separated segments, verbatim.
  std::vector<std::string> extra_segments;

  bool HasPurpose(int purpose) const {
    return purpose >= 1 && purpose <= kNumPurposes && purposes_consent.test(purpose - 1);
  }
  void SetPurpose(int purpose, bool value = true) { purposes_consent.set(purpose - 1, value); }

  bool operator==(const TcfConsentRecord&) const = default;
};

enum class DecodeErrorKind {
  kBadBase64,
  kTruncatedBits,
  kUnsupportedVersion,
  kInvalidField,
};

std::string_view ToString(DecodeErrorKind kind);

class DecodeError : public Error {
 public:
  DecodeError(DecodeErrorKind kind, std::size_t offset, const std::string& detail);
  DecodeErrorKind kind() const { return kind_; }
  // Character offset for kBadBase64, bit offset within the core segment
  // otherwise.
  std::size_t offset() const { return offset_; }

 private:
  DecodeErrorKind kind_;
  std::size_t offset_;
};

enum class EncodeErrorKind { kVendorIdOutOfRange, kFieldOutOfRange };

class EncodeError : public Error {
 public:
  EncodeError(EncodeErrorKind kind, const std::string& detail)
      : Error(detail), kind_(kind) {}
  EncodeErrorKind kind() const { return kind_; }

 private:
  EncodeErrorKind kind_;
};

TcfConsentRecord DecodeTcf(std::string_view text);

// Canonical, padding-free base64url.
std::string EncodeTcf(const TcfConsentRecord& record);

enum class ConsentPolarity { kPositive, kNegative };

std::string_view ToString(ConsentPolarity polarity);

// Positive iff at least one purpose and at least one vendor are consented.
ConsentPolarity Polarity(const TcfConsentRecord& record);

// Storage keys under which TCF strings are conventionally kept.
bool IsTcfStorageName(std::string_view name);

}  // namespace consent_audit::tcf

#endif  // CONSENT_AUDIT_TCF_H_

#include "consent_audit/tcf.h"

#include <algorithm>
#include <array>

namespace consent_audit::tcf {
namespace {

constexpr std::string_view kAlphabet =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-_";

int Base64Value(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (c == '-') return 62;
  if (c == '_') return 63;
  return -1;
}

// Segment text -> bits, MSB first. |base| is the segment's offset in the full
// string, for error reporting.
std::vector<bool> DecodeBase64Url(std::string_view text, std::size_t base) {
  while (!text.empty() && text.back() == '=') text.remove_suffix(1);
  std::vector<bool> bits;
  bits.reserve(text.size() * 6);
  for (std::size_t i = 0; i < text.size(); ++i) {
    const int v = Base64Value(text[i]);
    if (v < 0) {
      throw DecodeError(DecodeErrorKind::kBadBase64, base + i,
                        "character outside the base64url alphabet");
    }
    for (int b = 5; b >= 0; --b) bits.push_back((v >> b) & 1);
  }
  return bits;
}

std::string EncodeBase64Url(std::vector<bool> bits) {
  while (bits.size() % 6 != 0) bits.push_back(false);
  std::string out;
  out.reserve(bits.size() / 6);
  for (std::size_t i = 0; i < bits.size(); i += 6) {
    int v = 0;
    for (int b = 0; b < 6; ++b) v = (v << 1) | (bits[i + b] ? 1 : 0);
    out.push_back(kAlphabet[v]);
  }
  return out;
}

class BitReader {
 public:
  explicit BitReader(const std::vector<bool>& bits) : bits_(bits) {}

  std::uint64_t Read(int width, std::string_view field) {
    if (pos_ + width > bits_.size()) {
      throw DecodeError(DecodeErrorKind::kTruncatedBits, pos_,
                        "string ends inside field " + std::string(field));
    }
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) v = (v << 1) | (bits_[pos_++] ? 1 : 0);
    return v;
  }
  bool Bit(std::string_view field) { return Read(1, field) != 0; }

  std::size_t pos() const { return pos_; }
  std::vector<bool> Rest() const {
    return std::vector<bool>(bits_.begin() + static_cast<std::ptrdiff_t>(pos_), bits_.end());
  }

 private:
  const std::vector<bool>& bits_;
  std::size_t pos_ = 0;
};

class BitWriter {
 public:
  void Write(std::uint64_t value, int width, std::string_view field) {
    if (width < 64 && value >> width != 0) {
      throw EncodeError(EncodeErrorKind::kFieldOutOfRange,
                        std::string(field) + " does not fit in " + std::to_string(width) + " bits");
    }
    for (int b = width - 1; b >= 0; --b) bits_.push_back((value >> b) & 1);
  }
  void Bit(bool v) { bits_.push_back(v); }
  void Append(const std::vector<bool>& more) { bits_.insert(bits_.end(), more.begin(), more.end()); }
  std::vector<bool> Take() { return std::move(bits_); }
  std::size_t size() const { return bits_.size(); }

 private:
  std::vector<bool> bits_;
};

std::string ReadLetters(BitReader& r, std::string_view field) {
  const std::size_t at = r.pos();
  std::string out;
  for (int i = 0; i < 2; ++i) {
    const auto v = r.Read(6, field);
    if (v > 25) {
      throw DecodeError(DecodeErrorKind::kInvalidField, at, std::string(field) + " is not A-Z");
    }
    out.push_back(static_cast<char>('A' + v));
  }
  return out;
}

void WriteLetters(BitWriter& w, std::string_view letters, std::string_view field) {
  if (letters.size() != 2) {
    throw EncodeError(EncodeErrorKind::kFieldOutOfRange, std::string(field) + " must be 2 letters");
  }
  for (char c : letters) {
    const char upper = (c >= 'a' && c <= 'z') ? static_cast<char>(c - 'a' + 'A') : c;
    if (upper < 'A' || upper > 'Z') {
      throw EncodeError(EncodeErrorKind::kFieldOutOfRange, std::string(field) + " must be A-Z");
    }
    w.Write(static_cast<std::uint64_t>(upper - 'A'), 6, field);
  }
}

std::vector<VendorRange> ReadRangeEntries(BitReader& r, std::uint16_t max_vendor_id,
                                          std::string_view field) {
  const auto count = r.Read(12, "NumEntries");
  std::vector<VendorRange> entries;
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::size_t at = r.pos();
    const bool is_range = r.Bit("IsARange");
    VendorRange range;
    range.start = static_cast<std::uint16_t>(r.Read(16, "StartVendorId"));
    range.end = is_range ? static_cast<std::uint16_t>(r.Read(16, "EndVendorId")) : range.start;
    if (range.start == 0 || range.start > range.end ||
        (max_vendor_id != 0 && range.end > max_vendor_id)) {
      throw DecodeError(DecodeErrorKind::kInvalidField, at,
                        std::string(field) + " has an invalid vendor range");
    }
    entries.push_back(range);
  }
  return entries;
}

void WriteRangeEntries(BitWriter& w, const std::vector<VendorRange>& entries) {
  w.Write(entries.size(), 12, "NumEntries");
  for (const auto& e : entries) {
    const bool is_range = e.start != e.end;
    w.Bit(is_range);
    w.Write(e.start, 16, "StartVendorId");
    if (is_range) w.Write(e.end, 16, "EndVendorId");
  }
}

// Vendors whose status differs from |default_consent|, as listed by entries.
std::set<std::uint16_t> ExpandEntries(const std::vector<VendorRange>& entries) {
  std::set<std::uint16_t> out;
  for (const auto& e : entries) {
    for (std::uint32_t id = e.start; id <= e.end; ++id) out.insert(static_cast<std::uint16_t>(id));
  }
  return out;
}

std::set<std::uint16_t> ApplyDefault(const std::set<std::uint16_t>& listed, bool default_consent,
                                     std::uint16_t max_vendor_id) {
  if (!default_consent) return listed;
  std::set<std::uint16_t> out;
  for (std::uint32_t id = 1; id <= max_vendor_id; ++id) {
    if (!listed.count(static_cast<std::uint16_t>(id))) out.insert(static_cast<std::uint16_t>(id));
  }
  return out;
}

std::vector<VendorRange> CanonicalRuns(const std::set<std::uint16_t>& ids) {
  std::vector<VendorRange> runs;
  for (std::uint16_t id : ids) {
    if (!runs.empty() && runs.back().end + 1 == id) {
      runs.back().end = id;
    } else {
      runs.push_back({id, id});
    }
  }
  return runs;
}

// |v1| selects the v1.1 layout (default-consent bit in range mode).
VendorField ReadVendorField(BitReader& r, bool v1, std::string_view field) {
  VendorField f;
  f.max_vendor_id = static_cast<std::uint16_t>(r.Read(16, "MaxVendorId"));
  f.encoding = r.Bit("EncodingType") ? VendorEncoding::kRange : VendorEncoding::kBitField;
  if (f.encoding == VendorEncoding::kBitField) {
    for (std::uint32_t id = 1; id <= f.max_vendor_id; ++id) {
      if (r.Bit("VendorBitField")) f.ids.insert(static_cast<std::uint16_t>(id));
    }
    return f;
  }
  if (v1) f.default_consent = r.Bit("DefaultConsent");
  f.range_entries = ReadRangeEntries(r, f.max_vendor_id, field);
  f.ids = ApplyDefault(ExpandEntries(f.range_entries), f.default_consent, f.max_vendor_id);
  return f;
}

void WriteVendorField(BitWriter& w, const VendorField& f, bool v1, std::string_view field) {
  for (std::uint16_t id : f.ids) {
    if (id == 0 || id > f.max_vendor_id) {
      throw EncodeError(EncodeErrorKind::kVendorIdOutOfRange,
                        std::string(field) + ": vendor id " + std::to_string(id) +
                            " outside 1.." + std::to_string(f.max_vendor_id));
    }
  }
  if (!v1 && f.default_consent) {
    throw EncodeError(EncodeErrorKind::kFieldOutOfRange,
                      std::string(field) + ": default consent exists only in v1.1");
  }
  w.Write(f.max_vendor_id, 16, "MaxVendorId");
  w.Bit(f.encoding == VendorEncoding::kRange);
  if (f.encoding == VendorEncoding::kBitField) {
    for (std::uint32_t id = 1; id <= f.max_vendor_id; ++id) {
      w.Bit(f.ids.count(static_cast<std::uint16_t>(id)) != 0);
    }
    return;
  }
  if (v1) w.Bit(f.default_consent);
  std::vector<VendorRange> entries = f.range_entries;
  const bool hint_valid =
      !entries.empty() &&
      std::all_of(entries.begin(), entries.end(),
                  [&](const VendorRange& e) {
                    return e.start != 0 && e.start <= e.end && e.end <= f.max_vendor_id;
                  }) &&
      ApplyDefault(ExpandEntries(entries), f.default_consent, f.max_vendor_id) == f.ids;
  if (!hint_valid) {
    entries = CanonicalRuns(ApplyDefault(f.ids, f.default_consent, f.max_vendor_id));
  }
  WriteRangeEntries(w, entries);
}

template <std::size_t N>
std::bitset<N> ReadBits(BitReader& r, std::string_view field) {
  std::bitset<N> out;
  for (std::size_t i = 0; i < N; ++i) out.set(i, r.Bit(field));
  return out;
}

template <std::size_t N>
void WriteBits(BitWriter& w, const std::bitset<N>& bits) {
  for (std::size_t i = 0; i < N; ++i) w.Bit(bits.test(i));
}

TcfConsentRecord DecodeCore(const std::vector<bool>& bits) {
  BitReader r(bits);
  TcfConsentRecord rec;
  rec.tcf_version = static_cast<int>(r.Read(6, "Version"));
  if (rec.tcf_version != 1 && rec.tcf_version != 2) {
    throw DecodeError(DecodeErrorKind::kUnsupportedVersion, 0,
                      "unsupported TCF version " + std::to_string(rec.tcf_version));
  }
  const bool v1 = rec.tcf_version == 1;
  rec.created = Deciseconds(static_cast<std::int64_t>(r.Read(36, "Created")));
  rec.last_updated = Deciseconds(static_cast<std::int64_t>(r.Read(36, "LastUpdated")));
  rec.cmp_id = static_cast<int>(r.Read(12, "CmpId"));
  rec.cmp_version = static_cast<int>(r.Read(12, "CmpVersion"));
  rec.consent_screen = static_cast<int>(r.Read(6, "ConsentScreen"));
  rec.consent_language = ReadLetters(r, "ConsentLanguage");
  rec.vendor_list_version = static_cast<int>(r.Read(12, "VendorListVersion"));
  if (v1) {
    rec.v2.reset();
    rec.purposes_consent = ReadBits<kNumPurposes>(r, "PurposesAllowed");
    rec.vendor_consents = ReadVendorField(r, true, "vendor consents");
  } else {
    CoreV2Fields v2;
    v2.policy_version = static_cast<std::uint8_t>(r.Read(6, "TcfPolicyVersion"));
    v2.is_service_specific = r.Bit("IsServiceSpecific");
    v2.use_non_standard_stacks = r.Bit("UseNonStandardStacks");
    v2.special_feature_optins = ReadBits<12>(r, "SpecialFeatureOptIns");
    rec.purposes_consent = ReadBits<kNumPurposes>(r, "PurposesConsent");
    v2.purposes_li_transparency = ReadBits<kNumPurposes>(r, "PurposesLITransparency");
    v2.purpose_one_treatment = r.Bit("PurposeOneTreatment");
    v2.publisher_cc = ReadLetters(r, "PublisherCC");
    rec.vendor_consents = ReadVendorField(r, false, "vendor consents");
    v2.vendor_legitimate_interests = ReadVendorField(r, false, "vendor legitimate interests");
    const auto restrictions = r.Read(12, "NumPubRestrictions");
    for (std::uint64_t i = 0; i < restrictions; ++i) {
      PublisherRestriction pr;
      pr.purpose_id = static_cast<std::uint8_t>(r.Read(6, "PurposeId"));
      pr.restriction_type = static_cast<std::uint8_t>(r.Read(2, "RestrictionType"));
      pr.vendors = ReadRangeEntries(r, 0, "publisher restriction");
      v2.publisher_restrictions.push_back(std::move(pr));
    }
    rec.v2 = std::move(v2);
  }
  std::vector<bool> rest = r.Rest();
  const bool is_padding =
      rest.size() < 6 && std::none_of(rest.begin(), rest.end(), [](bool b) { return b; });
  if (!is_padding) rec.trailing_bits = std::move(rest);
  return rec;
}

}  // namespace

std::string_view ToString(DecodeErrorKind kind) {
  switch (kind) {
    case DecodeErrorKind::kBadBase64: return "bad_base64";
    case DecodeErrorKind::kTruncatedBits: return "truncated_bits";
    case DecodeErrorKind::kUnsupportedVersion: return "unsupported_version";
    case DecodeErrorKind::kInvalidField: return "invalid_field";
  }
  return "unknown";
}

DecodeError::DecodeError(DecodeErrorKind kind, std::size_t offset, const std::string& detail)
    : Error(std::string(ToString(kind)) + " at offset " + std::to_string(offset) + ": " + detail),
      kind_(kind),
      offset_(offset) {}

TcfConsentRecord DecodeTcf(std::string_view text) {
  if (text.empty()) {
    throw DecodeError(DecodeErrorKind::kTruncatedBits, 0, "empty consent string");
  }
  std::vector<std::string_view> segments;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = text.find('.', start);
    segments.push_back(text.substr(start, dot == std::string_view::npos ? dot : dot - start));
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  TcfConsentRecord rec = DecodeCore(DecodeBase64Url(segments[0], 0));
  std::size_t offset = segments[0].size() + 1;
  for (std::size_t i = 1; i < segments.size(); ++i) {
    if (segments[i].empty()) {
      throw DecodeError(DecodeErrorKind::kTruncatedBits, 0, "empty segment");
    }
    DecodeBase64Url(segments[i], offset);  // validates the alphabet only
    rec.extra_segments.emplace_back(segments[i]);
    offset += segments[i].size() + 1;
  }
  return rec;
}

std::string EncodeTcf(const TcfConsentRecord& rec) {
  if (rec.tcf_version != 1 && rec.tcf_version != 2) {
    throw EncodeError(EncodeErrorKind::kFieldOutOfRange, "tcf_version must be 1 or 2");
  }
  const bool v1 = rec.tcf_version == 1;
  if (v1 == rec.v2.has_value()) {
    throw EncodeError(EncodeErrorKind::kFieldOutOfRange,
                      "v2 core fields must be present exactly for version 2");
  }
  if (rec.created.count() < 0 || rec.last_updated.count() < 0) {
    throw EncodeError(EncodeErrorKind::kFieldOutOfRange, "negative timestamp");
  }
  BitWriter w;
  w.Write(static_cast<std::uint64_t>(rec.tcf_version), 6, "Version");
  w.Write(static_cast<std::uint64_t>(rec.created.count()), 36, "Created");
  w.Write(static_cast<std::uint64_t>(rec.last_updated.count()), 36, "LastUpdated");
  w.Write(static_cast<std::uint64_t>(rec.cmp_id), 12, "CmpId");
  w.Write(static_cast<std::uint64_t>(rec.cmp_version), 12, "CmpVersion");
  w.Write(static_cast<std::uint64_t>(rec.consent_screen), 6, "ConsentScreen");
  WriteLetters(w, rec.consent_language, "ConsentLanguage");
  w.Write(static_cast<std::uint64_t>(rec.vendor_list_version), 12, "VendorListVersion");
  if (v1) {
    WriteBits(w, rec.purposes_consent);
    WriteVendorField(w, rec.vendor_consents, true, "vendor consents");
  } else {
    const CoreV2Fields& v2 = *rec.v2;
    w.Write(v2.policy_version, 6, "TcfPolicyVersion");
    w.Bit(v2.is_service_specific);
    w.Bit(v2.use_non_standard_stacks);
    WriteBits(w, v2.special_feature_optins);
    WriteBits(w, rec.purposes_consent);
    WriteBits(w, v2.purposes_li_transparency);
    w.Bit(v2.purpose_one_treatment);
    WriteLetters(w, v2.publisher_cc, "PublisherCC");
    WriteVendorField(w, rec.vendor_consents, false, "vendor consents");
    WriteVendorField(w, v2.vendor_legitimate_interests, false, "vendor legitimate interests");
    w.Write(v2.publisher_restrictions.size(), 12, "NumPubRestrictions");
    for (const auto& pr : v2.publisher_restrictions) {
      w.Write(pr.purpose_id, 6, "PurposeId");
      w.Write(pr.restriction_type, 2, "RestrictionType");
      for (const auto& e : pr.vendors) {
        if (e.start == 0 || e.start > e.end) {
          throw EncodeError(EncodeErrorKind::kVendorIdOutOfRange,
                            "publisher restriction has an invalid vendor range");
        }
      }
      WriteRangeEntries(w, pr.vendors);
    }
  }
  if (!rec.trailing_bits.empty()) {
    // The decoder cannot tell padding from payload, so trailing bits must
    // end on a character boundary and must not look like padding.
    const bool looks_like_padding =
        rec.trailing_bits.size() < 6 &&
        std::none_of(rec.trailing_bits.begin(), rec.trailing_bits.end(), [](bool b) { return b; });
    if ((w.size() + rec.trailing_bits.size()) % 6 != 0 || looks_like_padding) {
      throw EncodeError(EncodeErrorKind::kFieldOutOfRange,
                        "trailing bits must fill the last character and not be all-zero padding");
    }
  }
  w.Append(rec.trailing_bits);
  std::string out = EncodeBase64Url(w.Take());
  for (const auto& seg : rec.extra_segments) {
    out.push_back('.');
    out += seg;
  }
  return out;
}

std::string_view ToString(ConsentPolarity polarity) {
  return polarity == ConsentPolarity::kPositive ? "positive" : "negative";
}

ConsentPolarity Polarity(const TcfConsentRecord& rec) {
  return rec.purposes_consent.any() && !rec.vendor_consents.ids.empty()
             ? ConsentPolarity::kPositive
             : ConsentPolarity::kNegative;
}

bool IsTcfStorageName(std::string_view name) {
  return name == "euconsent" || name == "euconsent-v2";
}

}  // namespace consent_audit::tcf

#include "consent_audit/tcf_json.h"

#include "consent_audit/time_util.h"

namespace consent_audit::tcf {
namespace {

using nlohmann::json;

template <std::size_t N>
json BitIds(const std::bitset<N>& bits) {
  json out = json::array();
  for (std::size_t i = 0; i < N; ++i) {
    if (bits.test(i)) out.push_back(i + 1);
  }
  return out;
}

json VendorJson(const VendorField& f) {
  return {{"max_vendor_id", f.max_vendor_id},
          {"encoding", f.encoding == VendorEncoding::kRange ? "range" : "bitfield"},
          {"ids", f.ids}};
}

std::string Timestamp(Deciseconds d) {
  return FormatUtc(UtcTime(std::chrono::duration_cast<std::chrono::seconds>(d)));
}

}  // namespace

json ToJson(const TcfConsentRecord& r) {
  json out = {{"tcf_version", r.tcf_version},
              {"created", Timestamp(r.created)},
              {"last_updated", Timestamp(r.last_updated)},
              {"cmp_id", r.cmp_id},
              {"cmp_version", r.cmp_version},
              {"consent_screen", r.consent_screen},
              {"consent_language", r.consent_language},
              {"vendor_list_version", r.vendor_list_version},
              {"purposes_consent", BitIds(r.purposes_consent)},
              {"vendor_consents", VendorJson(r.vendor_consents)},
              {"extra_segments", r.extra_segments},
              {"polarity", ToString(Polarity(r))}};
  if (r.tcf_version == 1) out["vendor_consents"]["default_consent"] = r.vendor_consents.default_consent;
  if (r.v2) {
    const auto& v2 = *r.v2;
    json restrictions = json::array();
    for (const auto& pr : v2.publisher_restrictions) {
      json ranges = json::array();
      for (const auto& vr : pr.vendors) ranges.push_back({vr.start, vr.end});
      restrictions.push_back({{"purpose_id", pr.purpose_id},
                              {"restriction_type", pr.restriction_type},
                              {"vendors", ranges}});
    }
    out["policy_version"] = v2.policy_version;
    out["is_service_specific"] = v2.is_service_specific;
    out["use_non_standard_stacks"] = v2.use_non_standard_stacks;
    out["special_feature_optins"] = BitIds(v2.special_feature_optins);
    out["purposes_li_transparency"] = BitIds(v2.purposes_li_transparency);
    out["purpose_one_treatment"] = v2.purpose_one_treatment;
    out["publisher_cc"] = v2.publisher_cc;
    out["vendor_legitimate_interests"] = VendorJson(v2.vendor_legitimate_interests);
    out["publisher_restrictions"] = restrictions;
  }
  return out;
}

}  // namespace consent_audit::tcf

#ifndef CONSENT_AUDIT_TCF_JSON_H_
#define CONSENT_AUDIT_TCF_JSON_H_

#include <json.hpp>

#include "consent_audit/tcf.h"

namespace consent_audit::tcf {

// Human-readable view of a decoded record, including its polarity. Purpose
// and vendor sets are listed as 1-based ids.
nlohmann::json ToJson(const TcfConsentRecord& record);

}  // namespace consent_audit::tcf

#endif  // CONSENT_AUDIT_TCF_JSON_H_

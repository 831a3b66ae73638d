#ifndef CONSENT_AUDIT_URL_H_
#define CONSENT_AUDIT_URL_H_

#include <optional>
#include <string>
#include <string_view>

namespace consent_audit {

// Lower-cased host of an absolute http(s)-style URL, without port or
// userinfo. Returns nullopt when no valid host can be extracted.
std::optional<std::string> HostOfUrl(std::string_view url);

// Normalizes a cookie/storage domain: lower-case, leading '.' and trailing
// '.' removed.
std::string NormalizeHost(std::string_view host);

// True for DNS-style names (letters, digits, '-', '_' labels separated by
// dots) and dotted-quad IPv4 literals. A single leading '.' is tolerated so
// cookie Domain attributes validate.
bool IsValidHostName(std::string_view host);

}  // namespace consent_audit

#endif  // CONSENT_AUDIT_URL_H_

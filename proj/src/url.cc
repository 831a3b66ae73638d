#include "consent_audit/url.h"

#include <algorithm>
#include <cctype>

namespace consent_audit {

std::string NormalizeHost(std::string_view host) {
  while (!host.empty() && host.front() == '.') host.remove_prefix(1);
  while (!host.empty() && host.back() == '.') host.remove_suffix(1);
  std::string out(host);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

bool IsValidHostName(std::string_view host) {
  if (!host.empty() && host.front() == '.') host.remove_prefix(1);
  if (host.empty() || host.size() > 253) return false;
  size_t label_len = 0;
  for (char c : host) {
    if (c == '.') {
      if (label_len == 0) return false;
      label_len = 0;
      continue;
    }
    const auto uc = static_cast<unsigned char>(c);
    if (!std::isalnum(uc) && c != '-' && c != '_') return false;
    if (++label_len > 63) return false;
  }
  return label_len > 0;
}

std::optional<std::string> HostOfUrl(std::string_view url) {
  const size_t scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos || scheme_end == 0) {
    return std::nullopt;
  }
  std::string_view rest = url.substr(scheme_end + 3);
  const size_t authority_end = rest.find_first_of("/?#");
  std::string_view authority = rest.substr(0, authority_end);
  if (const size_t at = authority.rfind('@'); at != std::string_view::npos) {
    authority.remove_prefix(at + 1);
  }
  if (const size_t colon = authority.rfind(':');
      colon != std::string_view::npos) {
    authority = authority.substr(0, colon);
  }
  if (authority.empty() || authority.front() == '.' ||
      !IsValidHostName(authority)) {
    return std::nullopt;
  }
  return NormalizeHost(authority);
}

}  // namespace consent_audit

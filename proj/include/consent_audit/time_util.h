#ifndef CONSENT_AUDIT_TIME_UTIL_H_
#define CONSENT_AUDIT_TIME_UTIL_H_

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace consent_audit {

using UtcTime = std::chrono::sys_seconds;

// Parses "YYYY-MM-DDTHH:MM:SSZ". Returns nullopt on anything else.
std::optional<UtcTime> ParseUtc(std::string_view text);

std::string FormatUtc(UtcTime t);

inline constexpr std::int64_t kSecondsPerDay = 86400;

}  // namespace consent_audit

#endif  // CONSENT_AUDIT_TIME_UTIL_H_

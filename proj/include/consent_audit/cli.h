#ifndef CONSENT_AUDIT_CLI_H_
#define CONSENT_AUDIT_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace consent_audit {

// Exit codes of the audit subcommand.
inline constexpr int kExitClean = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitViolations = 2;
inline constexpr int kExitInconclusive = 3;

// Runs the consent-audit command line. |args| excludes the program name.
// Machine output goes to |out|, diagnostics to |err|.
int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace consent_audit

#endif  // CONSENT_AUDIT_CLI_H_

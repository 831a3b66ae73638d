#ifndef CONSENT_AUDIT_AUDIT_H_
#define CONSENT_AUDIT_AUDIT_H_

// Corpus-level audit: load one directory per site, run every checker, and
// assemble the report. The serial runner is the reference the OpenMP runner
// is tested against.

#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "consent_audit/checks.h"
#include "consent_audit/config.h"
#include "consent_audit/report.h"
#include "consent_audit/session.h"

namespace consent_audit {

inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr std::string_view kSessionSuffix = ".session.json";

// One subdirectory per site holding "<scenario>.session.json" files. Sites
// and files are visited in name order. Throws Error naming the bad file.
std::vector<SiteCapture> LoadCorpus(const std::filesystem::path& dir,
                                    const ParseOptions& options = {});

SiteResult AuditSite(const SiteCapture& site, const AuditContext& ctx);

std::vector<SiteResult> AuditCorpusSerial(std::span<const SiteCapture> sites,
                                          const AuditContext& ctx);
// Same result as the serial runner, sites distributed over |jobs| threads
// (0: OpenMP default).
std::vector<SiteResult> AuditCorpusParallel(std::span<const SiteCapture> sites,
                                            const AuditContext& ctx, int jobs = 0);

AuditReport AssembleReport(std::vector<SiteResult> sites, const LoadedAudit& inputs,
                           UtcTime generated_at);

// Writes |bytes| to a temporary sibling and renames it over |path|.
void WriteFileAtomic(const std::filesystem::path& path, std::string_view bytes);

}  // namespace consent_audit

#endif  // CONSENT_AUDIT_AUDIT_H_

#include "consent_audit/audit.h"

#include <omp.h>

#include <algorithm>
#include <exception>
#include <fstream>

#include "consent_audit/errors.h"
#include "consent_audit/url.h"

namespace consent_audit {

namespace fs = std::filesystem;

std::vector<SiteCapture> LoadCorpus(const fs::path& dir, const ParseOptions& options) {
  if (!fs::is_directory(dir)) throw Error("not a directory: " + dir.string());
  std::vector<fs::path> site_dirs;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_directory()) site_dirs.push_back(entry.path());
  }
  std::sort(site_dirs.begin(), site_dirs.end());

  std::vector<SiteCapture> sites;
  for (const auto& site_dir : site_dirs) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(site_dir)) {
      if (entry.is_regular_file() && entry.path().filename().string().ends_with(kSessionSuffix)) {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
    SiteCapture site;
    site.site_id = site_dir.filename().string();
    if (files.empty()) throw Error("no " + std::string(kSessionSuffix) + " files in " + site_dir.string());
    for (const auto& file : files) {
      std::string name = site.site_id + "/" + file.filename().string();
      CapturedSession s;
      try {
        s = ParseSession(ReadFile(file), options);
      } catch (const Error& e) {
        throw Error(name + ": " + e.what());
      }
      s.source_name = name;
      if (site.site_url.empty()) {
        site.site_url = s.site_url;
      } else if (HostOfUrl(site.site_url) != HostOfUrl(s.site_url)) {
        throw Error(name + ": site_url " + s.site_url + " differs from " + site.site_url);
      }
      site.sessions.push_back(std::move(s));
    }
    sites.push_back(std::move(site));
  }
  return sites;
}

SiteResult AuditSite(const SiteCapture& site, const AuditContext& ctx) {
  return BuildSiteResult(site.site_id, site.site_url, ctx.lifespan_profile.name,
                         RunAll(site, ctx), LifespanFindings(site, ctx));
}

std::vector<SiteResult> AuditCorpusSerial(std::span<const SiteCapture> sites,
                                          const AuditContext& ctx) {
  std::vector<SiteResult> out;
  out.reserve(sites.size());
  for (const auto& s : sites) out.push_back(AuditSite(s, ctx));
  return out;
}

std::vector<SiteResult> AuditCorpusParallel(std::span<const SiteCapture> sites,
                                            const AuditContext& ctx, int jobs) {
  std::vector<SiteResult> out(sites.size());
  std::vector<std::exception_ptr> errors(sites.size());
  const auto n = static_cast<std::ptrdiff_t>(sites.size());
  int threads = jobs > 0 ? jobs : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      out[i] = AuditSite(sites[i], ctx);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

AuditReport AssembleReport(std::vector<SiteResult> sites, const LoadedAudit& inputs,
                           UtcTime generated_at) {
  AuditReport r;
  r.sites = std::move(sites);
  r.tool_version = std::string(kToolVersion);
  r.config_digest = inputs.config_digest;
  r.generated_at = generated_at;
  r.dpa_positioning = inputs.dpa_positioning;
  r.limitations = DefaultLimitations();
  return r;
}

void WriteFileAtomic(const fs::path& path, std::string_view bytes) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw Error("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error("cannot rename " + tmp.string() + ": " + ec.message());
}

}  // namespace consent_audit

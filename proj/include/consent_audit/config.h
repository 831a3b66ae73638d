#ifndef CONSENT_AUDIT_CONFIG_H_
#define CONSENT_AUDIT_CONFIG_H_

// Audit configuration file (TOML subset, see docs/config.md) and loading of
// every data file it references.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "consent_audit/checks.h"

namespace consent_audit {

inline constexpr std::string_view kConfigEnvVar = "CONSENT_AUDIT_CONFIG";

struct AuditConfig {
  std::filesystem::path source;  // config file; empty when parsed from text
  std::string source_text;
  std::string dpa_profile = "cnil";
  CheckConfig checks;
  // Relative paths are resolved against the config file's directory.
  std::filesystem::path tracker_list;
  std::filesystem::path public_suffix;
  std::filesystem::path selector_rules;
  std::filesystem::path lexicon;
  std::filesystem::path manifest;
  std::filesystem::path dpa_matrix;
};

// Throws ConfigError naming the line for syntax errors, unknown keys and
// out-of-range values.
AuditConfig ParseAuditConfig(std::string_view text, const std::filesystem::path& base_dir);
AuditConfig LoadAuditConfig(const std::filesystem::path& file);

// The config path to use: $CONSENT_AUDIT_CONFIG when set, else |flag|.
std::optional<std::filesystem::path> ResolveConfigPath(
    const std::optional<std::filesystem::path>& flag);

struct LoadedAudit {
  AuditContext context;
  nlohmann::json dpa_positioning;
  // "sha256:<hex>" over the config text and every referenced file.
  std::string config_digest;
};

// Reads and parses every referenced file. Any failure is a ConfigError that
// names the file.
LoadedAudit LoadAuditInputs(const AuditConfig& config);

std::string Sha256Hex(std::string_view bytes);

std::string ReadFile(const std::filesystem::path& path);

}  // namespace consent_audit

#endif  // CONSENT_AUDIT_CONFIG_H_

#include "consent_audit/config.h"

#include <openssl/evp.h>

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <variant>
#include <vector>

#include "consent_audit/errors.h"

namespace consent_audit {
namespace {

namespace fs = std::filesystem;

using Value = std::variant<std::string, std::int64_t, double, bool, std::vector<std::string>>;

[[noreturn]] void Fail(int line, const std::string& detail) {
  throw ConfigError("config line " + std::to_string(line) + ": " + detail);
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Reads a basic string starting at the opening quote; advances |s| past
// the closing quote.
std::string ParseQuoted(std::string_view& s, int line) {
  std::string out;
  std::size_t i = 1;
  for (; i < s.size(); ++i) {
    char c = s[i];
    if (c == '"') break;
    if (c != '\\') {
      out += c;
      continue;
    }
    if (++i == s.size()) Fail(line, "unterminated escape");
    switch (s[i]) {
      case '"': out += '"'; break;
      case '\\': out += '\\'; break;
      case 'n': out += '\n'; break;
      case 't': out += '\t'; break;
      default: Fail(line, "unsupported escape");
    }
  }
  if (i >= s.size()) Fail(line, "unterminated string");
  s.remove_prefix(i + 1);
  return out;
}

// Drops a trailing '#' comment that is not inside a string.
std::string_view StripComment(std::string_view s) {
  bool in_string = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && in_string) {
      ++i;
    } else if (s[i] == '"') {
      in_string = !in_string;
    } else if (s[i] == '#' && !in_string) {
      return s.substr(0, i);
    }
  }
  return s;
}

Value ParseValue(std::string_view s, int line) {
  s = Trim(s);
  if (s.empty()) Fail(line, "missing value");
  if (s.front() == '"') {
    std::string v = ParseQuoted(s, line);
    if (!Trim(s).empty()) Fail(line, "trailing characters after string");
    return v;
  }
  if (s.front() == '[') {
    std::vector<std::string> items;
    s.remove_prefix(1);
    while (true) {
      s = Trim(s);
      if (s.empty()) Fail(line, "unterminated array");
      if (s.front() == ']') {
        s.remove_prefix(1);
        break;
      }
      if (s.front() != '"') Fail(line, "arrays may only hold strings");
      items.push_back(ParseQuoted(s, line));
      s = Trim(s);
      if (!s.empty() && s.front() == ',') s.remove_prefix(1);
    }
    if (!Trim(s).empty()) Fail(line, "trailing characters after array");
    return items;
  }
  if (s == "true") return true;
  if (s == "false") return false;
  std::int64_t i = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), i);
  if (ec == std::errc() && p == s.data() + s.size()) return i;
  double d = 0;
  auto [pd, ecd] = std::from_chars(s.data(), s.data() + s.size(), d);
  if (ecd == std::errc() && pd == s.data() + s.size()) return d;
  Fail(line, "cannot parse value '" + std::string(s) + "'");
}

struct Entry {
  Value value;
  int line;
};

double AsDouble(const Entry& e, std::string_view key) {
  if (const auto* d = std::get_if<double>(&e.value)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&e.value)) return static_cast<double>(*i);
  Fail(e.line, std::string(key) + " must be a number");
}

std::int64_t AsInt(const Entry& e, std::string_view key) {
  if (const auto* i = std::get_if<std::int64_t>(&e.value)) return *i;
  Fail(e.line, std::string(key) + " must be an integer");
}

bool AsBool(const Entry& e, std::string_view key) {
  if (const auto* b = std::get_if<bool>(&e.value)) return *b;
  Fail(e.line, std::string(key) + " must be true or false");
}

std::string AsString(const Entry& e, std::string_view key) {
  if (const auto* s = std::get_if<std::string>(&e.value)) return *s;
  Fail(e.line, std::string(key) + " must be a string");
}

std::vector<std::string> AsStrings(const Entry& e, std::string_view key) {
  if (const auto* v = std::get_if<std::vector<std::string>>(&e.value)) return *v;
  Fail(e.line, std::string(key) + " must be an array of strings");
}

std::string ToHex(const unsigned char* data, std::size_t n) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    out += kDigits[data[i] >> 4];
    out += kDigits[data[i] & 0xF];
  }
  return out;
}

template <typename T>
T ParseDataFile(const fs::path& path, std::string_view what, T (*parse)(std::string_view),
                std::string& digest_input) {
  std::string text;
  try {
    text = ReadFile(path);
  } catch (const Error& e) {
    throw ConfigError(std::string(what) + ": " + e.what());
  }
  digest_input += std::string(what) + '\0' + Sha256Hex(text) + '\n';
  try {
    return parse(text);
  } catch (const Error& e) {
    throw ConfigError(std::string(what) + " " + path.string() + ": " + e.what());
  }
}

nlohmann::json ParseJsonText(std::string_view text) { return nlohmann::json::parse(text); }

}  // namespace

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string Sha256Hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 failed");
  }
  return ToHex(md, len);
}

AuditConfig ParseAuditConfig(std::string_view text, const fs::path& base_dir) {
  std::map<std::string, Entry> entries;
  std::string section;
  int line_no = 0;
  std::string_view rest = text;
  while (!rest.empty()) {
    ++line_no;
    auto nl = rest.find('\n');
    std::string_view line = Trim(StripComment(rest.substr(0, nl)));
    rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') Fail(line_no, "bad section header");
      section = std::string(Trim(line.substr(1, line.size() - 2)));
      if (section != "audit" && section != "identifier" && section != "paths" &&
          section != "consent") {
        Fail(line_no, "unknown section [" + section + "]");
      }
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string_view::npos) Fail(line_no, "expected key = value");
    std::string key(Trim(line.substr(0, eq)));
    if (key.empty()) Fail(line_no, "empty key");
    if (section.empty()) Fail(line_no, "key outside a section");
    std::string full = section + "." + key;
    if (entries.count(full) != 0) Fail(line_no, "duplicate key " + full);
    entries.emplace(full, Entry{ParseValue(line.substr(eq + 1), line_no), line_no});
  }

  AuditConfig cfg;
  cfg.source_text = std::string(text);
  auto& id = cfg.checks.identifier;
  auto path_of = [&](const Entry& e, std::string_view key) {
    fs::path p = AsString(e, key);
    return p.is_absolute() ? p : base_dir / p;
  };
  std::map<std::string, fs::path*> paths = {
      {"paths.tracker_list", &cfg.tracker_list},     {"paths.public_suffix", &cfg.public_suffix},
      {"paths.selector_rules", &cfg.selector_rules}, {"paths.lexicon", &cfg.lexicon},
      {"paths.manifest", &cfg.manifest},             {"paths.dpa_matrix", &cfg.dpa_matrix},
  };
  for (const auto& [key, e] : entries) {
    if (auto it = paths.find(key); it != paths.end()) {
      *it->second = path_of(e, key);
    } else if (key == "audit.dpa_profile") {
      cfg.dpa_profile = AsString(e, key);
    } else if (key == "audit.strict_unknown") {
      cfg.checks.strict_unknown = AsBool(e, key);
    } else if (key == "audit.wall_area_threshold") {
      cfg.checks.wall_area_threshold = AsDouble(e, key);
      if (!(cfg.checks.wall_area_threshold > 0 && cfg.checks.wall_area_threshold <= 1)) {
        Fail(e.line, "wall_area_threshold must be in (0, 1]");
      }
    } else if (key == "identifier.min_length") {
      auto v = AsInt(e, key);
      if (v < 1) Fail(e.line, "min_length must be positive");
      id.min_length = static_cast<std::size_t>(v);
    } else if (key == "identifier.min_entropy") {
      id.min_entropy = AsDouble(e, key);
    } else if (key == "identifier.min_lifespan_days") {
      id.min_lifespan_days = AsInt(e, key);
    } else if (key == "identifier.weight_length") {
      id.weight_length = AsDouble(e, key);
    } else if (key == "identifier.weight_entropy") {
      id.weight_entropy = AsDouble(e, key);
    } else if (key == "identifier.weight_lifespan") {
      id.weight_lifespan = AsDouble(e, key);
    } else if (key == "identifier.threshold") {
      id.threshold = AsDouble(e, key);
    } else if (key == "identifier.identical_twin_cap") {
      id.identical_twin_cap = AsDouble(e, key);
    } else if (key == "consent.storage_names") {
      cfg.checks.consent_storage_names = AsStrings(e, key);
    } else {
      Fail(e.line, "unknown key " + key);
    }
  }
  for (const auto& [key, p] : paths) {
    if (p->empty()) throw ConfigError("config: missing " + key);
  }
  id.Validate();
  if (!LifespanProfile::Builtin(cfg.dpa_profile)) {
    throw ConfigError("config: unknown dpa_profile '" + cfg.dpa_profile + "'");
  }
  return cfg;
}

AuditConfig LoadAuditConfig(const fs::path& file) {
  std::string text;
  try {
    text = ReadFile(file);
  } catch (const Error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  auto cfg = ParseAuditConfig(text, file.parent_path());
  cfg.source = file;
  return cfg;
}

std::optional<fs::path> ResolveConfigPath(const std::optional<fs::path>& flag) {
  if (const char* env = std::getenv(std::string(kConfigEnvVar).c_str()); env && *env) {
    return fs::path(env);
  }
  return flag;
}

LoadedAudit LoadAuditInputs(const AuditConfig& config) {
  config.checks.identifier.Validate();
  auto profile = LifespanProfile::Builtin(config.dpa_profile);
  if (!profile) throw ConfigError("unknown dpa_profile '" + config.dpa_profile + "'");

  // The digest covers the effective profile, so --profile changes it.
  std::string digest_input = config.source_text + '\0' + profile->name + '\n';
  LoadedAudit out{
      AuditContext{
          ParseDataFile<PublicSuffixList>(config.public_suffix, "public_suffix",
                                          &PublicSuffixList::Parse, digest_input),
          ParseDataFile<CookieManifest>(config.manifest, "manifest", &CookieManifest::Parse,
                                        digest_input),
          ParseDataFile<TrackerList>(config.tracker_list, "tracker_list", &TrackerList::Parse,
                                     digest_input),
          ParseDataFile<SelectorRules>(config.selector_rules, "selector_rules",
                                       &SelectorRules::Parse, digest_input),
          ParseDataFile<Lexicon>(config.lexicon, "lexicon", &Lexicon::Parse, digest_input),
          *profile,
          config.checks,
      },
      {},
      {}};
  try {
    out.dpa_positioning = ParseDataFile<nlohmann::json>(config.dpa_matrix, "dpa_matrix",
                                                        &ParseJsonText, digest_input);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("dpa_matrix: " + std::string(e.what()));
  }
  if (!out.dpa_positioning.is_object()) throw ConfigError("dpa_matrix: expected a JSON object");
  out.config_digest = "sha256:" + Sha256Hex(digest_input);
  return out;
}

}  // namespace consent_audit

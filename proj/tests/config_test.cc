#include "consent_audit/config.h"

#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>

#include "consent_audit/errors.h"
#include "test_support.h"

namespace consent_audit {
namespace {

using ::testing::HasSubstr;

std::string DefaultText() { return ReadFile(test::ConfigFile()); }

std::string Replace(std::string text, const std::string& from, const std::string& to) {
  auto pos = text.find(from);
  EXPECT_NE(pos, std::string::npos) << from;
  return text.replace(pos, from.size(), to);
}

std::string ErrorOf(const std::string& text) {
  try {
    ParseAuditConfig(text, test::ConfigFile().parent_path());
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST(AuditConfig, DefaultFileParses) {
  auto cfg = LoadAuditConfig(test::ConfigFile());
  EXPECT_EQ(cfg.dpa_profile, "cnil");
  EXPECT_EQ(cfg.checks.identifier.min_length, 8u);
  EXPECT_DOUBLE_EQ(cfg.checks.identifier.threshold, 0.5);
  EXPECT_DOUBLE_EQ(cfg.checks.wall_area_threshold, 0.5);
  EXPECT_FALSE(cfg.checks.strict_unknown);
  EXPECT_THAT(cfg.checks.consent_storage_names, ::testing::Contains("OptanonConsent"));
  EXPECT_TRUE(std::filesystem::exists(cfg.manifest)) << cfg.manifest;
  EXPECT_EQ(cfg.source, test::ConfigFile());
}

TEST(AuditConfig, ErrorsNameTheLine) {
  const std::string base = DefaultText();
  EXPECT_THAT(ErrorOf(Replace(base, "min_length = 8", "min_length = 0")),
              HasSubstr("config line 9: min_length"));
  EXPECT_THAT(ErrorOf(Replace(base, "min_length = 8", "min_length = \"8\"")),
              HasSubstr("must be an integer"));
  EXPECT_THAT(ErrorOf(Replace(base, "strict_unknown = false", "strict = false")),
              HasSubstr("config line 5: unknown key audit.strict"));
  EXPECT_THAT(ErrorOf(Replace(base, "[paths]", "[path]")), HasSubstr("unknown section [path]"));
  EXPECT_THAT(ErrorOf(Replace(base, "wall_area_threshold = 0.5", "wall_area_threshold = 1.5")),
              HasSubstr("wall_area_threshold"));
  EXPECT_THAT(ErrorOf(Replace(base, "\nthreshold = 0.5\n", "\nthreshold = 0.5\nthreshold = 0.6\n")),
              HasSubstr("duplicate key identifier.threshold"));
  EXPECT_THAT(ErrorOf("x = 1\n"), HasSubstr("config line 1: key outside a section"));
  EXPECT_THAT(ErrorOf("[audit]\nnot a pair\n"), HasSubstr("config line 2: expected key = value"));
  EXPECT_THAT(ErrorOf("[audit]\ndpa_profile = \"cnil\n"), HasSubstr("unterminated string"));
  EXPECT_THAT(ErrorOf("[consent]\nstorage_names = [1]\n"), HasSubstr("arrays may only hold strings"));
}

TEST(AuditConfig, SemanticErrors) {
  const std::string base = DefaultText();
  EXPECT_THAT(ErrorOf(Replace(base, "weight_length = 0.3", "weight_length = 0.5")),
              HasSubstr("weights must sum to 1"));
  EXPECT_THAT(ErrorOf(Replace(base, "dpa_profile = \"cnil\"", "dpa_profile = \"atlantis\"")),
              HasSubstr("unknown dpa_profile 'atlantis'"));
  EXPECT_THAT(ErrorOf(Replace(base, "manifest = \"../data/manifest.json\"\n", "")),
              HasSubstr("missing paths.manifest"));
}

TEST(AuditConfig, CommentsAndEscapes) {
  auto cfg = ParseAuditConfig(Replace(DefaultText(), "\"OptanonConsent\"", "\"a#b\\\"c\""),
                              test::ConfigFile().parent_path());
  EXPECT_EQ(cfg.checks.consent_storage_names.front(), "a#b\"c");
}

TEST(AuditConfig, MissingFileIsConfigError) {
  EXPECT_THROW(LoadAuditConfig("/nonexistent/audit.toml"), ConfigError);
}

TEST(AuditConfig, EnvironmentOverridesFlag) {
  ::unsetenv(std::string(kConfigEnvVar).c_str());
  EXPECT_EQ(ResolveConfigPath(std::nullopt), std::nullopt);
  EXPECT_EQ(ResolveConfigPath(std::filesystem::path("a.toml")), std::filesystem::path("a.toml"));
  ::setenv(std::string(kConfigEnvVar).c_str(), "/etc/b.toml", 1);
  EXPECT_EQ(ResolveConfigPath(std::filesystem::path("a.toml")), std::filesystem::path("/etc/b.toml"));
  ::unsetenv(std::string(kConfigEnvVar).c_str());
}

TEST(Sha256, KnownVectors) {
  EXPECT_EQ(Sha256Hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(Sha256Hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(LoadedAudit, DigestTracksEveryInput) {
  auto cfg = LoadAuditConfig(test::ConfigFile());
  const auto base = LoadAuditInputs(cfg).config_digest;
  EXPECT_THAT(base, ::testing::StartsWith("sha256:"));
  EXPECT_EQ(base.size(), 7u + 64u);
  EXPECT_EQ(LoadAuditInputs(cfg).config_digest, base);

  auto irish = cfg;
  irish.dpa_profile = "irish";
  EXPECT_NE(LoadAuditInputs(irish).config_digest, base);

  test::TempDir dir;
  auto copy = dir.path() / "trackers.txt";
  std::filesystem::copy_file(cfg.tracker_list, copy);
  { std::ofstream(copy, std::ios::app) << "\n# edited\n"; }
  auto edited = cfg;
  edited.tracker_list = copy;
  EXPECT_NE(LoadAuditInputs(edited).config_digest, base);
}

TEST(LoadedAudit, BadDataFileNamesIt) {
  auto cfg = LoadAuditConfig(test::ConfigFile());
  test::TempDir dir;
  auto bad = dir.path() / "manifest.json";
  { std::ofstream(bad) << "{ not json"; }
  cfg.manifest = bad;
  try {
    LoadAuditInputs(cfg);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_THAT(e.what(), HasSubstr("manifest"));
  }
  cfg = LoadAuditConfig(test::ConfigFile());
  cfg.lexicon = dir.path() / "missing.txt";
  EXPECT_THROW(LoadAuditInputs(cfg), ConfigError);
}

}  // namespace
}  // namespace consent_audit

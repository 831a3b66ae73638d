#ifndef CONSENT_AUDIT_SYNTH_H_
#define CONSENT_AUDIT_SYNTH_H_

// Synthetic capture corpus with planted violations. The plant list is the
// ground truth the audit must reproduce.

#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "consent_audit/session.h"

namespace consent_audit {

enum class Plant { kClean, kR1, kR2, kR11, kR14, kR15, kR20Wall };

std::string_view ToToken(Plant p);  // "R20-wall"
std::optional<Plant> PlantFromToken(std::string_view token);
const std::vector<Plant>& AllPlants();

// "R1,R2+R11,clean": commas separate sites, '+' combines plants in one site.
// Throws ConfigError on an unknown token.
std::vector<std::vector<Plant>> ParsePlantSpec(std::string_view spec);

// Requirement numbers that must come out as violations.
std::set<int> ExpectedViolations(std::span<const Plant> plants);

struct SynthSite {
  std::string site_id;
  std::string site_url;
  std::vector<Plant> plants;
  // no_action, close_banner, scroll, accept_all, reject_all
  std::vector<CapturedSession> sessions;
};

// Deterministic for a given (plants, index).
SynthSite SynthesizeSite(std::span<const Plant> plants, int index);

// Writes <out>/<site_id>/<scenario>.session.json for every site.
void WriteSynthCorpus(const std::filesystem::path& out, std::span<const SynthSite> sites);

}  // namespace consent_audit

#endif  // CONSENT_AUDIT_SYNTH_H_

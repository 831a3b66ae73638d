#include "consent_audit/cli.h"

#include <csignal>
#include <iostream>
#include <optional>
#include <thread>

#include <CLI11.hpp>

#include "consent_audit/audit.h"
#include "consent_audit/config.h"
#include "consent_audit/errors.h"
#include "consent_audit/review.h"
#include "consent_audit/synth.h"
#include "consent_audit/tcf.h"
#include "consent_audit/tcf_json.h"

namespace consent_audit {
namespace {

namespace fs = std::filesystem;

struct AuditArgs {
  std::string sessions;
  std::string config;
  std::string out;
  std::string markdown;
  std::string profile;
  int jobs = 0;
  bool allow_incomplete = false;
};

int CmdAudit(const AuditArgs& a, std::ostream& err) {
  auto config_path = ResolveConfigPath(a.config.empty() ? std::nullopt
                                                        : std::optional<fs::path>(a.config));
  if (!config_path) {
    throw ConfigError("no config: pass --config or set " + std::string(kConfigEnvVar));
  }
  AuditConfig config = LoadAuditConfig(*config_path);
  if (!a.profile.empty()) {
    if (!LifespanProfile::Builtin(a.profile)) {
      throw ConfigError("unknown profile '" + a.profile + "'");
    }
    config.dpa_profile = a.profile;
  }
  LoadedAudit inputs = LoadAuditInputs(config);
  ParseOptions parse;
  parse.reject_incomplete = !a.allow_incomplete;
  auto corpus = LoadCorpus(a.sessions, parse);
  int jobs = a.jobs > 0 ? a.jobs : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  auto sites = AuditCorpusParallel(corpus, inputs.context, jobs);
  auto now = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
  AuditReport report = AssembleReport(std::move(sites), inputs, now);
  WriteFileAtomic(a.out, RenderJson(report));
  if (!a.markdown.empty()) WriteFileAtomic(a.markdown, RenderMarkdown(report));
  int code = ExitCodeFor(report);
  const nlohmann::json summary = Summary(report);
  const auto& by_outcome = summary["by_outcome"];
  err << "audited " << report.sites.size() << " site(s): " << by_outcome["violation"]
      << " violation, " << by_outcome["inconclusive"] << " inconclusive, "
      << by_outcome["manual_pending"].get<int>() + by_outcome["user_study_pending"].get<int>()
      << " pending\n";
  return code;
}

int CmdDecodeTcf(const std::string& text, std::ostream& out, std::ostream& err) {
  try {
    out << tcf::ToJson(tcf::DecodeTcf(text)).dump(2) << "\n";
    return kExitClean;
  } catch (const tcf::DecodeError& e) {
    err << "consent-audit: cannot decode (" << tcf::ToString(e.kind()) << " at " << e.offset()
        << "): " << e.what() << "\n";
    return kExitError;
  }
}

int CmdSynth(const std::string& spec, const std::string& out_dir, std::ostream& out) {
  auto plan = ParsePlantSpec(spec);
  std::vector<SynthSite> sites;
  for (std::size_t i = 0; i < plan.size(); ++i) {
    sites.push_back(SynthesizeSite(plan[i], static_cast<int>(i) + 1));
  }
  WriteSynthCorpus(out_dir, sites);
  nlohmann::json truth = nlohmann::json::array();
  for (const auto& s : sites) {
    nlohmann::json plants = nlohmann::json::array();
    for (auto p : s.plants) plants.push_back(ToToken(p));
    nlohmann::json expected = nlohmann::json::array();
    for (int r : ExpectedViolations(s.plants)) expected.push_back("R" + std::to_string(r));
    truth.push_back({{"site_id", s.site_id}, {"plants", plants}, {"expected_violations", expected}});
  }
  WriteFileAtomic(fs::path(out_dir) / "ground_truth.json", truth.dump(2) + "\n");
  out << truth.dump(2) << "\n";
  return kExitClean;
}

int CmdServe(const std::string& store_dir, const std::string& bind, const std::string& seed,
             const ServerOptions& options, std::ostream& err) {
  auto colon = bind.rfind(':');
  if (colon == std::string::npos) throw ConfigError("--bind expects HOST:PORT");
  std::string host = bind.substr(0, colon);
  int port = 0;
  try {
    port = std::stoi(bind.substr(colon + 1));
  } catch (const std::exception&) {
    throw ConfigError("--bind: bad port");
  }
  if (!seed.empty()) ReviewStore::Initialize(store_dir, ParseReport(ReadFile(seed)));
  ReviewStore store(store_dir);

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  ReviewServer server(store, options);
  int bound = server.Bind(host, port);
  if (bound < 0) {
    err << "consent-audit: cannot bind " << bind << "\n";
    return kExitError;
  }
  err << "serving " << store_dir << " on " << host << ":" << bound << "\n";
  std::thread listener([&] { server.Listen(); });
  int sig = 0;
  sigwait(&signals, &sig);
  server.Stop();
  listener.join();
  return kExitClean;
}

int CmdRender(const std::string& report_path, const std::string& format, std::ostream& out) {
  auto report = ParseReport(ReadFile(report_path));
  out << (format == "markdown" ? RenderMarkdown(report) : RenderJson(report));
  return kExitClean;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cookie-consent audit engine", "consent-audit"};
  app.require_subcommand(1);

  AuditArgs audit_args;
  auto* audit = app.add_subcommand("audit", "Audit a directory of captured sessions");
  audit->add_option("--sessions", audit_args.sessions, "One subdirectory per site")
      ->required()
      ->check(CLI::ExistingDirectory);
  audit->add_option("--config", audit_args.config, "Config file (overridden by $" +
                                                       std::string(kConfigEnvVar) + ")");
  audit->add_option("--out", audit_args.out, "Report JSON output")->required();
  audit->add_option("--markdown", audit_args.markdown, "Also write a markdown rendering");
  audit->add_option("--jobs", audit_args.jobs, "Parallel sites (default: logical CPUs)")
      ->check(CLI::NonNegativeNumber);
  audit->add_option("--profile", audit_args.profile, "Lifespan profile: cnil, spanish, danish, irish");
  audit->add_flag("--allow-incomplete", audit_args.allow_incomplete,
                  "Accept sessions flagged incomplete by the capture driver");

  std::string tcf_string;
  auto* decode = app.add_subcommand("decode-tcf", "Decode a TCF consent string");
  decode->add_option("string", tcf_string)->required();

  std::string plant_spec, synth_out;
  auto* synth = app.add_subcommand("synth", "Write a synthetic corpus with planted violations");
  synth->add_option("--plant", plant_spec, "e.g. R1,R2+R11,clean")->required();
  synth->add_option("--out", synth_out)->required();

  std::string store_dir, bind = "127.0.0.1:8080", seed;
  ServerOptions server_options;
  std::string console_assets;
  auto* serve = app.add_subcommand("serve", "Serve the review API");
  serve->add_option("--store", store_dir)->required();
  serve->add_option("--bind", bind, "HOST:PORT")->capture_default_str();
  serve->add_option("--report", seed, "Initialize the store from this report")
      ->check(CLI::ExistingFile);
  serve->add_option("--allow-origin", server_options.allow_origin, "CORS origin of the console");
  serve->add_option("--assets", console_assets, "Console static files")->check(CLI::ExistingDirectory);

  std::string render_in, render_format = "markdown";
  auto* render = app.add_subcommand("render", "Render a report file");
  render->add_option("--report", render_in)->required()->check(CLI::ExistingFile);
  render->add_option("--format", render_format)
      ->check(CLI::IsMember({"json", "markdown"}))
      ->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitClean;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitClean;
  } catch (const CLI::ParseError& e) {
    err << "consent-audit: " << e.what() << "\n";
    return kExitError;
  }

  try {
    if (*audit) return CmdAudit(audit_args, err);
    if (*decode) return CmdDecodeTcf(tcf_string, out, err);
    if (*synth) return CmdSynth(plant_spec, synth_out, out);
    if (*serve) {
      server_options.console_assets = console_assets;
      return CmdServe(store_dir, bind, seed, server_options, err);
    }
    if (*render) return CmdRender(render_in, render_format, out);
  } catch (const std::exception& e) {
    err << "consent-audit: error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

}  // namespace consent_audit

#include "consent_audit/review.h"

#include <fcntl.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstring>
#include <fstream>

#include <httplib.h>

#include "consent_audit/audit.h"
#include "consent_audit/errors.h"
#include "consent_audit/requirements.h"

namespace consent_audit {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void WriteAll(int fd, std::string_view bytes) {
  while (!bytes.empty()) {
    ssize_t n = ::write(fd, bytes.data(), bytes.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(std::string("answer log write failed: ") + std::strerror(errno));
    }
    bytes.remove_prefix(static_cast<std::size_t>(n));
  }
}

void SendJson(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(2) + "\n", "application/json");
}

void SendError(httplib::Response& res, int status, const std::string& message) {
  SendJson(res, status, {{"error", message}});
}

std::string ContentTypeFor(const fs::path& p) {
  auto ext = p.extension().string();
  if (ext == ".png") return "image/png";
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  if (ext == ".webp") return "image/webp";
  if (ext == ".html") return "text/html";
  if (ext == ".json") return "application/json";
  return "application/octet-stream";
}

// Relative path with no ".." or root components.
bool IsContainedPath(const fs::path& p) {
  if (p.empty() || p.is_absolute()) return false;
  for (const auto& part : p) {
    if (part == ".." || part == ".") return false;
  }
  return true;
}

json SiteListEntry(const SiteResult& site) {
  int pending = 0, violations = 0;
  for (const auto& v : site.verdicts) {
    pending += v.outcome == Outcome::kManualPending || v.outcome == Outcome::kUserStudyPending;
    violations += v.outcome == Outcome::kViolation;
  }
  return {{"site_id", site.site_id},
          {"url", site.url},
          {"pending_count", pending},
          {"violation_count", violations}};
}

json Checklist(const SiteResult& site) {
  json out = json::array();
  for (const auto& v : site.verdicts) {
    const auto& info = Requirement(v.requirement);
    out.push_back({{"requirement", info.id},
                   {"title", info.title},
                   {"group", ToToken(info.group)},
                   {"assessment", ToString(info.assessment)},
                   {"prompt", info.checklist_prompt},
                   {"violation_hint", info.violation_hint},
                   {"answerable", AcceptsAnswers(v.automated_outcome)},
                   {"proxy", v.automated_outcome == Outcome::kUserStudyPending}});
  }
  return out;
}

}  // namespace

AuditReport ReplayAnswers(AuditReport base, std::span<const ManualAnswer> answers) {
  for (const auto& a : answers) ApplyAnswer(base, a);
  return base;
}

std::vector<ManualAnswer> ReadAnswerLog(const fs::path& path) {
  std::vector<ManualAnswer> out;
  if (!fs::exists(path)) return out;
  std::string text = ReadFile(path);
  int line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    ++line_no;
    auto nl = text.find('\n', pos);
    bool complete = nl != std::string::npos;
    std::string_view line(text.data() + pos, (complete ? nl : text.size()) - pos);
    pos = complete ? nl + 1 : text.size();
    if (line.empty()) continue;
    if (!complete) break;  // torn final write, never acknowledged
    try {
      out.push_back(ParseManualAnswer(json::parse(line)));
    } catch (const std::exception& e) {
      throw ParseError(line_no, std::string("answer log: ") + e.what());
    }
  }
  return out;
}

void ReviewStore::Initialize(const fs::path& root, const AuditReport& base) {
  fs::create_directories(root / "assets");
  WriteFileAtomic(root / "report.json", RenderJson(base));
  WriteFileAtomic(root / "answers.log", "");
}

ReviewStore::ReviewStore(fs::path root) : root_(std::move(root)) {
  fs::create_directories(assets_dir());
  AuditReport base;
  if (fs::exists(report_path())) {
    base = ParseReport(ReadFile(report_path()));
  } else {
    base.tool_version = std::string(kToolVersion);
    base.limitations = DefaultLimitations();
    WriteFileAtomic(report_path(), RenderJson(base));
  }
  auto answers = ReadAnswerLog(log_path());
  // Drop a torn final line so the next append starts on a fresh line.
  if (fs::exists(log_path())) {
    std::string text = ReadFile(log_path());
    if (!text.empty() && text.back() != '\n') {
      auto nl = text.rfind('\n');
      fs::resize_file(log_path(), nl == std::string::npos ? 0 : nl + 1);
    }
  }
  current_ = std::make_shared<const AuditReport>(ReplayAnswers(std::move(base), answers));
  log_fd_ = ::open(log_path().c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
  if (log_fd_ < 0) {
    throw Error("cannot open " + log_path().string() + ": " + std::strerror(errno));
  }
}

ReviewStore::~ReviewStore() {
  if (log_fd_ >= 0) ::close(log_fd_);
}

std::shared_ptr<const AuditReport> ReviewStore::Snapshot() const {
  return std::atomic_load(&current_);
}

Verdict ReviewStore::Submit(const ManualAnswer& answer) {
  std::lock_guard lock(write_mu_);
  auto next = std::make_shared<AuditReport>(*std::atomic_load(&current_));
  ApplyAnswer(*next, answer);
  WriteAll(log_fd_, ManualAnswerToJson(answer).dump() + "\n");
  if (::fsync(log_fd_) != 0) {
    throw Error(std::string("answer log fsync failed: ") + std::strerror(errno));
  }
  const SiteResult* site = next->FindSite(answer.site_id);
  Verdict v = site->verdicts[answer.requirement - 1];
  std::atomic_store(&current_, std::shared_ptr<const AuditReport>(std::move(next)));
  return v;
}

ReviewServer::ReviewServer(ReviewStore& store, ServerOptions options)
    : store_(store), options_(std::move(options)), server_(std::make_unique<httplib::Server>()) {
  Routes();
}

ReviewServer::~ReviewServer() { Stop(); }

int ReviewServer::Bind(const std::string& host, int port) {
  if (port == 0) return server_->bind_to_any_port(host);
  return server_->bind_to_port(host, port) ? port : -1;
}

bool ReviewServer::Listen() { return server_->listen_after_bind(); }

void ReviewServer::Stop() {
  if (server_ && server_->is_running()) server_->stop();
}

void ReviewServer::WaitUntilReady() const { server_->wait_until_ready(); }

void ReviewServer::Routes() {
  auto& srv = *server_;
  if (!options_.allow_origin.empty()) {
    srv.set_post_routing_handler([origin = options_.allow_origin](const httplib::Request&,
                                                                  httplib::Response& res) {
      res.set_header("Access-Control-Allow-Origin", origin);
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
    });
    srv.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  }

  srv.Get("/sites", [this](const httplib::Request&, httplib::Response& res) {
    auto report = store_.Snapshot();
    json out = json::array();
    for (const auto& s : report->sites) out.push_back(SiteListEntry(s));
    SendJson(res, 200, out);
  });

  srv.Get("/sites/:id", [this](const httplib::Request& req, httplib::Response& res) {
    auto report = store_.Snapshot();
    const auto* site = report->FindSite(req.path_params.at("id"));
    if (site == nullptr) return SendError(res, 404, "unknown site");
    json out = SiteToJson(*site);
    out["checklist"] = Checklist(*site);
    SendJson(res, 200, out);
  });

  srv.Get("/sites/:id/evidence/:ref", [this](const httplib::Request& req, httplib::Response& res) {
    auto report = store_.Snapshot();
    const auto* site = report->FindSite(req.path_params.at("id"));
    if (site == nullptr) return SendError(res, 404, "unknown site");
    const auto& ref = req.path_params.at("ref");
    const Evidence* found = nullptr;
    for (const auto& v : site->verdicts) {
      for (const auto& e : v.evidence) {
        if (e.ref == ref) found = &e;
      }
    }
    for (const auto& f : site->findings) {
      for (const auto& e : f.evidence) {
        if (e.ref == ref) found = &e;
      }
    }
    if (found == nullptr) return SendError(res, 404, "unknown evidence ref");
    if (req.get_param_value("asset") == "1") {
      if (found->kind != EvidenceKind::kScreenshotRef || !found->payload.contains("asset")) {
        return SendError(res, 404, "evidence has no asset");
      }
      fs::path rel = found->payload["asset"].get<std::string>();
      fs::path file = store_.assets_dir() / rel;
      if (!IsContainedPath(rel) || !fs::is_regular_file(file)) {
        return SendError(res, 404, "asset not found");
      }
      res.status = 200;
      res.set_content(ReadFile(file), ContentTypeFor(file));
      return;
    }
    json out = EvidenceToJson(*found);
    out["ref"] = ref;
    SendJson(res, 200, out);
  });

  srv.Post("/sites/:id/answers", [this](const httplib::Request& req, httplib::Response& res) {
    const auto& id = req.path_params.at("id");
    json body;
    try {
      body = json::parse(req.body);
    } catch (const json::parse_error& e) {
      return SendError(res, 422, std::string("invalid JSON: ") + e.what());
    }
    if (body.is_object() && !body.contains("site_id")) body["site_id"] = id;
    ManualAnswer answer;
    try {
      answer = ParseManualAnswer(body);
    } catch (const SchemaError& e) {
      return SendError(res, 422, e.what());
    }
    if (answer.site_id != id) return SendError(res, 422, "site_id does not match the URL");
    try {
      Verdict v = store_.Submit(answer);
      SendJson(res, 201, {{"answer", ManualAnswerToJson(answer)}, {"verdict", VerdictToJson(v)}});
    } catch (const NotFoundError& e) {
      SendError(res, 404, e.what());
    } catch (const ConflictError& e) {
      SendError(res, 409, e.what());
    } catch (const Error& e) {
      SendError(res, 500, e.what());
    }
  });

  srv.Get("/report", [this](const httplib::Request&, httplib::Response& res) {
    res.status = 200;
    res.set_content(RenderJson(*store_.Snapshot()), "application/json");
  });

  if (!options_.console_assets.empty()) {
    srv.set_mount_point("/", options_.console_assets.string());
  }
}

}  // namespace consent_audit

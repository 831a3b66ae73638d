#ifndef CONSENT_AUDIT_REVIEW_H_
#define CONSENT_AUDIT_REVIEW_H_

// File-backed review store and the HTTP API in front of it.
//
// Store layout: <root>/report.json (base report from the audit),
// <root>/answers.log (one ManualAnswer JSON object per line, append-only),
// <root>/assets/ (evidence files such as banner screenshots). The current
// state is always the base report with the log replayed over it.

#include <filesystem>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "consent_audit/report.h"

namespace httplib {
class Server;
}

namespace consent_audit {

AuditReport ReplayAnswers(AuditReport base, std::span<const ManualAnswer> answers);

// A final line without a newline is an unacknowledged partial write and is
// skipped. Any other malformed line throws ParseError.
std::vector<ManualAnswer> ReadAnswerLog(const std::filesystem::path& path);

class ReviewStore {
 public:
  // Writes |base| as the store's report and starts an empty answer log.
  static void Initialize(const std::filesystem::path& root, const AuditReport& base);

  // Loads the base report (an empty report when none exists yet) and
  // replays the log.
  explicit ReviewStore(std::filesystem::path root);
  ~ReviewStore();
  ReviewStore(const ReviewStore&) = delete;
  ReviewStore& operator=(const ReviewStore&) = delete;

  std::shared_ptr<const AuditReport> Snapshot() const;

  // Checks the answer against the current state, appends it to the log,
  // syncs the log to disk, then publishes the new state. Throws
  // NotFoundError or ConflictError; nothing is written in that case.
  Verdict Submit(const ManualAnswer& answer);

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path assets_dir() const { return root_ / "assets"; }
  std::filesystem::path report_path() const { return root_ / "report.json"; }
  std::filesystem::path log_path() const { return root_ / "answers.log"; }

 private:
  std::filesystem::path root_;
  std::mutex write_mu_;
  std::shared_ptr<const AuditReport> current_;
  int log_fd_ = -1;
};

struct ServerOptions {
  // Value for Access-Control-Allow-Origin; empty disables CORS headers.
  std::string allow_origin;
  // Static console build served under "/" when set.
  std::filesystem::path console_assets;
};

class ReviewServer {
 public:
  ReviewServer(ReviewStore& store, ServerOptions options);
  ~ReviewServer();

  // Port 0 picks a free port. Returns the bound port, or -1.
  int Bind(const std::string& host, int port);
  // Blocks until Stop().
  bool Listen();
  void Stop();
  void WaitUntilReady() const;

 private:
  void Routes();

  ReviewStore& store_;
  ServerOptions options_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace consent_audit

#endif  // CONSENT_AUDIT_REVIEW_H_

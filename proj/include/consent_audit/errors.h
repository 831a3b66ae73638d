#ifndef CONSENT_AUDIT_ERRORS_H_
#define CONSENT_AUDIT_ERRORS_H_

#include <stdexcept>
#include <string>

namespace consent_audit {

// Base class for every error raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input does not match a documented schema. |path| names the offending field
// using dotted/indexed notation, e.g. "events[3].cookies[0].name".
class SchemaError : public Error {
 public:
  explicit SchemaError(std::string path, const std::string& detail = {})
      : Error("schema error at '" + path + "'" +
              (detail.empty() ? "" : ": " + detail)),
        path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// Input is well-typed but violates a semantic invariant.
class InvariantError : public Error {
 public:
  InvariantError(std::string path, const std::string& detail)
      : Error("invariant violated at '" + path + "': " + detail),
        path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// Line-oriented data file (tracker list, lexicon, config...) failed to parse.
class ParseError : public Error {
 public:
  ParseError(int line, const std::string& detail)
      : Error("line " + std::to_string(line) + ": " + detail), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// A checker was handed a session it cannot evaluate.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

}  // namespace consent_audit

#endif  // CONSENT_AUDIT_ERRORS_H_

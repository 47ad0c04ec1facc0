#pragma once

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace finverif {

enum class Severity { Error, Warning };

enum class DiagKind {
  SyntaxError,
  UnsupportedFeature,
  UnboundedLoop,
  BoundExceeded,
  InternalError,
  NoPropertyApplicable,
};

struct SourceLoc {
  int line = 1;
  int column = 1;
};

struct Diagnostic {
  DiagKind kind = DiagKind::SyntaxError;
  Severity severity = Severity::Error;
  SourceLoc loc;
  std::string message;
  std::string file;

  // Rendered as file:line:col: severity: message
  std::string render() const {
    std::string out;
    out += file.empty() ? "<input>" : file;
    out += ":" + std::to_string(loc.line) + ":" + std::to_string(loc.column) + ": ";
    out += severity == Severity::Error ? "error: " : "warning: ";
    out += message;
    return out;
  }
};

inline Diagnostic make_diag(DiagKind kind, SourceLoc loc, std::string message) {
  Diagnostic d;
  d.kind = kind;
  d.loc = loc;
  d.message = std::move(message);
  return d;
}

// Minimal expected-style result carrying either a value or a diagnostic.
template <typename T>
class Result {
public:
  Result(T value) : data_(std::move(value)) {}
  Result(Diagnostic diag) : data_(std::move(diag)) {}

  bool ok() const { return std::holds_alternative<T>(data_); }
  explicit operator bool() const { return ok(); }

  T& value() { return std::get<T>(data_); }
  const T& value() const { return std::get<T>(data_); }
  const Diagnostic& error() const { return std::get<Diagnostic>(data_); }

private:
  std::variant<T, Diagnostic> data_;
};

}  // namespace finverif

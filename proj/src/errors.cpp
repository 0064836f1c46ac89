#include "tdsec/errors.hpp"

#include <utility>

namespace tdsec {

namespace {

std::string located(std::string message, int line, int column) {
  if (line <= 0) return message;
  return "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " +
         std::move(message);
}

}  // namespace

InputError::InputError(Kind kind, std::string message, std::string subject, std::string context,
                       int line, int column)
    : std::runtime_error(located(std::move(message), line, column)),
      kind_(kind),
      subject_(std::move(subject)),
      context_(std::move(context)),
      line_(line),
      column_(column) {}

SolverError::SolverError(std::string message, std::vector<double> trace, std::string where)
    : std::runtime_error(std::move(message)), trace_(std::move(trace)), where_(std::move(where)) {}

const char* to_string(InputError::Kind kind) noexcept {
  switch (kind) {
    case InputError::Kind::io: return "io";
    case InputError::Kind::syntax: return "syntax";
    case InputError::Kind::unsupported_version: return "unsupported_version";
    case InputError::Kind::dangling_reference: return "dangling_reference";
    case InputError::Kind::duplicate_id: return "duplicate_id";
    case InputError::Kind::invariant: return "invariant";
  }
  return "unknown";
}

}  // namespace tdsec

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace tdsec {

/// Problems found while reading or validating an input file.
class InputError : public std::runtime_error {
public:
  enum class Kind {
    io,
    syntax,
    unsupported_version,
    dangling_reference,
    duplicate_id,
    invariant,
  };

  InputError(Kind kind, std::string message, std::string subject = {},
             std::string context = {}, int line = 0, int column = 0);

  Kind kind() const noexcept { return kind_; }
  /// Offending identifier or path, when there is one.
  const std::string& subject() const noexcept { return subject_; }
  /// Id of the record the problem was found in.
  const std::string& context() const noexcept { return context_; }
  /// 1-based; 0 when unknown.
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

private:
  Kind kind_;
  std::string subject_;
  std::string context_;
  int line_;
  int column_;
};

/// Power-flow failure: non-convergence, divergence, singular Jacobian,
/// or a non-radial feeder handed to the sweep solver.
class SolverError : public std::runtime_error {
public:
  SolverError(std::string message, std::vector<double> trace = {},
              std::string where = {});

  /// Max mismatch per iteration up to the failure.
  const std::vector<double>& trace() const noexcept { return trace_; }
  /// Feeder / subsystem that failed.
  const std::string& where() const noexcept { return where_; }

private:
  std::vector<double> trace_;
  std::string where_;
};

const char* to_string(InputError::Kind kind) noexcept;

}  // namespace tdsec

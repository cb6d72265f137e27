#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace fairaudit {

// Validation-class failure: malformed input, bad options, violated contracts.
// The CLI maps these to exit code 1; anything else escaping main exits 2.
class AuditError : public std::runtime_error {
public:
  explicit AuditError(const std::string& msg) : std::runtime_error(msg) {}
};

// Input file could not be parsed. line is 1-based; 0 when the failure is not
// tied to a specific line.
class ParseError : public AuditError {
public:
  ParseError(const std::string& msg, std::size_t line)
      : AuditError(line ? msg + " (line " + std::to_string(line) + ")" : msg),
        line_(line) {}
  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

// A metric has no defined value on a given sample (e.g. AUC on a single-class
// slice). The bootstrap skips such iterations; every other caller treats it
// as a hard error.
class UndefinedMetricError : public AuditError {
public:
  using AuditError::AuditError;
};

class UndefinedAucError : public UndefinedMetricError {
public:
  UndefinedAucError(std::int64_t n_pos, std::int64_t n_neg)
      : UndefinedMetricError("auc undefined: " + std::to_string(n_pos) +
                             " positives, " + std::to_string(n_neg) +
                             " negatives"),
        n_pos_(n_pos),
        n_neg_(n_neg) {}
  std::int64_t n_pos() const { return n_pos_; }
  std::int64_t n_neg() const { return n_neg_; }

private:
  std::int64_t n_pos_;
  std::int64_t n_neg_;
};

}  // namespace fairaudit

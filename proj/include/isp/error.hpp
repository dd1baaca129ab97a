#pragma once

#include <stdexcept>
#include <string>

namespace isp {

enum class ErrorKind {
  io,
  parse,
  duplicate_id,
  unknown_category,
  unknown_item,
  empty_corpus,
  missing_item,
  dim_mismatch,
  infeasible,
  infeasible_catalog,
  invalid_k,
  invalid_quantile,
  empty_warm_set,
  invalid_size,
  invalid_argument,
  config,
  internal,
};

/// Single exception type for the whole library; `kind()` identifies the
/// failure class so callers (and the C API) can map it to a status code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message)
      : std::runtime_error(std::move(message)), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::io: return "io";
    case ErrorKind::parse: return "parse";
    case ErrorKind::duplicate_id: return "duplicate_id";
    case ErrorKind::unknown_category: return "unknown_category";
    case ErrorKind::unknown_item: return "unknown_item";
    case ErrorKind::empty_corpus: return "empty_corpus";
    case ErrorKind::missing_item: return "missing_item";
    case ErrorKind::dim_mismatch: return "dim_mismatch";
    case ErrorKind::infeasible: return "infeasible";
    case ErrorKind::infeasible_catalog: return "infeasible_catalog";
    case ErrorKind::invalid_k: return "invalid_k";
    case ErrorKind::invalid_quantile: return "invalid_quantile";
    case ErrorKind::empty_warm_set: return "empty_warm_set";
    case ErrorKind::invalid_size: return "invalid_size";
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::config: return "config";
    case ErrorKind::internal: return "internal";
  }
  return "unknown";
}

}  // namespace isp

#include "spinelaw/error.hpp"

namespace spinelaw {

auto to_string(Error_kind kind) -> std::string_view {
  switch (kind) {
    case Error_kind::invalid_model: return "InvalidModel";
    case Error_kind::path_domain: return "PathDomainError";
    case Error_kind::query_out_of_range: return "QueryOutOfRange";
    case Error_kind::truncated_tree: return "TruncatedTree";
    case Error_kind::not_alive: return "NotAlive";
    case Error_kind::extinction_at_t: return "ExtinctionAtT";
    case Error_kind::config: return "ConfigError";
    case Error_kind::insufficient_data: return "InsufficientData";
    case Error_kind::io: return "IoError";
  }
  return "Error";
}

Error::Error(Error_kind kind, const std::string& message)
    : std::runtime_error{std::string{to_string(kind)} + ": " + message}, kind_{kind} {}

}  // namespace spinelaw

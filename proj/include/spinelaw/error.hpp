#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace spinelaw {

enum class Error_kind {
  invalid_model,
  path_domain,
  query_out_of_range,
  truncated_tree,
  not_alive,
  extinction_at_t,
  config,
  insufficient_data,
  io,
};

auto to_string(Error_kind kind) -> std::string_view;

// Every failure surfaced by the library is one of these; `kind()` tells callers
// (and the CLI exit-code mapping) which contract was violated.
class Error : public std::runtime_error {
 public:
  Error(Error_kind kind, const std::string& message);

  auto kind() const -> Error_kind { return kind_; }

 private:
  Error_kind kind_;
};

}  // namespace spinelaw

#pragma once

#include <stdexcept>
#include <string>

namespace cqb {

enum class Errc {
  invalid_means,
  invalid_config,
  numerical_degeneracy,
  lp_infeasible,
  too_large,
  invalid_mixture,
  mismatched_runs,
  nonpositive_values,
  io,
};

/// Single exception type for the library; `code()` drives CLI exit statuses.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace cqb

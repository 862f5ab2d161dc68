#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "cqbandit/instances.hpp"

namespace cqb {

// Instance files are sectioned key = value text; '#' starts a comment.
// Vectors are whitespace- or comma-separated; indices are 0-based except the
// constraint number in [cost.k], which runs 1..K.
//
//   [meta]      name, K, J, d, T, delta (a number or "auto" for the Slater margin)
//   [contexts]  p = p_0 ... p_{C-1}
//   [onehot]    (empty) phi(c, j) = e_{c*J + j}, requires d = C * J
//   [features]  phi.c.j = d numbers, one line per (c, j)
//   [reward]    theta, m, noise (gaussian | bernoulli), sigma
//   [cost.k]    kind = deterministic | shifted-bernoulli | linear
//               tabular: mean.c = J numbers, shift.c = J numbers (shifted-bernoulli)
//               linear:  mu, psi = onehot | psi.c.j lines, noise, sigma

/// Throws Error(invalid_config) with a line number on malformed input and
/// runs validate() on the result.
Instance parse_instance(std::string_view text);

/// Throws Error(io) if the file cannot be read.
Instance load_instance(const std::filesystem::path& path);

/// Writes a file that parse_instance() reads back to an identical instance.
void write_instance(std::ostream& os, const Instance& instance);

}  // namespace cqb

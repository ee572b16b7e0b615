#pragma once

#include <optional>
#include <vector>

#include "fracmem/fracop.hpp"

namespace fracmem {

struct EigenOptions {
  /// Target for ||(M + V) u - lambda u||_2 / lambda with u L2(Omega)-normalised.
  double residual_tol = 1e-9;
  /// Target for the relative eigenvalue change between iterations.
  double change_tol = 1e-12;
  int max_matvecs = 40000;
  /// Search-space size before a thick restart, and Ritz vectors kept across it.
  int max_basis = 40;
  int keep = 10;
  /// Start vector; the all-ones field when empty.
  std::optional<Field> start;
  /// Fields the search space is kept orthogonal to (for deflated runs).
  std::vector<Field> deflate;
};

struct EigenPair {
  double lambda = 0.0;
  Field u;  // L2(Omega)-normalised, sum(u) > 0
  double residual = 0.0;
  int iterations = 0;
};

/// Lowest eigenpair of M + diag(potential).
EigenPair smallest_eigenpair(const FracOperator& op, const Field& potential,
                             const EigenOptions& options = {});

/// Lowest eigenvalue of M + diag(potential) on the L2-orthogonal complement of
/// `ground` (a deflated run; used to check the spectral gap).
double second_eigenvalue(const FracOperator& op, const Field& potential, const Field& ground,
                         const EigenOptions& options = {});

/// Minimum Rayleigh quotient of M + diag(potential) over span(basis).
double subspace_eigenvalue(const FracOperator& op, const Field& potential,
                           const std::vector<Field>& basis);

/// Solves (M + diag(potential)) x = rhs by conjugate gradients.
/// Throws SolverError when the relative residual does not reach `tol`
/// within `max_iterations` (10 * size when zero).
Field solve_spd(const FracOperator& op, const Field& potential, const Field& rhs,
                double tol = 1e-12, int max_iterations = 0);

}  // namespace fracmem

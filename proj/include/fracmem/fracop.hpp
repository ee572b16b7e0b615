#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fracmem/grid.hpp"

namespace fracmem {

/// Values on the inside cells of a domain, in DomainMask::cells() order.
/// Cells outside the domain implicitly carry the value zero.
using Field = Eigen::VectorXd;

/// Normalisation constant of the integral fractional Laplacian in dimension n:
/// 4^s s Gamma(n/2 + s) / (pi^(n/2) Gamma(1 - s)).
double kernel_constant(int n, double s);

struct AssemblyOptions {
  /// Inside-cell count up to which the dense matrix is stored and used by apply().
  std::size_t dense_limit = 2048;
};

/// Discretised (-Delta)^s on a cell-centred grid with zero exterior values.
///
/// The operator has the difference form
///
///   (M u)_i = sum_{k != 0} w(k) (u_i - u_{i+k}) + tail * u_i,
///
/// where w(k) integrates the kernel over the cell at offset k, the stencil
/// spans the whole embedding box and `tail` is the closed-form integral of
/// the kernel outside the stencil. Exterior cells contribute zero, so
/// M = d I - W restricted to the domain, with constant diagonal d.
class FracOperator {
 public:
  double s() const;
  double c_ns() const;
  const GridSpec& grid() const;
  const DomainMask& domain() const;
  std::size_t size() const { return domain().size(); }

  /// M_ii, identical for every cell.
  double diagonal() const;
  /// w(offset); zero at offset 0. Offsets beyond the stencil return zero.
  double weight(int kx, int ky = 0) const;
  /// Closed-form far-field contribution outside the stencil.
  double far_tail() const;
  /// Per-cell exterior contribution T_i = d - sum_{j in domain, j != i} w(i - j).
  const Field& tail() const;

  /// M * field. Uses the stored dense matrix when available, else the FFT path.
  Field apply(const Field& field) const;
  Field apply_dense(const Field& field) const;
  Field apply_fft(const Field& field) const;
  bool has_dense() const;
  /// Explicit matrix on the inside cells (built on demand when not stored).
  Eigen::MatrixXd dense_matrix() const;

  /// FNV-1a hash of the weight table, for provenance records.
  std::string weights_checksum() const;

  struct Impl;

 private:
  explicit FracOperator(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
  friend FracOperator assemble(const DomainMask&, double, const AssemblyOptions&);
};

FracOperator assemble(const DomainMask& domain, double s, const AssemblyOptions& options = {});

/// Discrete ||(-Delta)^{s/2} u||^2 = u^T M u h^dim.
double quadratic_form(const FracOperator& op, const Field& field);

/// (u^T M u + alpha sum_D u^2) h^dim / (sum u^2 h^dim).
double rayleigh(const FracOperator& op, double alpha, const Configuration& config,
                const Field& field);

/// Discrete L2(Omega) inner product and norm.
double l2_dot(const GridSpec& grid, const Field& a, const Field& b);
double l2_norm(const GridSpec& grid, const Field& a);

/// Scatter a domain field to the full grid (zero outside) and back.
Eigen::VectorXd to_grid(const DomainMask& domain, const Field& field);
Field from_grid(const DomainMask& domain, const Eigen::VectorXd& values);

/// Samples f at the inside cell centres.
template <class F>
Field sample(const DomainMask& domain, F&& f) {
  Field out(static_cast<Eigen::Index>(domain.size()));
  for (std::size_t k = 0; k < domain.size(); ++k) {
    const auto x = domain.grid().center(domain.cell(k));
    out[static_cast<Eigen::Index>(k)] = f(x[0], x[1]);
  }
  return out;
}

}  // namespace fracmem

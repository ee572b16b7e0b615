#include "fracmem/eigensolver.hpp"

#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Eigenvalues>

namespace fracmem {

namespace {

Field apply_shifted(const FracOperator& op, const Field& potential, const Field& x) {
  Field y = op.apply(x);
  y.array() += potential.array() * x.array();
  return y;
}

void check_potential(const FracOperator& op, const Field& potential) {
  if (static_cast<std::size_t>(potential.size()) != op.size())
    throw ValidationError("potential has the wrong number of cells");
  if (!potential.allFinite()) throw ValidationError("potential must be finite");
}

// Orthogonalises t against the columns of v (two passes of classical
// Gram-Schmidt) and against the deflation vectors. Returns the remaining norm.
double orthogonalise(Field& t, const Eigen::MatrixXd& v, Eigen::Index cols,
                     const std::vector<Field>& deflate) {
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& d : deflate) t -= d * d.dot(t);
    if (cols > 0) {
      const Eigen::VectorXd c = v.leftCols(cols).transpose() * t;
      t -= v.leftCols(cols) * c;
    }
  }
  return t.norm();
}

// Thick-restart Lanczos in Rayleigh-Ritz form: the search space is extended
// by the residual of the current lowest Ritz vector, and at restart the
// `keep` lowest Ritz vectors are retained.
EigenPair lowest_pair(const FracOperator& op, const Field& potential, const EigenOptions& opt) {
  check_potential(op, potential);
  const auto n = static_cast<Eigen::Index>(op.size());
  const double vol_sqrt = std::sqrt(op.grid().cell_volume());

  std::vector<Field> deflate;
  for (const auto& d : opt.deflate) {
    if (d.size() != n) throw ValidationError("deflation field has the wrong size");
    Field q = d;
    for (const auto& e : deflate) q -= e * e.dot(q);
    const double nq = q.norm();
    if (nq > 0.0) deflate.push_back(q / nq);
  }

  const Eigen::Index max_basis = std::max<Eigen::Index>(4, std::min<Eigen::Index>(opt.max_basis, n));
  const Eigen::Index keep = std::clamp<Eigen::Index>(opt.keep, 1, max_basis - 2);

  Field t = opt.start ? *opt.start : Field::Ones(n);
  if (t.size() != n) throw ValidationError("start vector has the wrong size");

  Eigen::MatrixXd v(n, max_basis);
  Eigen::MatrixXd w(n, max_basis);
  Eigen::Index cols = 0;
  int matvecs = 0;
  double theta_prev = std::numeric_limits<double>::quiet_NaN();
  double best_residual = std::numeric_limits<double>::infinity();

  auto add_vector = [&](Field vec) -> bool {
    const double before = vec.norm();
    const double after = orthogonalise(vec, v, cols, deflate);
    if (!(after > 1e-10 * before) || !(after > 0.0)) return false;
    v.col(cols) = vec / after;
    w.col(cols) = apply_shifted(op, potential, v.col(cols));
    ++matvecs;
    ++cols;
    return true;
  };

  if (!add_vector(t)) {
    // Start vector lies in the deflated space; fall back to a deterministic ramp.
    Field ramp = Field::LinSpaced(n, 1.0, 2.0);
    if (!add_vector(ramp)) throw SolverError("eigensolver: cannot build a start vector");
  }

  for (;;) {
    Eigen::MatrixXd h = v.leftCols(cols).transpose() * w.leftCols(cols);
    h = 0.5 * (h + h.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ritz(h);
    const double theta = ritz.eigenvalues()[0];
    const Eigen::VectorXd y = ritz.eigenvectors().col(0);
    Field x = v.leftCols(cols) * y;
    Field ax = w.leftCols(cols) * y;
    Field r = ax - theta * x;
    const double xnorm = x.norm();
    const double res = r.norm() / (xnorm * vol_sqrt);
    best_residual = std::min(best_residual, res);

    const bool small_change = std::isfinite(theta_prev) &&
                              std::abs(theta - theta_prev) <= opt.change_tol * std::abs(theta);
    const bool small_residual = res <= opt.residual_tol * std::abs(theta);
    if ((small_change && small_residual) || (small_residual && cols == n)) {
      // Confirm with an explicit product; W may carry drift across restarts.
      x /= xnorm;
      const Field ax_true = apply_shifted(op, potential, x);
      ++matvecs;
      const double rq = x.dot(ax_true);
      const double true_res = (ax_true - rq * x).norm() / vol_sqrt;
      if (true_res <= opt.residual_tol * std::abs(rq)) {
        EigenPair out;
        out.lambda = rq;
        out.u = x / vol_sqrt;
        if (out.u.sum() < 0.0) out.u = -out.u;
        out.residual = true_res;
        out.iterations = matvecs;
        return out;
      }
      // Restart from the current Ritz vector with a fresh product.
      cols = 0;
      theta_prev = std::numeric_limits<double>::quiet_NaN();
      if (!add_vector(x)) throw SolverError("eigensolver: restart failed", best_residual);
      continue;
    }
    theta_prev = theta;

    if (matvecs >= opt.max_matvecs) {
      throw SolverError("eigensolver: no convergence after " + std::to_string(matvecs) +
                            " operator applications",
                        best_residual);
    }

    if (cols >= max_basis) {
      const Eigen::Index k = std::min(keep, cols);
      const Eigen::MatrixXd yk = ritz.eigenvectors().leftCols(k);
      Eigen::MatrixXd vk = v.leftCols(cols) * yk;
      Eigen::MatrixXd wk = w.leftCols(cols) * yk;
      v.leftCols(k) = vk;
      w.leftCols(k) = wk;
      cols = k;
    }
    if (!add_vector(r)) {
      // Residual already inside the search space: the Ritz pair is exact up
      // to rounding. Restart from it so the explicit check decides.
      cols = 0;
      theta_prev = std::numeric_limits<double>::quiet_NaN();
      if (!add_vector(x / xnorm)) throw SolverError("eigensolver: breakdown", best_residual);
      if (n > 1) {
        Field ramp = Field::LinSpaced(n, 1.0, 2.0);
        add_vector(ramp);
      }
    }
  }
}

}  // namespace

EigenPair smallest_eigenpair(const FracOperator& op, const Field& potential,
                             const EigenOptions& options) {
  return lowest_pair(op, potential, options);
}

double second_eigenvalue(const FracOperator& op, const Field& potential, const Field& ground,
                         const EigenOptions& options) {
  EigenOptions opt = options;
  opt.deflate.push_back(ground);
  // A generic start: the all-ones field would keep the search inside the
  // symmetric subspace and miss degenerate non-symmetric modes.
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> dist(0.5, 1.5);
  Field start(static_cast<Eigen::Index>(op.size()));
  for (auto& v : start) v = dist(rng);
  opt.start = start;
  return lowest_pair(op, potential, opt).lambda;
}

double subspace_eigenvalue(const FracOperator& op, const Field& potential,
                           const std::vector<Field>& basis) {
  check_potential(op, potential);
  if (basis.empty()) throw ValidationError("subspace_eigenvalue: empty basis");
  const auto n = static_cast<Eigen::Index>(op.size());
  const auto k = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXd b(n, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    if (basis[static_cast<std::size_t>(j)].size() != n)
      throw ValidationError("subspace_eigenvalue: basis field has the wrong size");
    b.col(j) = basis[static_cast<std::size_t>(j)];
  }
  Eigen::MatrixXd ab(n, k);
  for (Eigen::Index j = 0; j < k; ++j) ab.col(j) = apply_shifted(op, potential, b.col(j));

  Eigen::MatrixXd gram = b.transpose() * b;
  Eigen::MatrixXd stiff = b.transpose() * ab;
  stiff = 0.5 * (stiff + stiff.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> g(gram);
  const double gmax = g.eigenvalues().maxCoeff();
  const double gmin = g.eigenvalues().minCoeff();
  if (!(gmax > 0.0) || gmin <= 1e-12 * gmax)
    throw ValidationError("subspace_eigenvalue: basis is rank deficient");
  const Eigen::MatrixXd t = g.eigenvectors() * g.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal();
  Eigen::MatrixXd reduced = t.transpose() * stiff * t;
  reduced = 0.5 * (reduced + reduced.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(reduced, Eigen::EigenvaluesOnly);
  return es.eigenvalues()[0];
}

Field solve_spd(const FracOperator& op, const Field& potential, const Field& rhs, double tol,
                int max_iterations) {
  check_potential(op, potential);
  const auto n = static_cast<Eigen::Index>(op.size());
  if (rhs.size() != n) throw ValidationError("solve_spd: right-hand side has the wrong size");
  const int cap = max_iterations > 0 ? max_iterations : static_cast<int>(10 * n);
  Field x = Field::Zero(n);
  Field r = rhs;
  const double bnorm = rhs.norm();
  if (bnorm == 0.0) return x;
  Field p = r;
  double rr = r.squaredNorm();
  for (int it = 0; it < cap; ++it) {
    if (std::sqrt(rr) <= tol * bnorm) return x;
    const Field ap = apply_shifted(op, potential, p);
    const double alpha = rr / p.dot(ap);
    x += alpha * p;
    r -= alpha * ap;
    const double rr_new = r.squaredNorm();
    p = r + (rr_new / rr) * p;
    rr = rr_new;
  }
  // Final check against the true residual.
  const double res = (rhs - apply_shifted(op, potential, x)).norm();
  if (res <= tol * bnorm) return x;
  throw SolverError("solve_spd: conjugate gradients did not converge", res / bnorm);
}

}  // namespace fracmem

#pragma once

#include <cstdint>
#include <vector>

#include "fracmem/optimize.hpp"

namespace fracmem {

/// Steiner symmetrisation along `axis` (0 = x, 1 = y): on every grid line the
/// values are rearranged symmetric-decreasing about the line centre.
/// The domain must be symmetric about the centre plane and convex along the axis.
Field steiner(const Field& u, const DomainMask& domain, int axis);

/// Number of angular sectors used by asymmetry().
inline constexpr int kAngularBins = 64;

/// Angular non-uniformity of values in [0, 1] on a disk or annulus: the
/// population variance over the 64 angular sectors of the sector-mean value.
/// 0 for rotation-invariant inputs, 1/4 for a half-and-half indicator.
double asymmetry(const Field& values, const DomainMask& domain);
double asymmetry(const Configuration& d, const DomainMask& domain);
/// Asymmetry of |u| / max|u|.
double field_asymmetry(const Field& u, const DomainMask& domain);

/// Embedding resolution for an annulus or sector with the given number of
/// cells across the unit radial width: n = 2 ceil((b + 1) * cells_per_width).
int annulus_resolution(double b, int cells_per_width);

/// Smallest N with delta < 1 - 1 / (2N).
int mode_number(double delta);

/// First Dirichlet eigenvalue of the sector b < r < b + 1, 0 <= theta <= pi / N.
double sector_eigenvalue(double b, int sectors, double s, int cells_per_width,
                         const EigenOptions& options = {});

/// Radial hat functions e_j(r) sin(N theta) with one hat per radial bin
/// (nodes at the bin centres, support of two bins). N = 0 gives the radial hats.
std::vector<Field> mode_basis(const DomainMask& annulus, int mode);

/// Lowest eigenvalue of M + alpha chi_D over span{e_j(r) sin(N theta)}.
double mode_restricted_tau(const FracOperator& annulus_op, double alpha,
                           const Configuration& d_radial, int mode);

/// Radial profile h on [b, b + 1] sampled at equispaced nodes including both
/// endpoints, linearly interpolated.
struct RadialProfile {
  double b = 1.0;
  std::vector<double> values;

  double operator()(double r) const;
};

/// Angular coupling integral
///   c_{2,s} int_0^{2 pi} int_b^{b+1} h(t) (1 - sin N theta) t
///       / (r^2 + t^2 - 2 r t cos(theta - pi / 2N))^{1+s} dt dtheta.
double b_operator(const RadialProfile& profile, double r, double s, int mode, double tol = 1e-8);

struct EnergySplit {
  double lhs = 0.0;  // energy of v = h(r) sin(N theta) on the annulus
  double rhs = 0.0;  // 2N times the energy of v restricted to 0 <= theta < pi / N
};

EnergySplit energy_split_check(const RadialProfile& profile, int mode, double s,
                               int cells_per_width);
/// Same check on an assembled annulus operator.
EnergySplit energy_split_check(const RadialProfile& profile, int mode, const FracOperator& annulus_op);

struct BreakingReport {
  double s = 0.0;
  double b = 0.0;
  double delta = 0.0;
  int mode = 1;
  double alpha = 0.0;
  int cells_per_width = 0;
  double sigma = 0.0;          // radial-restricted optimum
  double sigma_galerkin = 0.0; // radial-hat Galerkin eigenvalue for sigma's D
  double tau = 0.0;            // sin(N theta) mode-restricted eigenvalue
  double lambda_sector = 0.0;  // lambda_1(E+)
  double lambda_full = 0.0;    // unconstrained optimum
  double asym = 0.0;           // asymmetry of the unconstrained D
  bool sector_verdict = false; // lambda_sector < sigma
  bool full_verdict = false;   // lambda_full < sigma
  std::string full_status;
  std::string full_start;
  OptimalPair full;
  OptimalPair radial;
};

struct BreakingOptions {
  double s = 0.25;
  double delta = 0.3;
  double alpha = 1.0;
  std::vector<double> b_list{1.0, 2.0, 4.0, 8.0};
  int cells_per_width = 8;
  std::uint64_t seed = 1;
  OptimizeOptions optimize;
  bool keep_fields = false;
};

/// Runs the symmetry-breaking pipeline for each b, in b_list order.
std::vector<BreakingReport> breaking_experiment(const BreakingOptions& options);

struct DiskControlReport {
  double sigma = 0.0;
  double lambda_full = 0.0;
  double asym = 0.0;
  bool breaking = false;  // lambda_full < sigma (1 - 1e-3) and asym > 0.05
  OptimalPair full;
  OptimalPair radial;
};

/// The same comparison on the unit-width disk of radius `radius`.
DiskControlReport disk_control(double radius, double s, double delta, double alpha,
                               int resolution, const MultiStartOptions& options = {});

/// Radially monotone membership on a disk: the fraction of each radial bin
/// covered by D is nondecreasing in radius, so every bin with a majority in D
/// is followed by bins with a majority in D.
bool radially_monotone(const Configuration& d, const DomainMask& disk);

}  // namespace fracmem

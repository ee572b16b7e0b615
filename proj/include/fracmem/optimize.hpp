#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fracmem/eigensolver.hpp"

namespace fracmem {

enum class OptStatus { converged, cycled, iteration_capped };
std::string to_string(OptStatus status);

/// Result of the alternating minimisation for a fixed (alpha, A).
struct OptimalPair {
  Configuration d;
  Field u;                 // eigenfunction of (M + alpha chi_D), L2-normalised, positive
  double lambda = 0.0;     // eigenvalue of the returned configuration
  double threshold = 0.0;  // sup{c : |{u < c}| < A}
  std::vector<double> history;
  OptStatus status = OptStatus::converged;
  int iterations = 0;
  std::string start;  // label of the initial configuration
};

struct OptimizeOptions {
  int max_iterations = 500;
  /// Number of previous configurations remembered for cycle detection.
  int cycle_window = 50;
  /// Stop once an iteration lowers lambda by less than this.
  double min_improvement = 1e-12;
  EigenOptions eigen;
};

/// Number of cells used to realise the area A: round(A / h^dim).
std::size_t quota_cells(const DomainMask& domain, double area);

struct Rearrangement {
  Configuration d;
  double threshold = 0.0;
};

/// Bathtub step: the quota cells of smallest u, ties broken by cell index.
Rearrangement rearrange(const Field& u, const DomainMask& domain, double area);

/// t = sup{c : |{u < c}| < A} on the grid (the quota-th smallest value of u).
/// For an empty quota the minimum of u is returned.
double sublevel_threshold(const Field& u, std::size_t quota);

enum class StartKind { boundary_band, random, half_plane };
std::string to_string(StartKind kind);

/// Initial configuration of the given kind with the quota for `area`.
///  boundary_band: cells closest to the boundary of the domain.
///  random:        a uniformly random subset (seeded).
///  half_plane:    cells of smallest x (then y), an asymmetric start.
Configuration initial_configuration(const DomainMask& domain, double area, StartKind kind,
                                    std::uint64_t seed = 0);

/// Distance from each inside cell centre to the boundary of the shape.
std::vector<double> boundary_distance(const DomainMask& domain);

/// Potential alpha * chi_D as a field.
Field potential_of(const Configuration& d, double alpha);

/// Alternating minimisation: eigenpair for alpha chi_D, then bathtub
/// rearrangement of the eigenfunction, until D repeats or lambda stalls.
OptimalPair optimize(const FracOperator& op, double alpha, double area, const Configuration& init,
                     const OptimizeOptions& options = {});

struct MultiStartOptions {
  std::uint64_t seed = 1;
  OptimizeOptions optimize;
  /// Additional starting configurations tried alongside the default three.
  std::vector<Configuration> extra_starts;
};

/// Best of optimize() over the boundary-band, random and half-plane starts.
OptimalPair optimize_multistart(const FracOperator& op, double alpha, double area,
                                const MultiStartOptions& options = {});

/// Lambda_Omega(alpha, A) estimate.
double lambda_opt(const FracOperator& op, double alpha, double area,
                  const MultiStartOptions& options = {});

/// First Dirichlet eigenvalue mu_Omega (no potential).
double mu_omega(const FracOperator& op, const EigenOptions& options = {});

struct AlphaBarResult {
  double alpha = 0.0;
  double residual = 0.0;  // Lambda(alpha, A) - alpha
  int evaluations = 0;
  OptimalPair pair;       // optimum at the returned alpha
};

struct AlphaBarOptions {
  double tol = 1e-8;
  int max_evaluations = 80;
  MultiStartOptions multistart;
};

/// The crossing value: the root of alpha -> Lambda(alpha, A) - alpha.
AlphaBarResult alpha_bar(const FracOperator& op, double area, const AlphaBarOptions& options = {});

/// Radial bin of each inside cell: floor((r - r_inner) / h).
std::vector<int> radial_bins(const DomainMask& domain);

/// Alternating minimisation with D restricted to unions of whole radial
/// bins. Bins are added in increasing order of the angular mean of u until
/// the configuration holds at least the quota, so the realised measure
/// exceeds A by less than one bin.
OptimalPair radial_optimize(const FracOperator& op, double alpha, double area,
                            const OptimizeOptions& options = {});

/// Removes the cells of largest u from d until it holds `quota` cells.
Configuration trim_to_quota(const Configuration& d, const Field& u, std::size_t quota);

/// Physical parameters of the density problem: floor h, ceiling H, mass M
/// and basic frequency Theta.
struct PhysicalParams {
  double density_floor = 0.0;
  double density_ceiling = 1.0;
  double mass = 0.0;
  double theta = 0.0;
};

struct MembraneParams {
  double alpha = 0.0;
  double area = 0.0;
  double lambda = 0.0;
};

/// alpha = (H - h) Theta, A = (H |Omega| - M) / (H - h), Lambda = H Theta.
MembraneParams pn_convert(const PhysicalParams& params, double omega_measure);

/// Inverse of pn_convert for a given Theta.
PhysicalParams pn_inverse(const MembraneParams& params, double omega_measure, double theta);

}  // namespace fracmem

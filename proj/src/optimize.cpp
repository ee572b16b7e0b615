#include "fracmem/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

namespace fracmem {

std::string to_string(OptStatus status) {
  switch (status) {
    case OptStatus::converged: return "converged";
    case OptStatus::cycled: return "cycled";
    case OptStatus::iteration_capped: return "iteration-capped";
  }
  return "unknown";
}

std::string to_string(StartKind kind) {
  switch (kind) {
    case StartKind::boundary_band: return "boundary-band";
    case StartKind::random: return "random";
    case StartKind::half_plane: return "half-plane";
  }
  return "unknown";
}

namespace {

void check_area(const DomainMask& domain, double area) {
  const double total = domain.measure();
  const double slack = 1e-12 * std::max(1.0, total);
  if (!(area >= -slack) || !(area <= total + slack) || !std::isfinite(area)) {
    throw ValidationError("area " + std::to_string(area) + " outside [0, " +
                          std::to_string(total) + "]");
  }
}

std::vector<std::size_t> order_by(const std::vector<double>& key) {
  std::vector<std::size_t> idx(key.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return key[a] < key[b]; });
  return idx;
}

std::uint64_t hash_configuration(const Configuration& d) {
  std::uint64_t h = 1469598103934665603ULL;
  for (auto v : d.in_d) {
    h ^= v;
    h *= 1099511628211ULL;
  }
  return h;
}

std::vector<double> field_to_vector(const Field& u) {
  return std::vector<double>(u.data(), u.data() + u.size());
}

}  // namespace

std::size_t quota_cells(const DomainMask& domain, double area) {
  check_area(domain, area);
  const double cells = area / domain.grid().cell_volume();
  const auto q = static_cast<std::size_t>(std::llround(std::max(0.0, cells)));
  return std::min(q, domain.size());
}

double sublevel_threshold(const Field& u, std::size_t quota) {
  if (u.size() == 0) return 0.0;
  if (quota == 0) return u.minCoeff();
  std::vector<double> values = field_to_vector(u);
  const std::size_t k = std::min<std::size_t>(quota, values.size()) - 1;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k), values.end());
  return values[k];
}

Rearrangement rearrange(const Field& u, const DomainMask& domain, double area) {
  if (static_cast<std::size_t>(u.size()) != domain.size())
    throw ValidationError("rearrange: field does not match the domain");
  const std::size_t quota = quota_cells(domain, area);
  const auto order = order_by(field_to_vector(u));
  Rearrangement out;
  out.d.in_d.assign(domain.size(), 0);
  out.d.target_measure = area;
  for (std::size_t i = 0; i < quota; ++i) out.d.in_d[order[i]] = 1;
  out.threshold = quota == 0 ? u.minCoeff() : u[static_cast<Eigen::Index>(order[quota - 1])];
  return out;
}

std::vector<double> boundary_distance(const DomainMask& domain) {
  const auto& s = domain.shape();
  std::vector<double> dist(domain.size());
  for (std::size_t k = 0; k < domain.size(); ++k) {
    const auto c = domain.grid().center(domain.cell(k));
    const double x = c[0], y = c[1];
    double d = 0.0;
    switch (s.kind) {
      case ShapeKind::interval: d = std::min(x - s.lo, s.hi - x); break;
      case ShapeKind::rectangle: d = std::min(s.half_x - std::abs(x), s.half_y - std::abs(y)); break;
      case ShapeKind::disk: d = s.radius - std::hypot(x, y); break;
      case ShapeKind::annulus: {
        const double r = std::hypot(x, y);
        d = std::min(r - s.b, s.b + 1.0 - r);
        break;
      }
      case ShapeKind::sector: {
        const double r = std::hypot(x, y);
        const double theta = std::atan2(y, x);
        const double edge = std::numbers::pi / s.sectors;
        const double ray0 = r * std::sin(std::max(0.0, theta));
        const double ray1 = r * std::sin(std::max(0.0, edge - theta));
        d = std::min({r - s.b, s.b + 1.0 - r, ray0, ray1});
        break;
      }
    }
    dist[k] = d;
  }
  return dist;
}

Configuration initial_configuration(const DomainMask& domain, double area, StartKind kind,
                                    std::uint64_t seed) {
  const std::size_t quota = quota_cells(domain, area);
  Configuration d;
  d.in_d.assign(domain.size(), 0);
  d.target_measure = area;
  std::vector<std::size_t> order;
  switch (kind) {
    case StartKind::boundary_band: order = order_by(boundary_distance(domain)); break;
    case StartKind::half_plane: {
      // Grid order is y-major, so sort by x with y as the tie breaker.
      std::vector<double> key(domain.size());
      const double span = domain.grid().h * domain.grid().n * 4.0;
      for (std::size_t k = 0; k < domain.size(); ++k) {
        const auto c = domain.grid().center(domain.cell(k));
        key[k] = c[0] * span + c[1];
      }
      order = order_by(key);
      break;
    }
    case StartKind::random: {
      order.resize(domain.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::mt19937_64 rng(seed);
      for (std::size_t i = order.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(order[i - 1], order[j]);
      }
      break;
    }
  }
  for (std::size_t i = 0; i < quota; ++i) d.in_d[order[i]] = 1;
  return d;
}

Field potential_of(const Configuration& d, double alpha) {
  Field v(static_cast<Eigen::Index>(d.in_d.size()));
  for (std::size_t k = 0; k < d.in_d.size(); ++k)
    v[static_cast<Eigen::Index>(k)] = d.in_d[k] ? alpha : 0.0;
  return v;
}

namespace {

// Shared alternating loop; `step` maps an eigenfunction to the next
// configuration and its threshold.
template <class Step>
OptimalPair alternate(const FracOperator& op, double alpha, Configuration d, Step&& step,
                      const OptimizeOptions& options) {
  OptimalPair best;
  best.lambda = std::numeric_limits<double>::infinity();
  std::vector<double> history;
  std::deque<std::uint64_t> window;
  EigenOptions eig = options.eigen;
  OptStatus status = OptStatus::iteration_capped;
  int it = 0;
  for (; it < options.max_iterations; ++it) {
    const EigenPair ep = smallest_eigenpair(op, potential_of(d, alpha), eig);
    history.push_back(ep.lambda);
    Rearrangement next = step(ep.u);
    if (ep.lambda < best.lambda) {
      best.d = d;
      best.u = ep.u;
      best.lambda = ep.lambda;
      best.threshold = next.threshold;
    }
    eig.start = ep.u;
    if (next.d == d) {
      status = OptStatus::converged;
      break;
    }
    if (history.size() >= 2 &&
        history[history.size() - 2] - ep.lambda < options.min_improvement) {
      status = OptStatus::converged;
      break;
    }
    const std::uint64_t h = hash_configuration(next.d);
    if (std::find(window.begin(), window.end(), h) != window.end()) {
      status = OptStatus::cycled;
      break;
    }
    window.push_back(hash_configuration(d));
    if (static_cast<int>(window.size()) > options.cycle_window) window.pop_front();
    d = std::move(next.d);
  }
  best.history = std::move(history);
  best.status = status;
  best.iterations = std::min(it + 1, options.max_iterations);
  return best;
}

}  // namespace

OptimalPair optimize(const FracOperator& op, double alpha, double area, const Configuration& init,
                     const OptimizeOptions& options) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ValidationError("optimize: alpha must be positive");
  const auto& domain = op.domain();
  const std::size_t quota = quota_cells(domain, area);
  if (init.in_d.size() != domain.size())
    throw ValidationError("optimize: initial configuration does not match the domain");
  if (init.count() != quota) {
    throw ValidationError("optimize: initial configuration has " + std::to_string(init.count()) +
                          " cells, quota is " + std::to_string(quota));
  }
  Configuration start = init;
  start.target_measure = area;
  auto step = [&](const Field& u) { return rearrange(u, domain, area); };
  OptimalPair out = alternate(op, alpha, std::move(start), step, options);
  out.d.target_measure = area;
  return out;
}

OptimalPair optimize_multistart(const FracOperator& op, double alpha, double area,
                                const MultiStartOptions& options) {
  const auto& domain = op.domain();
  struct Start {
    Configuration d;
    std::string label;
  };
  std::vector<Start> starts;
  for (auto kind : {StartKind::boundary_band, StartKind::random, StartKind::half_plane})
    starts.push_back({initial_configuration(domain, area, kind, options.seed), to_string(kind)});
  for (std::size_t i = 0; i < options.extra_starts.size(); ++i)
    starts.push_back({options.extra_starts[i], "extra-" + std::to_string(i)});

  OptimalPair best;
  best.lambda = std::numeric_limits<double>::infinity();
  for (const auto& s : starts) {
    OptimalPair p = optimize(op, alpha, area, s.d, options.optimize);
    p.start = s.label;
    if (p.lambda < best.lambda) best = std::move(p);
  }
  return best;
}

double lambda_opt(const FracOperator& op, double alpha, double area,
                  const MultiStartOptions& options) {
  return optimize_multistart(op, alpha, area, options).lambda;
}

double mu_omega(const FracOperator& op, const EigenOptions& options) {
  return smallest_eigenpair(op, Field::Zero(static_cast<Eigen::Index>(op.size())), options).lambda;
}

AlphaBarResult alpha_bar(const FracOperator& op, double area, const AlphaBarOptions& options) {
  const auto& domain = op.domain();
  check_area(domain, area);
  const std::size_t quota = quota_cells(domain, area);
  if (quota >= domain.size())
    throw ValidationError("alpha_bar: A must be smaller than the measure of the domain");

  const double mu = mu_omega(op, options.multistart.optimize.eigen);
  const double fraction = static_cast<double>(quota) / static_cast<double>(domain.size());

  AlphaBarResult result;
  auto evaluate = [&](double alpha, OptimalPair& pair) {
    ++result.evaluations;
    if (quota == 0) {
      pair = OptimalPair{};
      pair.d.in_d.assign(domain.size(), 0);
      pair.lambda = mu;
      pair.u = Field::Ones(static_cast<Eigen::Index>(domain.size()));
      return mu - alpha;
    }
    pair = optimize_multistart(op, alpha, area, options.multistart);
    return pair.lambda - alpha;
  };
  auto slope = [&](const OptimalPair& pair) {
    // d Lambda / d alpha = integral over D of u^2 for the optimal pair.
    double mass = 0.0;
    for (std::size_t k = 0; k < pair.d.in_d.size(); ++k)
      if (pair.d.in_d[k]) mass += pair.u[static_cast<Eigen::Index>(k)] * pair.u[static_cast<Eigen::Index>(k)];
    return mass * domain.grid().cell_volume() - 1.0;
  };

  double lo = 0.0;
  double hi = mu / (1.0 - fraction) + 1.0;
  OptimalPair pair;
  const double f_hi = evaluate(hi, pair);
  if (!(f_hi < 0.0)) {
    throw SolverError("alpha_bar: Lambda - alpha is not negative at the upper bracket " +
                      std::to_string(hi));
  }
  // Newton steps on the concave, decreasing map, safeguarded by bisection.
  double alpha = mu;
  double f = evaluate(alpha, pair);
  while (true) {
    if (std::abs(f) < options.tol * std::max(1.0, alpha)) break;
    if (result.evaluations >= options.max_evaluations)
      throw SolverError("alpha_bar: no convergence", std::abs(f));
    if (f > 0.0)
      lo = alpha;
    else
      hi = alpha;
    double next = alpha - f / slope(pair);
    if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
    alpha = next;
    f = evaluate(alpha, pair);
  }
  result.alpha = alpha;
  result.residual = f;
  result.pair = std::move(pair);
  return result;
}

std::vector<int> radial_bins(const DomainMask& domain) {
  const double r0 = domain.shape().inner_radius();
  const double h = domain.grid().h;
  std::vector<int> bins(domain.size());
  for (std::size_t k = 0; k < domain.size(); ++k)
    bins[k] = static_cast<int>(std::floor((domain.radius_of(k) - r0) / h));
  return bins;
}

OptimalPair radial_optimize(const FracOperator& op, double alpha, double area,
                            const OptimizeOptions& options) {
  const auto& domain = op.domain();
  if (!domain.shape().rotationally_symmetric())
    throw ValidationError("radial_optimize: domain must be a disk or an annulus");
  if (!(alpha > 0.0)) throw ValidationError("radial_optimize: alpha must be positive");
  const std::size_t quota = quota_cells(domain, area);
  const auto bins = radial_bins(domain);
  const int nbins = *std::max_element(bins.begin(), bins.end()) + 1;
  std::vector<std::size_t> bin_count(static_cast<std::size_t>(nbins), 0);
  for (int b : bins) ++bin_count[static_cast<std::size_t>(b)];

  auto fill = [&](const std::vector<double>& key) {
    Rearrangement out;
    out.d.in_d.assign(domain.size(), 0);
    out.d.target_measure = area;
    std::vector<std::size_t> order = order_by(key);
    std::vector<std::uint8_t> chosen(static_cast<std::size_t>(nbins), 0);
    std::size_t taken = 0;
    out.threshold = -std::numeric_limits<double>::infinity();
    for (std::size_t b : order) {
      if (taken >= quota) break;
      if (bin_count[b] == 0) continue;
      chosen[b] = 1;
      taken += bin_count[b];
      out.threshold = key[b];
    }
    for (std::size_t k = 0; k < domain.size(); ++k)
      out.d.in_d[k] = chosen[static_cast<std::size_t>(bins[k])];
    return out;
  };

  // Start: bins nearest the boundary.
  const double r0 = domain.shape().inner_radius();
  const double r1 = domain.shape().outer_radius();
  std::vector<double> start_key(static_cast<std::size_t>(nbins));
  for (int b = 0; b < nbins; ++b) {
    const double rc = r0 + (b + 0.5) * domain.grid().h;
    start_key[static_cast<std::size_t>(b)] =
        domain.shape().kind == ShapeKind::disk ? r1 - rc : std::min(rc - r0, r1 - rc);
  }
  Configuration start = fill(start_key).d;

  auto step = [&](const Field& u) {
    std::vector<double> mean(static_cast<std::size_t>(nbins), 0.0);
    for (std::size_t k = 0; k < domain.size(); ++k)
      mean[static_cast<std::size_t>(bins[k])] += u[static_cast<Eigen::Index>(k)];
    for (int b = 0; b < nbins; ++b) {
      const auto c = bin_count[static_cast<std::size_t>(b)];
      mean[static_cast<std::size_t>(b)] = c ? mean[static_cast<std::size_t>(b)] / c
                                             : std::numeric_limits<double>::infinity();
    }
    return fill(mean);
  };
  OptimalPair out = alternate(op, alpha, std::move(start), step, options);
  out.d.target_measure = area;
  out.start = "radial";
  return out;
}

Configuration trim_to_quota(const Configuration& d, const Field& u, std::size_t quota) {
  if (static_cast<std::size_t>(u.size()) != d.in_d.size())
    throw ValidationError("trim_to_quota: field does not match the configuration");
  Configuration out = d;
  std::vector<std::size_t> members;
  for (std::size_t k = 0; k < d.in_d.size(); ++k)
    if (d.in_d[k]) members.push_back(k);
  if (members.size() < quota) throw ValidationError("trim_to_quota: configuration is below the quota");
  std::stable_sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
    return u[static_cast<Eigen::Index>(a)] > u[static_cast<Eigen::Index>(b)];
  });
  for (std::size_t i = 0; i < members.size() - quota; ++i) out.in_d[members[i]] = 0;
  return out;
}

MembraneParams pn_convert(const PhysicalParams& p, double omega_measure) {
  if (!(omega_measure > 0.0)) throw ValidationError("pn_convert: |Omega| must be positive");
  if (!(p.density_floor >= 0.0)) throw ValidationError("pn_convert: h must be nonnegative");
  if (!(p.density_ceiling > p.density_floor))
    throw ValidationError("pn_convert: H must exceed h (degenerate density class)");
  const double lo = p.density_floor * omega_measure;
  const double hi = p.density_ceiling * omega_measure;
  if (!(p.mass >= lo && p.mass <= hi)) throw ValidationError("pn_convert: M outside [h|Omega|, H|Omega|]");
  const double gap = p.density_ceiling - p.density_floor;
  return {gap * p.theta, (hi - p.mass) / gap, p.density_ceiling * p.theta};
}

PhysicalParams pn_inverse(const MembraneParams& m, double omega_measure, double theta) {
  if (!(omega_measure > 0.0)) throw ValidationError("pn_inverse: |Omega| must be positive");
  if (!(theta > 0.0)) throw ValidationError("pn_inverse: Theta must be positive");
  if (!(m.alpha > 0.0)) throw ValidationError("pn_inverse: alpha must be positive");
  PhysicalParams p;
  p.theta = theta;
  p.density_ceiling = m.lambda / theta;
  p.density_floor = (m.lambda - m.alpha) / theta;
  p.mass = p.density_ceiling * omega_measure - m.area * m.alpha / theta;
  return p;
}

}  // namespace fracmem

#include "fracmem/symmetry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "fracmem/parallel.hpp"

namespace fracmem {

Field steiner(const Field& u, const DomainMask& domain, int axis) {
  if (static_cast<std::size_t>(u.size()) != domain.size())
    throw ValidationError("steiner: field does not match the domain");
  const auto& grid = domain.grid();
  if (axis < 0 || axis >= grid.dim) throw ValidationError("steiner: axis out of range");
  const int n = grid.n;
  const int lines = grid.dim == 1 ? 1 : n;
  auto cell_at = [&](int along, int line) -> std::size_t {
    if (grid.dim == 1) return static_cast<std::size_t>(along);
    return axis == 0 ? static_cast<std::size_t>(along) + static_cast<std::size_t>(n) * line
                     : static_cast<std::size_t>(line) + static_cast<std::size_t>(n) * along;
  };

  Field out = u;
  std::vector<double> values;
  std::vector<int> positions;
  for (int line = 0; line < lines; ++line) {
    int first = -1, last = -1, count = 0;
    for (int a = 0; a < n; ++a) {
      if (domain.contains(cell_at(a, line))) {
        if (first < 0) first = a;
        last = a;
        ++count;
      }
    }
    if (count == 0) continue;
    if (last - first + 1 != count)
      throw ValidationError("steiner: domain is not convex along the axis (line " +
                            std::to_string(line) + ")");
    if (first + last != n - 1)
      throw ValidationError("steiner: domain is not symmetric about the centre plane (line " +
                            std::to_string(line) + ")");

    values.clear();
    for (int a = first; a <= last; ++a)
      values.push_back(u[domain.local_index(cell_at(a, line))]);
    std::sort(values.begin(), values.end(), std::greater<>());

    // Positions by distance from the line centre, left before right.
    positions.clear();
    if (count % 2 == 1) {
      const int mid = (first + last) / 2;
      positions.push_back(mid);
      for (int d = 1; static_cast<int>(positions.size()) < count; ++d) {
        positions.push_back(mid - d);
        positions.push_back(mid + d);
      }
    } else {
      const int left = (first + last) / 2;
      for (int d = 0; static_cast<int>(positions.size()) < count; ++d) {
        positions.push_back(left - d);
        positions.push_back(left + 1 + d);
      }
    }
    for (int i = 0; i < count; ++i)
      out[domain.local_index(cell_at(positions[static_cast<std::size_t>(i)], line))] =
          values[static_cast<std::size_t>(i)];
  }
  return out;
}

namespace {

void require_radial(const DomainMask& domain, const char* what) {
  if (!domain.shape().rotationally_symmetric())
    throw ValidationError(std::string(what) + ": domain must be a disk or an annulus");
}

}  // namespace

double asymmetry(const Field& values, const DomainMask& domain) {
  require_radial(domain, "asymmetry");
  if (static_cast<std::size_t>(values.size()) != domain.size())
    throw ValidationError("asymmetry: values do not match the domain");
  std::vector<double> sum(kAngularBins, 0.0);
  std::vector<std::size_t> count(kAngularBins, 0);
  for (std::size_t k = 0; k < domain.size(); ++k) {
    const double theta = domain.angle_of(k);
    auto bin = static_cast<int>(std::floor(theta / (2.0 * std::numbers::pi) * kAngularBins));
    bin = std::clamp(bin, 0, kAngularBins - 1);
    sum[static_cast<std::size_t>(bin)] += values[static_cast<Eigen::Index>(k)];
    ++count[static_cast<std::size_t>(bin)];
  }
  std::vector<double> means;
  for (int b = 0; b < kAngularBins; ++b)
    if (count[static_cast<std::size_t>(b)] > 0)
      means.push_back(sum[static_cast<std::size_t>(b)] / static_cast<double>(count[static_cast<std::size_t>(b)]));
  if (means.empty()) throw ValidationError("asymmetry: every angular bin is empty");
  // Two-pass variance over sorted means; the result does not depend on bin labels.
  std::sort(means.begin(), means.end());
  double mean = 0.0;
  for (double m : means) mean += m;
  mean /= static_cast<double>(means.size());
  double var = 0.0;
  for (double m : means) var += (m - mean) * (m - mean);
  return var / static_cast<double>(means.size());
}

double asymmetry(const Configuration& d, const DomainMask& domain) {
  Field v(static_cast<Eigen::Index>(d.in_d.size()));
  for (std::size_t k = 0; k < d.in_d.size(); ++k) v[static_cast<Eigen::Index>(k)] = d.in_d[k] ? 1.0 : 0.0;
  return asymmetry(v, domain);
}

double field_asymmetry(const Field& u, const DomainMask& domain) {
  const double peak = u.cwiseAbs().maxCoeff();
  if (!(peak > 0.0)) return 0.0;
  return asymmetry(Field(u.cwiseAbs() / peak), domain);
}

int annulus_resolution(double b, int cells_per_width) {
  if (cells_per_width < 1) throw ValidationError("cells_per_width must be at least 1");
  return 2 * static_cast<int>(std::ceil((b + 1.0) * cells_per_width - 1e-9));
}

int mode_number(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("mode_number: delta must lie in (0, 1)");
  int n = 1;
  while (!(delta < 1.0 - 1.0 / (2.0 * n))) ++n;
  return n;
}

double sector_eigenvalue(double b, int sectors, double s, int cells_per_width,
                         const EigenOptions& options) {
  if (!(b >= 1.0)) throw ValidationError("sector_eigenvalue: b must be at least 1");
  if (sectors < 1) throw ValidationError("sector_eigenvalue: N must be at least 1");
  const auto domain = build_domain(ShapeSpec::sector(b, sectors), annulus_resolution(b, cells_per_width));
  const auto op = assemble(domain, s);
  return mu_omega(op, options);
}

std::vector<Field> mode_basis(const DomainMask& annulus, int mode) {
  require_radial(annulus, "mode_basis");
  if (mode < 0) throw ValidationError("mode_basis: mode must be nonnegative");
  const double h = annulus.grid().h;
  const double r0 = annulus.shape().inner_radius();
  const double r1 = annulus.shape().outer_radius();
  const int nodes = std::max(1, static_cast<int>(std::lround((r1 - r0) / h)));
  std::vector<Field> basis;
  for (int j = 0; j < nodes; ++j) {
    const double rj = r0 + (j + 0.5) * h;
    Field f = sample(annulus, [&](double x, double y) {
      const double r = std::hypot(x, y);
      const double hat = std::max(0.0, 1.0 - std::abs(r - rj) / h);
      return mode == 0 ? hat : hat * std::sin(mode * std::atan2(y, x));
    });
    if (f.squaredNorm() > 0.0) basis.push_back(std::move(f));
  }
  return basis;
}

double mode_restricted_tau(const FracOperator& annulus_op, double alpha,
                           const Configuration& d_radial, int mode) {
  if (d_radial.in_d.size() != annulus_op.size())
    throw ValidationError("mode_restricted_tau: configuration does not match the domain");
  return subspace_eigenvalue(annulus_op, potential_of(d_radial, alpha),
                             mode_basis(annulus_op.domain(), mode));
}

double RadialProfile::operator()(double r) const {
  if (values.empty()) return 0.0;
  if (values.size() == 1) return values.front();
  const double x = std::clamp(r - b, 0.0, 1.0) * static_cast<double>(values.size() - 1);
  const auto i = std::min(static_cast<std::size_t>(x), values.size() - 2);
  const double f = x - static_cast<double>(i);
  return (1.0 - f) * values[i] + f * values[i + 1];
}

namespace {

// Adaptive bisection on 15-point Gauss-Kronrod panels. A panel is accepted
// when its error is below tol relative to itself or below `floor` per unit
// length; `floor` is an absolute scale for negligible contributions.
template <class F>
double panel(const F& f, double a, double b, double tol, double floor, int depth = 0) {
  double l1 = 0.0;
  const double k = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 0, 0.0, nullptr, &l1);
  const double err = std::abs(k - boost::math::quadrature::gauss<double, 7>::integrate(f, a, b));
  if (err <= tol * l1 || err <= floor * (b - a)) return k;
  if (depth >= 50) {
    // A panel at roundoff scale only matters if it carries weight.
    if (l1 <= floor) return k;
    throw SolverError("b_operator: radial quadrature failed", err);
  }
  const double m = 0.5 * (a + b);
  return panel(f, a, m, tol, floor, depth + 1) + panel(f, m, b, tol, floor, depth + 1);
}

}  // namespace

double b_operator(const RadialProfile& profile, double r, double s, int mode, double tol) {
  const double b = profile.b;
  if (!(r >= b - 1e-12 && r <= b + 1.0 + 1e-12)) throw ValidationError("b_operator: r outside [b, b+1]");
  if (mode < 1) throw ValidationError("b_operator: N must be at least 1");
  if (!(s > 0.0 && s < 1.0)) throw ValidationError("b_operator: s must lie in (0, 1)");
  const double c = kernel_constant(2, s);

  // Symmetric form: 4 c int_0^pi sin^2(N phi / 2) int_b^{b+1} h(t) t
  //                   / ((r - t)^2 + 4 r t sin^2(phi / 2))^{1+s} dt dphi.
  // With w = 2 r sin(phi / 2) and t = r + w sinh(u) the denominator becomes
  // w^2 cosh^2(u) (1 + w tanh(u) / (r cosh u)), so the inner integral is
  // w^{-1-2s} times a smooth, exponentially decaying integral in u.
  // Linear pieces of the profile, integrated separately so that no panel
  // straddles a kink.
  struct Piece {
    double t0, t1, v0, v1;
  };
  std::vector<Piece> pieces;
  if (profile.values.size() < 2) {
    const double v = profile.values.empty() ? 0.0 : profile.values.front();
    pieces.push_back({b, b + 1.0, v, v});
  } else {
    const double step = 1.0 / static_cast<double>(profile.values.size() - 1);
    for (std::size_t i = 0; i + 1 < profile.values.size(); ++i)
      pieces.push_back({b + step * i, i + 2 == profile.values.size() ? b + 1.0 : b + step * (i + 1),
                        profile.values[i], profile.values[i + 1]});
  }
  auto radial = [&](double phi) {
    const double sh = std::sin(0.5 * phi);
    const double sn = std::sin(0.5 * mode * phi);
    if (sn == 0.0 || sh == 0.0) return 0.0;
    const double w = 2.0 * r * sh;
    double total = 0.0;
    for (const auto& pc : pieces) {
      if (pc.v0 == 0.0 && pc.v1 == 0.0) continue;
      auto f = [&](double u) {
        const double ch = std::cosh(u);
        const double offset = (r - pc.t0) + w * std::sinh(u);  // t - t0 without cancellation
        const double t = pc.t0 + offset;
        const double v = pc.v0 + (pc.v1 - pc.v0) * offset / (pc.t1 - pc.t0);
        return v * t * std::pow(ch, -1.0 - 2.0 * s) *
               std::pow(1.0 + w * std::tanh(u) / (r * ch), -1.0 - s);
      };
      const double lo = std::asinh((pc.t0 - r) / w), hi = std::asinh((pc.t1 - r) / w);
      std::vector<double> cuts{lo, hi};
      if (lo < 0.0 && hi > 0.0) cuts.push_back(0.0);
      for (double u = std::ceil(lo); u < hi; u += 1.0) cuts.push_back(u);
      std::sort(cuts.begin(), cuts.end());
      cuts.erase(std::unique(cuts.begin(), cuts.end(),
                             [](double x, double y) { return std::abs(x - y) < 1e-13; }),
                 cuts.end());
      double coarse = 0.0;
      for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        coarse += boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, cuts[i], cuts[i + 1], 0);
      const double floor = 1e-3 * tol * std::abs(coarse);
      for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        total += panel(f, cuts[i], cuts[i + 1], 1e-3 * tol, floor);
    }
    return (sn / w) * (sn / w) * std::pow(w, 1.0 - 2.0 * s) * total;
  };

  // The angular integrand behaves like phi^{1-2s} at the origin, so the
  // piece below phi_min is of relative size phi_min^{2-2s} and is dropped.
  const double phi_min = std::pow(1e-3 * tol, 1.0 / (2.0 - 2.0 * s));
  boost::math::quadrature::tanh_sinh<double> integrator;
  double err = 0.0, l1 = 0.0;
  const double sum = integrator.integrate(radial, phi_min, std::numbers::pi, tol, &err, &l1);
  if (!(err <= tol * l1 * 10 + 1e-300)) throw SolverError("b_operator: angular quadrature failed", err);
  return 4.0 * c * sum;
}

EnergySplit energy_split_check(const RadialProfile& profile, int mode, const FracOperator& op) {
  const auto& domain = op.domain();
  require_radial(domain, "energy_split_check");
  if (mode < 1) throw ValidationError("energy_split_check: N must be at least 1");
  const double edge = std::numbers::pi / mode;
  Field v = sample(domain, [&](double x, double y) {
    return profile(std::hypot(x, y)) * std::sin(mode * std::atan2(y, x));
  });
  Field restricted = v;
  for (std::size_t k = 0; k < domain.size(); ++k) {
    const double theta = domain.angle_of(k);
    if (!(theta >= 0.0 && theta < edge)) restricted[static_cast<Eigen::Index>(k)] = 0.0;
  }
  return {quadratic_form(op, v), 2.0 * mode * quadratic_form(op, restricted)};
}

EnergySplit energy_split_check(const RadialProfile& profile, int mode, double s,
                               int cells_per_width) {
  const auto domain = build_domain(ShapeSpec::annulus(profile.b),
                                   annulus_resolution(profile.b, cells_per_width));
  return energy_split_check(profile, mode, assemble(domain, s));
}

namespace {

// The quota cells outside the sector 0 <= theta <= pi / N, farthest in angle
// from it: the configuration used in the sector test-function argument.
Configuration sector_complement_start(const DomainMask& domain, double area, int mode) {
  const std::size_t quota = quota_cells(domain, area);
  const double centre = 0.5 * std::numbers::pi / mode;
  std::vector<std::pair<double, std::size_t>> key;
  for (std::size_t k = 0; k < domain.size(); ++k) {
    double d = std::abs(domain.angle_of(k) - centre);
    d = std::min(d, 2.0 * std::numbers::pi - d);
    key.emplace_back(-d, k);
  }
  std::stable_sort(key.begin(), key.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  Configuration d;
  d.in_d.assign(domain.size(), 0);
  d.target_measure = area;
  for (std::size_t i = 0; i < quota; ++i) d.in_d[key[i].second] = 1;
  return d;
}

}  // namespace

std::vector<BreakingReport> breaking_experiment(const BreakingOptions& options) {
  if (!(options.s > 0.0 && options.s < 1.0)) throw ValidationError("breaking_experiment: s must lie in (0, 1)");
  if (!(options.delta > 0.0 && options.delta < 1.0))
    throw ValidationError("breaking_experiment: delta must lie in (0, 1)");
  if (!(options.alpha > 0.0)) throw ValidationError("breaking_experiment: alpha must be positive");
  for (double b : options.b_list)
    if (!(b >= 1.0)) throw ValidationError("breaking_experiment: every b must be at least 1");
  const int mode = mode_number(options.delta);

  auto run_one = [&](std::size_t i) {
    const double b = options.b_list[i];
    BreakingReport rep;
    rep.s = options.s;
    rep.b = b;
    rep.delta = options.delta;
    rep.mode = mode;
    rep.alpha = options.alpha;
    rep.cells_per_width = options.cells_per_width;

    const int n = annulus_resolution(b, options.cells_per_width);
    const auto domain = build_domain(ShapeSpec::annulus(b), n);
    const auto op = assemble(domain, options.s);
    const double area = options.delta * domain.measure();

    OptimalPair radial = radial_optimize(op, options.alpha, area, options.optimize);
    rep.sigma = radial.lambda;
    rep.tau = mode_restricted_tau(op, options.alpha, radial.d, mode);
    rep.sigma_galerkin = mode_restricted_tau(op, options.alpha, radial.d, 0);
    rep.lambda_sector = sector_eigenvalue(b, mode, options.s, options.cells_per_width,
                                          options.optimize.eigen);

    MultiStartOptions ms;
    ms.seed = options.seed + i;
    ms.optimize = options.optimize;
    ms.extra_starts.push_back(trim_to_quota(radial.d, radial.u, quota_cells(domain, area)));
    ms.extra_starts.push_back(sector_complement_start(domain, area, mode));
    OptimalPair full = optimize_multistart(op, options.alpha, area, ms);
    rep.lambda_full = full.lambda;
    rep.asym = asymmetry(full.d, domain);
    rep.full_status = to_string(full.status);
    rep.full_start = full.start;
    rep.sector_verdict = rep.lambda_sector < rep.sigma;
    rep.full_verdict = rep.lambda_full < rep.sigma;
    if (options.keep_fields) {
      rep.full = std::move(full);
      rep.radial = std::move(radial);
    }
    return rep;
  };
  return parallel_map(options.b_list.size(), run_one);
}

DiskControlReport disk_control(double radius, double s, double delta, double alpha,
                               int resolution, const MultiStartOptions& options) {
  const auto domain = build_domain(ShapeSpec::disk(radius), resolution);
  const auto op = assemble(domain, s);
  const double area = delta * domain.measure();
  DiskControlReport rep;
  rep.radial = radial_optimize(op, alpha, area, options.optimize);
  MultiStartOptions ms = options;
  ms.extra_starts.push_back(trim_to_quota(rep.radial.d, rep.radial.u, quota_cells(domain, area)));
  rep.full = optimize_multistart(op, alpha, area, ms);
  rep.sigma = rep.radial.lambda;
  rep.lambda_full = rep.full.lambda;
  rep.asym = asymmetry(rep.full.d, domain);
  rep.breaking = rep.lambda_full < rep.sigma * (1.0 - 1e-3) && rep.asym > 0.05;
  return rep;
}

bool radially_monotone(const Configuration& d, const DomainMask& disk) {
  require_radial(disk, "radially_monotone");
  const auto bins = radial_bins(disk);
  const int nbins = *std::max_element(bins.begin(), bins.end()) + 1;
  std::vector<double> in(static_cast<std::size_t>(nbins), 0.0), all(static_cast<std::size_t>(nbins), 0.0);
  for (std::size_t k = 0; k < disk.size(); ++k) {
    all[static_cast<std::size_t>(bins[k])] += 1.0;
    if (d.in_d[k]) in[static_cast<std::size_t>(bins[k])] += 1.0;
  }
  double prev = 0.0;
  for (int b = 0; b < nbins; ++b) {
    if (all[static_cast<std::size_t>(b)] == 0.0) continue;
    const double f = in[static_cast<std::size_t>(b)] / all[static_cast<std::size_t>(b)];
    if (f + 1e-12 < prev) return false;
    prev = f;
  }
  return true;
}

}  // namespace fracmem

// Acceptance checks: one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <boost/math/special_functions/gamma.hpp>

#include "fracmem/symmetry.hpp"

using namespace fracmem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// Optimal pairs from unconstrained runs, checked again in criterion 8.
struct Run {
  std::string label;
  OptimalPair pair;
};
std::vector<Run> g_runs;

void record(const std::string& label, const OptimalPair& p) { g_runs.push_back({label, p}); }

double fit_slope(const std::vector<double>& b, const std::vector<double>& v) {
  const std::size_t n = b.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(b[i]);
    my += std::log(v[i]);
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    num += (std::log(b[i]) - mx) * (std::log(v[i]) - my);
    den += (std::log(b[i]) - mx) * (std::log(b[i]) - mx);
  }
  return num / den;
}

// Torsion function of the unit interval: kappa (1 - x^2)^s.
double torsion_kappa(double s) {
  using boost::math::tgamma;
  return tgamma(0.5) / (std::pow(4.0, s) * tgamma(1.0 + s) * tgamma(0.5 + s));
}

Outcome criterion1() {
  Outcome o{true, ""};
  for (double s : {0.25, 0.5, 0.75}) {
    const double kappa = torsion_kappa(s);
    std::vector<double> h, err;
    for (int n : {64, 128, 256, 512}) {
      const auto d = build_domain(ShapeSpec::interval(-1.0, 1.0), n);
      const auto op = assemble(d, s);
      const Field u = solve_spd(op, Field::Zero(n), Field::Ones(n));
      double e = 0.0;
      for (int k = 0; k < n; ++k) {
        const double x = d.grid().center(d.cell(static_cast<std::size_t>(k)))[0];
        e = std::max(e, std::abs(u[k] - kappa * std::pow(1.0 - x * x, s)));
      }
      h.push_back(d.grid().h);
      err.push_back(e / kappa);
    }
    // The oracle is the limit of the discrete solutions: the errors follow a
    // power law in h, so they extrapolate to zero.
    const double rate = fit_slope(h, err);
    double spread = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
      const double model = std::log(err[0]) + rate * std::log(h[i] / h[0]);
      spread = std::max(spread, std::abs(std::log(err[i]) - model));
    }
    const bool oracle_ok = rate > 0.2 && spread < 0.15;
    const bool ok = err[2] <= 0.05 && err[0] > err[1] && err[1] > err[2] && oracle_ok;
    o.pass = o.pass && ok;
    o.detail += fmt("s=%.2f: ", s) + fmt("%.4f ", err[0]) + fmt("%.4f ", err[1]) + fmt("%.4f", err[2]) +
                fmt(" (rate %.2f", rate) + (oracle_ok ? "); " : ", not a clean power law); ");
  }
  return o;
}

Outcome criterion2() {
  const auto d = build_domain(ShapeSpec::interval(-1.0, 1.0), 12);
  const auto op = assemble(d, 0.25);
  const double area = 4.0 * d.grid().h;
  const Eigen::MatrixXd m = op.dense_matrix();
  std::vector<std::uint8_t> mask(12, 0);
  std::fill(mask.end() - 4, mask.end(), 1);
  double brute = 1e300;
  int count = 0;
  do {
    Eigen::MatrixXd a = m;
    for (int i = 0; i < 12; ++i) a(i, i) += mask[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
    brute = std::min(brute, Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(a, Eigen::EigenvaluesOnly).eigenvalues()[0]);
    ++count;
  } while (std::next_permutation(mask.begin(), mask.end()));
  const auto best = optimize_multistart(op, 1.0, area);
  record("twelve cells", best);
  const double diff = std::abs(best.lambda - brute);
  return {count == 495 && diff <= 1e-10 && best.d.count() == 4,
          fmt("lambda=%.15f", best.lambda) + fmt(" exhaustive=%.15f", brute) + fmt(" |diff|=%.2e", diff) +
              " over " + std::to_string(count) + " configurations"};
}

Outcome criterion3() {
  const auto d = build_domain(ShapeSpec::interval(-1.0, 1.0), 64);
  const auto op = assemble(d, 0.5);
  const std::vector<double> alphas{0.5, 1.0, 2.0, 4.0};
  const std::vector<double> fractions{0.2, 0.4, 0.6, 0.8};
  const double slack = 1e-10;
  double lam[4][4];
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      const auto p = optimize_multistart(op, alphas[static_cast<std::size_t>(i)],
                                         fractions[static_cast<std::size_t>(j)] * d.measure());
      lam[i][j] = p.lambda;
      record("monotonicity", p);
    }
  }
  int violations = 0, checks = 0;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (i > 0) {
        const double da = alphas[static_cast<std::size_t>(i)] - alphas[static_cast<std::size_t>(i - 1)];
        violations += !(lam[i][j] - lam[i - 1][j] > -slack);
        violations += !((lam[i][j] - alphas[static_cast<std::size_t>(i)]) -
                            (lam[i - 1][j] - alphas[static_cast<std::size_t>(i - 1)]) < slack);
        violations += !(std::abs(lam[i][j] - lam[i - 1][j]) <= da + slack);
        checks += 3;
      }
      if (j > 0) {
        violations += !(lam[i][j] - lam[i][j - 1] > -slack);
        ++checks;
      }
    }
  }
  return {violations == 0, std::to_string(violations) + " violations in " + std::to_string(checks) +
                               fmt(" checks; Lambda range [%.6f, ", lam[0][0]) + fmt("%.6f]", lam[3][3])};
}

Outcome criterion4() {
  const auto d = build_domain(ShapeSpec::interval(-1.0, 1.0), 64);
  const auto op = assemble(d, 0.5);
  const double mu = mu_omega(op);
  std::vector<double> ab;
  double worst = 0.0;
  for (double f : {0.0, 0.25, 0.5}) {
    const double area = f * d.measure();
    const auto r = alpha_bar(op, area);
    ab.push_back(r.alpha);
    const double check = area > 0.0 ? lambda_opt(op, r.alpha, area) - r.alpha : mu - r.alpha;
    worst = std::max(worst, std::abs(check));
    if (area > 0.0) record("crossing", r.pair);
  }
  const bool start_ok = std::abs(ab[0] - mu) <= 1e-9 * mu;
  const bool inc = ab[0] < ab[1] && ab[1] < ab[2];
  return {worst < 1e-8 && start_ok && inc,
          fmt("alpha_bar = %.10f, ", ab[0]) + fmt("%.10f, ", ab[1]) + fmt("%.10f", ab[2]) +
              fmt("; mu=%.10f", mu) + fmt("; max |Lambda - alpha_bar| = %.2e", worst)};
}

Outcome criterion5() {
  const auto d = build_domain(ShapeSpec::disk(1.0), 64);
  const auto op = assemble(d, 0.5);
  const double area = 0.3 * d.measure();
  const double abar = alpha_bar(op, area).alpha;
  const double alpha = 0.5 * abar;
  const auto radial = radial_optimize(op, alpha, area);
  MultiStartOptions ms;
  ms.extra_starts.push_back(trim_to_quota(radial.d, radial.u, quota_cells(d, area)));
  const auto full = optimize_multistart(op, alpha, area, ms);
  record("ball", full);
  const double asym = asymmetry(full.d, d);
  const bool mono = radially_monotone(full.d, d);
  const double gap = std::abs(radial.lambda - full.lambda) / full.lambda;
  return {asym < 0.02 && mono && gap < 0.01,
          fmt("alpha=%.6f", alpha) + fmt(" lambda_opt=%.8f", full.lambda) + fmt(" radial=%.8f", radial.lambda) +
              fmt(" gap=%.4f", gap) + fmt(" asym=%.2e", asym) + (mono ? " monotone" : " not monotone")};
}

std::vector<BreakingReport> g_reports;

Outcome criterion6() {
  BreakingOptions o;
  o.s = 0.25;
  o.delta = 0.3;
  o.b_list = {1.0, 2.0, 4.0, 8.0};
  o.cells_per_width = 8;
  o.keep_fields = true;
  g_reports = breaking_experiment(o);
  const auto& r = g_reports.back();
  for (const auto& rep : g_reports) record("annulus b=" + fmt("%.0f", rep.b), rep.full);
  const double margin = (r.sigma - r.lambda_sector) / r.sigma;
  const bool sector = r.lambda_sector < r.sigma && margin > 1e-3;
  const bool full = r.lambda_full < r.sigma && r.asym > 0.05;
  bool ordering = true;
  for (const auto& rep : g_reports) ordering = ordering && rep.lambda_full <= rep.sigma + 1e-10;

  MultiStartOptions ms;
  const auto disk = disk_control(1.0, o.s, o.delta, o.alpha, 8 * o.cells_per_width, ms);
  record("disk control", disk.full);
  return {sector && full && ordering && !disk.breaking,
          fmt("b=%.0f:", r.b) + fmt(" sigma=%.6f", r.sigma) + fmt(" lambda_sector=%.6f", r.lambda_sector) +
              fmt(" (margin %.4f)", margin) + fmt(" lambda_full=%.6f", r.lambda_full) + fmt(" asym=%.3f", r.asym) +
              "; disk control " + (disk.breaking ? "breaks" : "radial") + fmt(" (asym %.1e)", disk.asym)};
}

Outcome criterion7() {
  std::vector<double> b, gap, peak;
  for (const auto& r : g_reports) {
    b.push_back(r.b);
    gap.push_back(r.tau - r.sigma_galerkin);
  }
  for (double bb : b) {
    RadialProfile h{bb, {}};
    for (int i = 0; i <= 16; ++i) h.values.push_back(std::sin(std::numbers::pi * i / 16.0));
    double m = 0.0;
    for (int i = 0; i <= 16; ++i) m = std::max(m, b_operator(h, bb + i / 16.0, 0.25, 1));
    peak.push_back(m);
  }
  bool positive = true;
  for (double g : gap) positive = positive && g > 0.0;
  const double s1 = positive ? fit_slope(b, gap) : std::nan("");
  const double s2 = fit_slope(b, peak);
  return {positive && std::abs(s1 + 1.5) <= 0.4 && std::abs(s2 + 1.5) <= 0.3,
          fmt("tau - sigma slope %.3f", s1) + fmt(" (tol 0.4), B[h] slope %.3f", s2) + " (tol 0.3)"};
}

Outcome criterion8() {
  std::mt19937 gen(2024);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Energy split on the annulus b = 2, N = 2, s = 0.25.
  const double b = 2.0;
  const auto ann = assemble(build_domain(ShapeSpec::annulus(b), annulus_resolution(b, 8)), 0.25);
  double worst_split = 1e300;
  for (int t = 0; t < 20; ++t) {
    RadialProfile p{b, {}};
    for (int i = 0; i < 9; ++i) p.values.push_back(unit(gen));
    const auto e = energy_split_check(p, 2, ann);
    worst_split = std::min(worst_split, (e.lhs - e.rhs) / e.rhs);
  }
  const bool split_ok = worst_split >= -1e-6;

  // Steiner symmetrisation on a symmetric rectangle.
  const auto rect = build_domain(ShapeSpec::rectangle(1.0, 0.75), 24);
  const auto rop = assemble(rect, 0.4);
  double worst_steiner = -1e300;
  for (int t = 0; t < 100; ++t) {
    Field u(static_cast<Eigen::Index>(rect.size()));
    for (auto& v : u) v = unit(gen);
    const double before = quadratic_form(rop, u);
    const double after = quadratic_form(rop, steiner(u, rect, t % 2));
    worst_steiner = std::max(worst_steiner, (after - before) / before);
  }
  const bool steiner_ok = worst_steiner <= 1e-8;

  // Bathtub optimality and positivity over the recorded runs.
  int bathtub_fail = 0, converged = 0, positive_fail = 0;
  for (const auto& run : g_runs) {
    const auto& p = run.pair;
    if (!(p.u.minCoeff() > 0.0)) ++positive_fail;
    if (p.status != OptStatus::converged) continue;
    ++converged;
    const std::size_t n = p.d.in_d.size();
    const std::size_t k = p.d.count();
    double mine = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (p.d.in_d[i]) mine += p.u[static_cast<Eigen::Index>(i)] * p.u[static_cast<Eigen::Index>(i)];
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (int t = 0; t < 200; ++t) {
      std::shuffle(idx.begin(), idx.end(), gen);
      double other = 0.0;
      for (std::size_t i = 0; i < k; ++i) other += p.u[static_cast<Eigen::Index>(idx[i])] * p.u[static_cast<Eigen::Index>(idx[i])];
      if (other < mine * (1.0 - 1e-12)) {
        ++bathtub_fail;
        break;
      }
    }
  }
  return {split_ok && steiner_ok && bathtub_fail == 0 && positive_fail == 0 && converged > 0,
          fmt("energy split worst slack %.2e", worst_split) + fmt("; steiner worst increase %.2e", worst_steiner) +
              "; bathtub " + std::to_string(converged - bathtub_fail) + "/" + std::to_string(converged) +
              " converged runs; positivity " + std::to_string(g_runs.size() - static_cast<std::size_t>(positive_fail)) +
              "/" + std::to_string(g_runs.size()) + " runs"};
}

}  // namespace

int main() {
  struct Item {
    int id;
    const char* name;
    std::function<Outcome()> fn;
    double limit_seconds;
  };
  const std::vector<Item> items{
      {1, "operator validation", criterion1, 10.0},
      {2, "global optimality on twelve cells", criterion2, 60.0},
      {3, "monotonicity suite", criterion3, 0.0},
      {4, "crossing value", criterion4, 0.0},
      {5, "ball symmetry", criterion5, 0.0},
      {6, "symmetry breaking", criterion6, 1800.0},
      {7, "decay exponents", criterion7, 0.0},
      {8, "inequality suites", criterion8, 0.0},
  };
  int failed = 0;
  for (const auto& it : items) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = it.fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (it.limit_seconds > 0.0 && secs >= it.limit_seconds) {
      o.pass = false;
      o.detail += fmt("; runtime above %.0f s", it.limit_seconds);
    }
    if (!o.pass) ++failed;
    std::printf("%s criterion %d (%s): %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", it.id, it.name, o.detail.c_str(),
                secs);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}

#include "fracmem/run.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

namespace fracmem {

std::string to_string(Command command) {
  switch (command) {
    case Command::solve: return "solve";
    case Command::optimize: return "optimize";
    case Command::alpha_bar: return "alpha-bar";
    case Command::convert_pn: return "convert-pn";
    case Command::experiment_ball: return "experiment-ball";
    case Command::experiment_annulus: return "experiment-annulus";
    case Command::validate_operator: return "validate-operator";
  }
  return "unknown";
}

Command command_from_string(const std::string& name) {
  for (auto c : {Command::solve, Command::optimize, Command::alpha_bar, Command::convert_pn,
                 Command::experiment_ball, Command::experiment_annulus, Command::validate_operator})
    if (to_string(c) == name) return c;
  throw ValidationError("unknown command '" + name + "'");
}

EigenOptions RunConfig::eigen_options() const {
  EigenOptions e;
  e.residual_tol = eigen_residual;
  e.change_tol = eigen_change;
  return e;
}

OptimizeOptions RunConfig::optimize_options() const {
  OptimizeOptions o;
  o.max_iterations = max_iterations;
  o.eigen = eigen_options();
  return o;
}

namespace {

using io::Json;

// Reads typed keys from one JSON object and rejects keys nobody asked for.
class Reader {
 public:
  Reader(const Json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
    if (!obj_.is_object()) throw ValidationError(where_ + ": expected a JSON object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return obj_.contains(key);
  }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const auto& v = obj_.at(key);
    if (!v.is_number()) throw ValidationError(name(key) + ": expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ValidationError(name(key) + ": must be finite");
    return d;
  }

  long long integer(const std::string& key, long long fallback) {
    if (!has(key)) return fallback;
    const auto& v = obj_.at(key);
    if (v.is_number_integer()) return v.get<long long>();
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (std::isfinite(d) && d == std::floor(d) && std::abs(d) < 9e15) return static_cast<long long>(d);
    }
    throw ValidationError(name(key) + ": expected an integer");
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const auto& v = obj_.at(key);
    if (!v.is_boolean()) throw ValidationError(name(key) + ": expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const auto& v = obj_.at(key);
    if (!v.is_string()) throw ValidationError(name(key) + ": expected a string");
    return v.get<std::string>();
  }

  const Json& object(const std::string& key) {
    seen_.insert(key);
    return obj_.at(key);
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) {
    if (!has(key)) return fallback;
    const auto& v = obj_.at(key);
    if (!v.is_array() || v.empty()) throw ValidationError(name(key) + ": expected a non-empty array");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number() || !std::isfinite(e.get<double>()))
        throw ValidationError(name(key) + ": expected finite numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it)
      if (!seen_.count(it.key())) throw ValidationError(name(it.key()) + ": unknown key");
  }

  std::string name(const std::string& key) const { return where_.empty() ? key : where_ + "." + key; }

 private:
  const Json& obj_;
  std::string where_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ValidationError(field + ": " + what);
}

ShapeSpec parse_shape(const Json& obj) {
  Reader r(obj, "domain");
  require(r.has("shape"), "domain.shape", "missing");
  const auto kind = shape_kind_from_string(r.string("shape", ""));
  ShapeSpec s;
  switch (kind) {
    case ShapeKind::interval:
      s = ShapeSpec::interval(r.number("lo", -1.0), r.number("hi", 1.0));
      require(s.hi > s.lo, "domain.hi", "must exceed domain.lo");
      break;
    case ShapeKind::rectangle:
      s = ShapeSpec::rectangle(r.number("half_x", 1.0), r.number("half_y", 1.0));
      require(s.half_x > 0, "domain.half_x", "must be positive");
      require(s.half_y > 0, "domain.half_y", "must be positive");
      break;
    case ShapeKind::disk:
      s = ShapeSpec::disk(r.number("radius", 1.0));
      require(s.radius > 0, "domain.radius", "must be positive");
      break;
    case ShapeKind::annulus:
      s = ShapeSpec::annulus(r.number("b", 1.0));
      require(s.b > 0, "domain.b", "must be positive");
      break;
    case ShapeKind::sector: {
      const double b = r.number("b", 1.0);
      const auto n = r.integer("sectors", 1);
      require(b > 0, "domain.b", "must be positive");
      require(n >= 1 && n <= 1000, "domain.sectors", "must be in [1, 1000]");
      s = ShapeSpec::sector(b, static_cast<int>(n));
      break;
    }
  }
  r.finish();
  return s;
}

}  // namespace

RunConfig parse_config(const io::Json& doc, Command command) {
  RunConfig c;
  c.command = command;
  Reader r(doc, "");
  if (r.has("command"))
    require(command_from_string(r.string("command", "")) == command, "command",
            "config names '" + r.string("command", "") + "' but '" + to_string(command) + "' was requested");

  if (r.has("domain")) {
    c.shape = parse_shape(r.object("domain"));
    c.shape_given = true;
  } else if (command == Command::experiment_ball) {
    c.shape = ShapeSpec::disk(1.0);
  }

  c.s = r.number("s", command == Command::experiment_annulus ? 0.25 : c.s);
  require(c.s > 0.0 && c.s < 1.0, "s", "must lie in (0, 1)");
  c.alpha_given = r.has("alpha");
  c.alpha = r.number("alpha", c.alpha);
  require(c.alpha > 0.0, "alpha", "must be positive");
  c.area_fraction = r.number("area_fraction", c.area_fraction);
  require(c.area_fraction >= 0.0 && c.area_fraction <= 1.0, "area_fraction", "must lie in [0, 1]");
  const auto res = r.integer("resolution", c.resolution);
  require(res >= 2 && res <= 4096, "resolution", "must be in [2, 4096]");
  c.resolution = static_cast<int>(res);
  const auto seed = r.integer("seed", 1);
  require(seed >= 0, "seed", "must be nonnegative");
  c.seed = static_cast<std::uint64_t>(seed);
  c.output_dir = r.string("output_dir", c.output_dir);
  require(!c.output_dir.empty(), "output_dir", "must not be empty");

  if (r.has("tolerances")) {
    Reader t(r.object("tolerances"), "tolerances");
    c.eigen_residual = t.number("eigen_residual", c.eigen_residual);
    require(c.eigen_residual > 0.0 && c.eigen_residual < 1.0, "tolerances.eigen_residual", "must lie in (0, 1)");
    c.eigen_change = t.number("eigen_change", c.eigen_change);
    require(c.eigen_change > 0.0 && c.eigen_change < 1.0, "tolerances.eigen_change", "must lie in (0, 1)");
    c.bisection = t.number("bisection", c.bisection);
    require(c.bisection > 0.0 && c.bisection < 1.0, "tolerances.bisection", "must lie in (0, 1)");
    const auto it = t.integer("max_iterations", c.max_iterations);
    require(it >= 1 && it <= 100000, "tolerances.max_iterations", "must be in [1, 100000]");
    c.max_iterations = static_cast<int>(it);
    t.finish();
  }

  if (r.has("configuration")) {
    const auto& v = r.object("configuration");
    require(v.is_array(), "configuration", "expected an array of run lengths");
    for (const auto& e : v) {
      require(e.is_number_unsigned() || (e.is_number_integer() && e.get<long long>() >= 0), "configuration",
              "run lengths must be nonnegative integers");
      c.configuration.push_back(e.get<std::size_t>());
    }
  }

  c.direction = r.string("direction", c.direction);
  require(c.direction == "forward" || c.direction == "inverse", "direction", "must be 'forward' or 'inverse'");
  if (r.has("physical")) {
    Reader p(r.object("physical"), "physical");
    c.physical.density_floor = p.number("density_floor", 0.0);
    c.physical.density_ceiling = p.number("density_ceiling", 1.0);
    c.physical.mass = p.number("mass", 0.0);
    c.physical.theta = p.number("theta", 0.0);
    p.finish();
  } else if (command == Command::convert_pn && c.direction == "forward") {
    throw ValidationError("physical: required for convert-pn in the forward direction");
  }
  if (r.has("membrane")) {
    Reader m(r.object("membrane"), "membrane");
    c.membrane.alpha = m.number("alpha", 0.0);
    c.membrane.area = m.number("area", 0.0);
    c.membrane.lambda = m.number("lambda", 0.0);
    c.theta = m.number("theta", 0.0);
    m.finish();
    require(c.theta > 0.0, "membrane.theta", "must be positive");
  } else if (command == Command::convert_pn && c.direction == "inverse") {
    throw ValidationError("membrane: required for convert-pn in the inverse direction");
  }

  c.alpha_factor = r.number("alpha_factor", c.alpha_factor);
  require(c.alpha_factor > 0.0, "alpha_factor", "must be positive");

  c.b_list = r.numbers("b_list", c.b_list);
  for (double b : c.b_list) require(b >= 1.0 && b <= 64.0, "b_list", "entries must lie in [1, 64]");
  c.delta = r.number("delta", c.delta);
  require(c.delta > 0.0 && c.delta < 1.0, "delta", "must lie in (0, 1)");
  const auto cpw = r.integer("cells_per_width", c.cells_per_width);
  require(cpw >= 2 && cpw <= 64, "cells_per_width", "must be in [2, 64]");
  c.cells_per_width = static_cast<int>(cpw);
  c.disk_control = r.boolean("disk_control", c.disk_control);

  c.s_list = r.numbers("s_list", c.s_list);
  for (double s : c.s_list) require(s > 0.0 && s < 1.0, "s_list", "entries must lie in (0, 1)");
  const auto ns = r.numbers("n_list", {64, 128, 256});
  c.n_list.clear();
  for (double n : ns) {
    require(n == std::floor(n) && n >= 2 && n <= 4096, "n_list", "entries must be integers in [2, 4096]");
    c.n_list.push_back(static_cast<int>(n));
  }
  r.finish();

  if (command == Command::experiment_ball)
    require(c.shape.kind == ShapeKind::disk, "domain.shape", "experiment-ball needs a disk");
  if (command == Command::validate_operator)
    require(c.shape.kind == ShapeKind::interval || c.shape.kind == ShapeKind::disk, "domain.shape",
            "validate-operator needs an interval or a disk");
  return c;
}

namespace {

using io::format_number;

Json grid_json(const GridSpec& g) {
  return Json{{"dim", g.dim}, {"n", g.n}, {"h", g.h}, {"origin", {g.origin[0], g.origin[1]}}};
}

Json domain_json(const DomainMask& d) {
  const auto& s = d.shape();
  Json j{{"shape", to_string(s.kind)}};
  switch (s.kind) {
    case ShapeKind::interval: j["lo"] = s.lo; j["hi"] = s.hi; break;
    case ShapeKind::rectangle: j["half_x"] = s.half_x; j["half_y"] = s.half_y; break;
    case ShapeKind::disk: j["radius"] = s.radius; break;
    case ShapeKind::annulus: j["b"] = s.b; break;
    case ShapeKind::sector: j["b"] = s.b; j["sectors"] = s.sectors; break;
  }
  j["grid"] = grid_json(d.grid());
  j["cells"] = d.size();
  j["measure"] = d.measure();
  return j;
}

Json operator_json(const FracOperator& op) {
  return Json{{"s", op.s()},
              {"c_ns", op.c_ns()},
              {"diagonal", op.diagonal()},
              {"far_tail", op.far_tail()},
              {"weights_checksum", op.weights_checksum()}};
}

Json mask_json(const Configuration& d) {
  Json runs = Json::array();
  for (auto r : run_length_encode(d.in_d)) runs.push_back(r);
  return runs;
}

Json pair_json(const OptimalPair& p, const DomainMask& domain, double alpha) {
  Json history = Json::array();
  for (double v : p.history) history.push_back(v);
  return Json{{"lambda", p.lambda},
              {"threshold", p.threshold},
              {"target_measure", p.d.target_measure},
              {"realized_measure", p.d.measure(domain.grid())},
              {"cells_in_D", p.d.count()},
              {"status", to_string(p.status)},
              {"iterations", p.iterations},
              {"start", p.start},
              {"alpha_exceeds_alpha_bar", p.lambda < alpha},
              {"history", history},
              {"D_runs", mask_json(p.d)}};
}

void add_fields(RunOutput& out, const DomainMask& domain, const Field& u, const Configuration& d) {
  out.files["fields.csv"] = io::fields_csv(domain, u, &d);
  out.files["u.svg"] = io::svg_heatmap(domain, u, 0.0, u.maxCoeff(), "u");
  Field ind(static_cast<Eigen::Index>(d.in_d.size()));
  for (std::size_t k = 0; k < d.in_d.size(); ++k) ind[static_cast<Eigen::Index>(k)] = d.in_d[k] ? 1.0 : 0.0;
  out.files["D.svg"] = io::svg_heatmap(domain, ind, 0.0, 1.0, "D");
}

Json header(const RunConfig& c) {
  return Json{{"command", to_string(c.command)}, {"seed", c.seed}};
}

RunOutput run_solve(const RunConfig& c) {
  const auto domain = build_domain(c.shape, c.resolution);
  Configuration d;
  if (c.configuration.empty()) {
    d.in_d.assign(domain.size(), 0);
  } else {
    d.in_d = run_length_decode(c.configuration);
    require(d.in_d.size() == domain.size(), "configuration",
            "run lengths sum to " + std::to_string(d.in_d.size()) + " but the domain has " +
                std::to_string(domain.size()) + " cells");
  }
  d.target_measure = d.measure(domain.grid());
  const auto op = assemble(domain, c.s);
  const auto ep = smallest_eigenpair(op, potential_of(d, c.alpha), c.eigen_options());
  RunOutput out;
  out.result = header(c);
  out.result["domain"] = domain_json(domain);
  out.result["operator"] = operator_json(op);
  out.result["alpha"] = c.alpha;
  out.result["lambda"] = ep.lambda;
  out.result["residual"] = ep.residual;
  out.result["iterations"] = ep.iterations;
  out.result["realized_measure"] = d.measure(domain.grid());
  out.result["status"] = "converged";
  out.result["D_runs"] = mask_json(d);
  add_fields(out, domain, ep.u, d);
  return out;
}

MultiStartOptions multistart(const RunConfig& c) {
  MultiStartOptions ms;
  ms.seed = c.seed;
  ms.optimize = c.optimize_options();
  return ms;
}

RunOutput run_optimize(const RunConfig& c) {
  const auto domain = build_domain(c.shape, c.resolution);
  const auto op = assemble(domain, c.s);
  const double area = c.area_fraction * domain.measure();
  const auto pair = optimize_multistart(op, c.alpha, area, multistart(c));
  RunOutput out;
  out.result = header(c);
  out.result["domain"] = domain_json(domain);
  out.result["operator"] = operator_json(op);
  out.result["alpha"] = c.alpha;
  out.result["area_fraction"] = c.area_fraction;
  out.result.update(pair_json(pair, domain, c.alpha));
  add_fields(out, domain, pair.u, pair.d);
  return out;
}

RunOutput run_alpha_bar(const RunConfig& c) {
  const auto domain = build_domain(c.shape, c.resolution);
  const auto op = assemble(domain, c.s);
  const double area = c.area_fraction * domain.measure();
  AlphaBarOptions opts;
  opts.tol = c.bisection;
  opts.multistart = multistart(c);
  const auto ab = alpha_bar(op, area, opts);
  RunOutput out;
  out.result = header(c);
  out.result["domain"] = domain_json(domain);
  out.result["operator"] = operator_json(op);
  out.result["area_fraction"] = c.area_fraction;
  out.result["alpha_bar"] = ab.alpha;
  out.result["residual"] = ab.residual;
  out.result["evaluations"] = ab.evaluations;
  out.result["mu_omega"] = mu_omega(op, c.eigen_options());
  out.result["status"] = "converged";
  out.result["pair"] = pair_json(ab.pair, domain, ab.alpha);
  add_fields(out, domain, ab.pair.u, ab.pair.d);
  return out;
}

RunOutput run_convert_pn(const RunConfig& c) {
  const auto domain = build_domain(c.shape, c.resolution);
  const double omega = domain.measure();
  RunOutput out;
  out.result = header(c);
  out.result["domain"] = domain_json(domain);
  out.result["direction"] = c.direction;
  if (c.direction == "forward") {
    const auto m = pn_convert(c.physical, omega);
    out.result["alpha"] = m.alpha;
    out.result["area"] = m.area;
    out.result["area_fraction"] = m.area / omega;
    out.result["lambda"] = m.lambda;
  } else {
    const auto p = pn_inverse(c.membrane, omega, c.theta);
    out.result["density_floor"] = p.density_floor;
    out.result["density_ceiling"] = p.density_ceiling;
    out.result["mass"] = p.mass;
    out.result["theta"] = p.theta;
  }
  out.result["status"] = "converged";
  return out;
}

RunOutput run_ball(const RunConfig& c) {
  const auto domain = build_domain(c.shape, c.resolution);
  const auto op = assemble(domain, c.s);
  const double area = c.area_fraction * domain.measure();
  double abar = 0.0;
  double alpha = c.alpha;
  if (!c.alpha_given) {
    AlphaBarOptions opts;
    opts.tol = c.bisection;
    opts.multistart = multistart(c);
    abar = alpha_bar(op, area, opts).alpha;
    alpha = c.alpha_factor * abar;
  }
  const auto rep = disk_control(c.shape.radius, c.s, c.area_fraction, alpha, c.resolution, multistart(c));
  const bool monotone = radially_monotone(rep.full.d, domain);
  const double gap = std::abs(rep.lambda_full - rep.sigma) / rep.sigma;

  RunOutput out;
  out.result = header(c);
  out.result["domain"] = domain_json(domain);
  out.result["operator"] = operator_json(op);
  out.result["area_fraction"] = c.area_fraction;
  if (!c.alpha_given) out.result["alpha_bar"] = abar;
  out.result["alpha"] = alpha;
  out.result["sigma"] = rep.sigma;
  out.result["lambda_full"] = rep.lambda_full;
  out.result["relative_gap"] = gap;
  out.result["asymmetry"] = rep.asym;
  out.result["radially_monotone"] = monotone;
  out.result["breaking"] = rep.breaking;
  out.result["full"] = pair_json(rep.full, domain, alpha);
  out.result["radial"] = pair_json(rep.radial, domain, alpha);
  out.result["status"] = to_string(rep.full.status);

  io::CsvTable t({"radius", "s", "alpha", "area_fraction", "sigma", "lambda_full", "relative_gap",
                  "asymmetry", "radially_monotone", "breaking"});
  t.add_row({format_number(c.shape.radius), format_number(c.s), format_number(alpha),
             format_number(c.area_fraction), format_number(rep.sigma), format_number(rep.lambda_full),
             format_number(gap), format_number(rep.asym), monotone ? "1" : "0", rep.breaking ? "1" : "0"});
  out.files["scan.csv"] = t.str();
  add_fields(out, domain, rep.full.u, rep.full.d);
  return out;
}

// Least-squares slope of log(y) against log(x); NaN when fewer than two
// positive points.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] > 0 && y[i] > 0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  if (lx.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(lx.size());
  my /= static_cast<double>(lx.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  return sxy / sxx;
}

RunOutput run_annulus(const RunConfig& c) {
  BreakingOptions o;
  o.s = c.s;
  o.delta = c.delta;
  o.alpha = c.alpha;
  o.b_list = c.b_list;
  o.cells_per_width = c.cells_per_width;
  o.seed = c.seed;
  o.optimize = c.optimize_options();
  o.keep_fields = true;
  auto reports = breaking_experiment(o);

  io::CsvTable t({"s", "b", "delta", "N", "alpha", "cells_per_width", "sigma", "sigma_galerkin", "tau",
                  "lambda_sector", "lambda_full", "asymmetry", "sector_verdict", "full_verdict", "status",
                  "start"});
  Json rows = Json::array();
  std::vector<double> bs, gaps;
  for (const auto& r : reports) {
    t.add_row({format_number(r.s), format_number(r.b), format_number(r.delta), std::to_string(r.mode),
               format_number(r.alpha), std::to_string(r.cells_per_width), format_number(r.sigma),
               format_number(r.sigma_galerkin), format_number(r.tau), format_number(r.lambda_sector),
               format_number(r.lambda_full), format_number(r.asym), r.sector_verdict ? "1" : "0",
               r.full_verdict ? "1" : "0", r.full_status, r.full_start});
    rows.push_back(Json{{"b", r.b},
                        {"N", r.mode},
                        {"sigma", r.sigma},
                        {"sigma_galerkin", r.sigma_galerkin},
                        {"tau", r.tau},
                        {"lambda_sector", r.lambda_sector},
                        {"lambda_full", r.lambda_full},
                        {"asymmetry", r.asym},
                        {"sector_verdict", r.sector_verdict},
                        {"full_verdict", r.full_verdict},
                        {"status", r.full_status},
                        {"start", r.full_start}});
    bs.push_back(r.b);
    gaps.push_back(r.tau - r.sigma_galerkin);
  }

  RunOutput out;
  out.result = header(c);
  out.result["s"] = c.s;
  out.result["delta"] = c.delta;
  out.result["alpha"] = c.alpha;
  out.result["cells_per_width"] = c.cells_per_width;
  out.result["reports"] = rows;
  out.result["tau_minus_sigma_slope"] = loglog_slope(bs, gaps);

  // The report for the widest annulus carries the fields.
  std::size_t widest = 0;
  for (std::size_t i = 1; i < reports.size(); ++i)
    if (reports[i].b > reports[widest].b) widest = i;
  const auto& top = reports[widest];
  const double margin = (top.sigma - top.lambda_sector) / top.sigma;
  out.result["largest_b"] = Json{{"b", top.b},
                                 {"sector_margin", margin},
                                 {"sector_verdict", top.sector_verdict},
                                 {"full_verdict", top.full_verdict},
                                 {"asymmetry", top.asym}};
  if (c.disk_control) {
    const int res = c.shape_given && c.shape.kind == ShapeKind::disk ? c.resolution : 2 * c.cells_per_width * 4;
    const double radius = c.shape_given && c.shape.kind == ShapeKind::disk ? c.shape.radius : 1.0;
    const auto disk = disk_control(radius, c.s, c.delta, c.alpha, res, multistart(c));
    out.result["disk_control"] = Json{{"radius", radius},
                                      {"resolution", res},
                                      {"sigma", disk.sigma},
                                      {"lambda_full", disk.lambda_full},
                                      {"asymmetry", disk.asym},
                                      {"breaking", disk.breaking}};
  }
  out.result["status"] = top.full_status;
  out.files["scan.csv"] = t.str();
  const auto domain = build_domain(ShapeSpec::annulus(top.b), annulus_resolution(top.b, c.cells_per_width));
  add_fields(out, domain, top.full.u, top.full.d);
  return out;
}

// Torsion function of the ball of radius R centred at m:
// kappa (R^2 - |x - m|^2)^s, kappa = Gamma(n/2) / (4^s Gamma(1 + s) Gamma(n/2 + s)).
double ball_torsion(const ShapeSpec& shape, double s, double x, double y) {
  const int n = shape.dim();
  const double kappa = boost::math::tgamma(0.5 * n) /
                       (std::pow(4.0, s) * boost::math::tgamma(1.0 + s) * boost::math::tgamma(0.5 * n + s));
  double r2 = 0.0, big = 0.0;
  if (shape.kind == ShapeKind::interval) {
    const double m = 0.5 * (shape.lo + shape.hi);
    big = 0.25 * (shape.hi - shape.lo) * (shape.hi - shape.lo);
    r2 = (x - m) * (x - m);
  } else {
    big = shape.radius * shape.radius;
    r2 = x * x + y * y;
  }
  return kappa * std::pow(std::max(0.0, big - r2), s);
}

RunOutput run_validate(const RunConfig& c) {
  io::CsvTable t({"s", "n", "cells", "torsion_error", "fft_dense_difference"});
  Json per_s = Json::array();
  bool all_pass = true;
  for (double s : c.s_list) {
    Json errors = Json::array();
    double prev = std::numeric_limits<double>::infinity();
    bool monotone = true;
    double last = 0.0;
    for (int n : c.n_list) {
      const auto domain = build_domain(c.shape, n);
      const auto op = assemble(domain, s);
      const Field ones = Field::Ones(static_cast<Eigen::Index>(domain.size()));
      const Field u = solve_spd(op, Field::Zero(ones.size()), ones);
      const Field ref = sample(domain, [&](double x, double y) { return ball_torsion(c.shape, s, x, y); });
      const double err = (u - ref).cwiseAbs().maxCoeff() / ref.cwiseAbs().maxCoeff();
      double diff = std::numeric_limits<double>::quiet_NaN();
      if (op.has_dense()) {
        const Field probe = sample(domain, [](double x, double y) { return std::cos(3.0 * x) + y; });
        diff = (op.apply_fft(probe) - op.apply_dense(probe)).cwiseAbs().maxCoeff();
      }
      t.add_row({format_number(s), std::to_string(n), std::to_string(domain.size()), format_number(err),
                 format_number(diff)});
      errors.push_back(err);
      monotone = monotone && err < prev;
      prev = err;
      last = err;
    }
    const bool pass = monotone && last <= 0.05;
    all_pass = all_pass && pass;
    per_s.push_back(Json{{"s", s}, {"errors", errors}, {"monotone", monotone}, {"pass", pass}});
  }
  RunOutput out;
  out.result = header(c);
  out.result["shape"] = c.shape.describe();
  Json ns = Json::array();
  for (int n : c.n_list) ns.push_back(n);
  out.result["n_list"] = ns;
  out.result["torsion"] = per_s;
  out.result["pass"] = all_pass;
  out.result["status"] = all_pass ? "converged" : "failed";
  out.files["scan.csv"] = t.str();
  return out;
}

}  // namespace

RunOutput execute(const RunConfig& config) {
  switch (config.command) {
    case Command::solve: return run_solve(config);
    case Command::optimize: return run_optimize(config);
    case Command::alpha_bar: return run_alpha_bar(config);
    case Command::convert_pn: return run_convert_pn(config);
    case Command::experiment_ball: return run_ball(config);
    case Command::experiment_annulus: return run_annulus(config);
    case Command::validate_operator: return run_validate(config);
  }
  throw ValidationError("unknown command");
}

void write_outputs(const RunOutput& output, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& [name, content] : output.files) io::write_atomic(dir / name, content);
  io::write_atomic(dir / "result.json", io::dump_json(output.result));
}

int run_command(const std::string& command, const std::filesystem::path& config_path,
                const std::optional<std::filesystem::path>& out_dir,
                const std::optional<std::uint64_t>& seed, std::ostream& err) {
  try {
    const auto cmd = command_from_string(command);
    std::ifstream in(config_path);
    if (!in) throw ValidationError("config: cannot read '" + config_path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    io::Json doc;
    try {
      doc = io::Json::parse(buf.str());
    } catch (const io::Json::parse_error& e) {
      throw ValidationError("config: " + std::string(e.what()));
    }
    auto config = parse_config(doc, cmd);
    if (seed) config.seed = *seed;
    const auto dir = out_dir ? *out_dir : std::filesystem::path(config.output_dir);
    const auto output = execute(config);
    write_outputs(output, dir);
    return kExitOk;
  } catch (const ValidationError& e) {
    err << "fracmem: validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const SolverError& e) {
    err << "fracmem: solver failure: " << e.what() << " (best residual " << format_number(e.best_residual())
        << ")\n";
    return kExitSolver;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "fracmem: output error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "fracmem: solver failure: " << e.what() << '\n';
    return kExitSolver;
  }
}

}  // namespace fracmem

#include "fracmem/fracop.hpp"

#include <cmath>
#include <complex>
#include <cstdio>
#include <cstring>
#include <mutex>
#include <numbers>
#include <optional>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <fftw3.h>

namespace fracmem {

namespace {

using boost::math::quadrature::gauss_kronrod;

// FFTW planning is not thread safe; execution with the new-array API is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct NeumaierSum {
  double sum = 0.0;
  double comp = 0.0;
  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      comp += (sum - t) + v;
    else
      comp += (v - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

// integral_0^{pi/4} f(phi) dphi for smooth f.
template <class F>
double quarter_octant(F&& f) {
  return gauss_kronrod<double, 31>::integrate(f, 0.0, std::numbers::pi / 4.0, 15, 1e-15);
}

// Kernel integral over the unit cell centred at (kx, ky), excluding the origin cell.
double unit_cell_integral_2d(int kx, int ky, double s) {
  const double x0 = kx - 0.5, x1 = kx + 0.5;
  const double y0 = ky - 0.5, y1 = ky + 0.5;
  auto inner = [&](double x) {
    auto f = [&](double y) { return std::pow(x * x + y * y, -1.0 - s); };
    return gauss_kronrod<double, 31>::integrate(f, y0, y1, 20, 1e-13);
  };
  return gauss_kronrod<double, 31>::integrate(inner, x0, x1, 20, 1e-12);
}

constexpr int kNearField = 2;

}  // namespace

double kernel_constant(int n, double s) {
  if (n != 1 && n != 2) throw ValidationError("kernel_constant: dimension must be 1 or 2");
  if (!(s > 0.0 && s < 1.0)) throw ValidationError("kernel_constant: s must lie in (0, 1)");
  using boost::math::tgamma;
  const double half_n = 0.5 * n;
  return std::pow(4.0, s) * s * tgamma(half_n + s) /
         (std::pow(std::numbers::pi, half_n) * tgamma(1.0 - s));
}

struct FracOperator::Impl {
  double s = 0.5;
  double c_ns = 0.0;
  GridSpec grid;
  std::optional<DomainMask> domain;
  // Weights by |kx|, |ky| in [0, n-1]; 1D uses row 0 only.
  std::vector<double> table;
  double diag = 0.0;
  double far_tail = 0.0;
  Field tail;
  std::optional<Eigen::MatrixXd> dense;

  // FFT path: padded length 2n per axis.
  int padded = 0;
  std::size_t spectrum_size = 0;
  std::vector<std::complex<double>> kernel_hat;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  ~Impl() {
    std::lock_guard lock(fftw_planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }

  double w(int kx, int ky) const {
    kx = std::abs(kx);
    ky = std::abs(ky);
    if (kx >= grid.n || ky >= grid.n) return 0.0;
    if (grid.dim == 1 && ky != 0) return 0.0;
    return table[static_cast<std::size_t>(kx) + static_cast<std::size_t>(grid.n) * ky];
  }

  std::size_t padded_cells() const {
    return grid.dim == 1 ? static_cast<std::size_t>(padded)
                         : static_cast<std::size_t>(padded) * padded;
  }
};

namespace {

void compute_weights(FracOperator::Impl& op) {
  const int n = op.grid.n;
  const double s = op.s;
  const double c = op.c_ns;
  const double scale = std::pow(op.grid.h, -2.0 * s);
  op.table.assign(static_cast<std::size_t>(n) * (op.grid.dim == 1 ? 1 : n), 0.0);

  if (op.grid.dim == 1) {
    for (int k = 1; k < n; ++k) {
      op.table[k] = c * (std::pow(k - 0.5, -2.0 * s) - std::pow(k + 0.5, -2.0 * s)) / (2.0 * s);
    }
    // Self-cell second-order term, folded into the nearest neighbours.
    op.table[1] += c * std::pow(0.5, 2.0 - 2.0 * s) / (2.0 - 2.0 * s);
    op.far_tail = c * 2.0 * std::pow(n - 0.5, -2.0 * s) / (2.0 * s);
  } else {
    for (int ky = 0; ky < n; ++ky) {
      for (int kx = 0; kx < n; ++kx) {
        if (kx == 0 && ky == 0) continue;
        double v;
        if (ky > kx && ky <= kNearField) {
          v = op.table[static_cast<std::size_t>(ky) + static_cast<std::size_t>(n) * kx];
        } else if (std::max(kx, ky) <= kNearField) {
          v = c * unit_cell_integral_2d(kx, ky, s);
        } else {
          v = c * std::pow(static_cast<double>(kx) * kx + static_cast<double>(ky) * ky, -1.0 - s);
        }
        op.table[static_cast<std::size_t>(kx) + static_cast<std::size_t>(n) * ky] = v;
      }
    }
    const double p = 2.0 - 2.0 * s;
    const double self = 8.0 * quarter_octant([p](double phi) { return std::pow(0.5 / std::cos(phi), p); });
    const double gamma = 0.25 * c * self / p;
    op.table[1] += gamma;
    op.table[static_cast<std::size_t>(n)] += gamma;
    const double octant = quarter_octant([s](double phi) { return std::pow(std::cos(phi), 2.0 * s); });
    op.far_tail = c * std::pow(n - 0.5, -2.0 * s) / (2.0 * s) * 8.0 * octant;
  }

  for (auto& v : op.table) v *= scale;
  op.far_tail *= scale;

  NeumaierSum total;
  if (op.grid.dim == 1) {
    for (int k = 1; k < n; ++k) total.add(2.0 * op.table[k]);
  } else {
    for (int ky = -(n - 1); ky < n; ++ky)
      for (int kx = -(n - 1); kx < n; ++kx) total.add(op.w(kx, ky));
  }
  total.add(op.far_tail);
  op.diag = total.value();
}

void compute_tail(FracOperator::Impl& op) {
  const auto& dom = *op.domain;
  const auto& grid = op.grid;
  op.tail.resize(static_cast<Eigen::Index>(dom.size()));
  for (std::size_t a = 0; a < dom.size(); ++a) {
    const auto ia = grid.index(dom.cell(a));
    NeumaierSum inner;
    for (std::size_t b = 0; b < dom.size(); ++b) {
      if (a == b) continue;
      const auto ib = grid.index(dom.cell(b));
      inner.add(op.w(ia[0] - ib[0], ia[1] - ib[1]));
    }
    op.tail[static_cast<Eigen::Index>(a)] = op.diag - inner.value();
  }
}

void build_dense(FracOperator::Impl& op) {
  const auto& dom = *op.domain;
  const auto m = static_cast<Eigen::Index>(dom.size());
  Eigen::MatrixXd mat(m, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const auto ij = op.grid.index(dom.cell(static_cast<std::size_t>(j)));
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto ii = op.grid.index(dom.cell(static_cast<std::size_t>(i)));
      mat(i, j) = (i == j) ? op.diag : -op.w(ii[0] - ij[0], ii[1] - ij[1]);
    }
  }
  op.dense = std::move(mat);
}

void setup_fft(FracOperator::Impl& op) {
  const int n = op.grid.n;
  op.padded = 2 * n;
  const int p = op.padded;
  const std::size_t real_size = op.padded_cells();
  op.spectrum_size = op.grid.dim == 1 ? static_cast<std::size_t>(p / 2 + 1)
                                      : static_cast<std::size_t>(p) * (p / 2 + 1);

  double* real = fftw_alloc_real(real_size);
  fftw_complex* spec = fftw_alloc_complex(op.spectrum_size);
  {
    std::lock_guard lock(fftw_planner_mutex());
    if (op.grid.dim == 1) {
      op.forward = fftw_plan_dft_r2c_1d(p, real, spec, FFTW_ESTIMATE);
      op.backward = fftw_plan_dft_c2r_1d(p, spec, real, FFTW_ESTIMATE);
    } else {
      op.forward = fftw_plan_dft_r2c_2d(p, p, real, spec, FFTW_ESTIMATE);
      op.backward = fftw_plan_dft_c2r_2d(p, p, spec, real, FFTW_ESTIMATE);
    }
  }
  std::fill(real, real + real_size, 0.0);
  auto wrap = [p](int k) { return k < 0 ? k + p : k; };
  if (op.grid.dim == 1) {
    for (int k = -(n - 1); k < n; ++k) real[wrap(k)] = op.w(k, 0);
  } else {
    // Row-major with the y index slowest matches grid cell order.
    for (int ky = -(n - 1); ky < n; ++ky)
      for (int kx = -(n - 1); kx < n; ++kx)
        real[static_cast<std::size_t>(wrap(ky)) * p + wrap(kx)] = op.w(kx, ky);
  }
  fftw_execute_dft_r2c(op.forward, real, spec);
  op.kernel_hat.resize(op.spectrum_size);
  for (std::size_t i = 0; i < op.spectrum_size; ++i)
    op.kernel_hat[i] = {spec[i][0], spec[i][1]};
  fftw_free(real);
  fftw_free(spec);
}

void check_size(const FracOperator& op, const Field& field) {
  if (static_cast<std::size_t>(field.size()) != op.size()) {
    throw ValidationError("field has " + std::to_string(field.size()) +
                          " entries but the domain has " + std::to_string(op.size()) + " cells");
  }
}

}  // namespace

FracOperator assemble(const DomainMask& domain, double s, const AssemblyOptions& options) {
  if (domain.size() == 0) throw ValidationError("assemble: empty domain");
  if (!(s > 0.0 && s < 1.0)) throw ValidationError("assemble: s must lie in (0, 1)");
  auto impl = std::make_shared<FracOperator::Impl>();
  impl->s = s;
  impl->grid = domain.grid();
  impl->domain.emplace(domain);
  impl->c_ns = kernel_constant(domain.grid().dim, s);
  compute_weights(*impl);
  compute_tail(*impl);
  if (domain.size() <= options.dense_limit) build_dense(*impl);
  setup_fft(*impl);
  return FracOperator(std::move(impl));
}

double FracOperator::s() const { return impl_->s; }
double FracOperator::c_ns() const { return impl_->c_ns; }
const GridSpec& FracOperator::grid() const { return impl_->grid; }
const DomainMask& FracOperator::domain() const { return *impl_->domain; }
double FracOperator::diagonal() const { return impl_->diag; }
double FracOperator::weight(int kx, int ky) const {
  if (kx == 0 && ky == 0) return 0.0;
  return impl_->w(kx, ky);
}
double FracOperator::far_tail() const { return impl_->far_tail; }
const Field& FracOperator::tail() const { return impl_->tail; }
bool FracOperator::has_dense() const { return impl_->dense.has_value(); }

Eigen::MatrixXd FracOperator::dense_matrix() const {
  if (impl_->dense) return *impl_->dense;
  FracOperator::Impl scratch;
  scratch.grid = impl_->grid;
  scratch.domain.emplace(*impl_->domain);
  scratch.table = impl_->table;
  scratch.diag = impl_->diag;
  build_dense(scratch);
  return std::move(*scratch.dense);
}

Field FracOperator::apply(const Field& field) const {
  return has_dense() ? apply_dense(field) : apply_fft(field);
}

Field FracOperator::apply_dense(const Field& field) const {
  check_size(*this, field);
  if (impl_->dense) return (*impl_->dense) * field;
  return dense_matrix() * field;
}

Field FracOperator::apply_fft(const Field& field) const {
  check_size(*this, field);
  const auto& op = *impl_;
  const auto& dom = *op.domain;
  const int p = op.padded;
  const std::size_t real_size = op.padded_cells();

  double* real = fftw_alloc_real(real_size);
  fftw_complex* spec = fftw_alloc_complex(op.spectrum_size);
  std::fill(real, real + real_size, 0.0);
  auto padded_index = [&](std::size_t cell) {
    if (op.grid.dim == 1) return cell;
    const auto ij = op.grid.index(cell);
    return static_cast<std::size_t>(ij[1]) * p + ij[0];
  };
  for (std::size_t k = 0; k < dom.size(); ++k)
    real[padded_index(dom.cell(k))] = field[static_cast<Eigen::Index>(k)];

  fftw_execute_dft_r2c(op.forward, real, spec);
  for (std::size_t i = 0; i < op.spectrum_size; ++i) {
    const std::complex<double> v{spec[i][0], spec[i][1]};
    const auto prod = v * op.kernel_hat[i];
    spec[i][0] = prod.real();
    spec[i][1] = prod.imag();
  }
  fftw_execute_dft_c2r(op.backward, spec, real);

  const double norm = 1.0 / static_cast<double>(real_size);
  Field out(field.size());
  for (std::size_t k = 0; k < dom.size(); ++k) {
    const auto e = static_cast<Eigen::Index>(k);
    out[e] = op.diag * field[e] - norm * real[padded_index(dom.cell(k))];
  }
  fftw_free(real);
  fftw_free(spec);
  return out;
}

std::string FracOperator::weights_checksum() const {
  std::uint64_t hash = 1469598103934665603ULL;
  auto mix = [&hash](const void* data, std::size_t bytes) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < bytes; ++i) {
      hash ^= p[i];
      hash *= 1099511628211ULL;
    }
  };
  mix(impl_->table.data(), impl_->table.size() * sizeof(double));
  mix(&impl_->far_tail, sizeof(double));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

double l2_dot(const GridSpec& grid, const Field& a, const Field& b) {
  return a.dot(b) * grid.cell_volume();
}

double l2_norm(const GridSpec& grid, const Field& a) {
  return std::sqrt(l2_dot(grid, a, a));
}

double quadratic_form(const FracOperator& op, const Field& field) {
  return field.dot(op.apply(field)) * op.grid().cell_volume();
}

double rayleigh(const FracOperator& op, double alpha, const Configuration& config,
                const Field& field) {
  if (config.in_d.size() != op.size())
    throw ValidationError("rayleigh: configuration does not match the domain");
  const double denom = l2_dot(op.grid(), field, field);
  if (!(denom > 0.0)) throw ValidationError("rayleigh: field vanishes on the domain");
  double potential = 0.0;
  for (std::size_t k = 0; k < op.size(); ++k) {
    if (config.in_d[k]) {
      const double v = field[static_cast<Eigen::Index>(k)];
      potential += v * v;
    }
  }
  potential *= op.grid().cell_volume();
  return (quadratic_form(op, field) + alpha * potential) / denom;
}

Eigen::VectorXd to_grid(const DomainMask& domain, const Field& field) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(domain.grid().cells()));
  for (std::size_t k = 0; k < domain.size(); ++k)
    out[static_cast<Eigen::Index>(domain.cell(k))] = field[static_cast<Eigen::Index>(k)];
  return out;
}

Field from_grid(const DomainMask& domain, const Eigen::VectorXd& values) {
  if (static_cast<std::size_t>(values.size()) != domain.grid().cells())
    throw ValidationError("from_grid: value count does not match the grid");
  Field out(static_cast<Eigen::Index>(domain.size()));
  for (std::size_t k = 0; k < domain.size(); ++k)
    out[static_cast<Eigen::Index>(k)] = values[static_cast<Eigen::Index>(domain.cell(k))];
  return out;
}

}  // namespace fracmem

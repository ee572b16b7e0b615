#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "fracmem/fracop.hpp"

using namespace fracmem;

namespace {

Field random_field(std::size_t n, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Field f(static_cast<Eigen::Index>(n));
  for (auto& v : f) v = dist(gen);
  return f;
}

// (-Delta)^s exp(-x^2) through its Fourier representation.
double gaussian_reference(double x, double s) {
  auto f = [&](double xi) {
    return std::pow(xi, 2.0 * s) * std::exp(-0.25 * xi * xi) * std::cos(xi * x);
  };
  using boost::math::quadrature::gauss_kronrod;
  double total = 0.0;
  for (int k = 0; k < 16; ++k) total += gauss_kronrod<double, 61>::integrate(f, k, k + 1.0, 15, 1e-13);
  return total / std::sqrt(std::numbers::pi);
}

}  // namespace

TEST_CASE("kernel constant") {
  CHECK(kernel_constant(1, 0.5) == doctest::Approx(1.0 / std::numbers::pi).epsilon(1e-14));
  for (int i = 1; i <= 9; ++i) CHECK(kernel_constant(1, 0.1 * i) > 0.0);

  using Big = boost::multiprecision::cpp_bin_float_50;
  const Big s("0.25");
  const Big ref = boost::multiprecision::pow(Big(4), s) * s * boost::multiprecision::tgamma(Big(1) + s) /
                  (boost::math::constants::pi<Big>() * boost::multiprecision::tgamma(Big(1) - s));
  CHECK(kernel_constant(2, 0.25) == doctest::Approx(ref.convert_to<double>()).epsilon(1e-14));

  CHECK_THROWS_AS(kernel_constant(1, 0.0), ValidationError);
  CHECK_THROWS_AS(kernel_constant(3, 0.5), ValidationError);
}

TEST_CASE("one-dimensional weights integrate the kernel over cells") {
  const double s = 0.3;
  const auto d = build_domain(ShapeSpec::interval(-1.0, 1.0), 32);
  const auto op = assemble(d, s);
  const double h = d.grid().h;
  using boost::math::quadrature::gauss_kronrod;
  for (int k = 2; k < 10; ++k) {
    const double ref = op.c_ns() * gauss_kronrod<double, 31>::integrate(
                                       [&](double y) { return std::pow(y, -1.0 - 2.0 * s); },
                                       (k - 0.5) * h, (k + 0.5) * h, 10, 1e-14);
    CHECK(op.weight(k) == doctest::Approx(ref).epsilon(1e-12));
    CHECK(op.weight(-k) == op.weight(k));
  }
  CHECK(op.weight(0) == 0.0);
  CHECK(op.weight(40) == 0.0);
}

TEST_CASE("operator matrix is symmetric with constant diagonal") {
  for (const auto& shape : {ShapeSpec::interval(-1.0, 1.0), ShapeSpec::disk(1.0)}) {
    const auto d = build_domain(shape, shape.dim() == 1 ? 40 : 16);
    const auto op = assemble(d, 0.4);
    const auto m = op.dense_matrix();
    CHECK((m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-15 * m.cwiseAbs().maxCoeff());
    CHECK((m.diagonal().array() - op.diagonal()).abs().maxCoeff() == 0.0);
  }
}

TEST_CASE("constant field maps to a positive exterior term") {
  const auto d = build_domain(ShapeSpec::disk(1.0), 20);
  const auto op = assemble(d, 0.5);
  const Field one = Field::Ones(static_cast<Eigen::Index>(d.size()));
  const Field m1 = op.apply(one);
  CHECK(m1.minCoeff() > 0.0);
  CHECK((m1 - op.tail()).cwiseAbs().maxCoeff() <= 1e-12 * op.diagonal());
}

TEST_CASE("apply is linear and vanishes on zero") {
  const auto d = build_domain(ShapeSpec::disk(1.0), 24);
  const auto op = assemble(d, 0.6);
  const Field u = random_field(d.size(), 1);
  const Field v = random_field(d.size(), 2);
  const Field lhs = op.apply(2.5 * u - 0.75 * v);
  const Field rhs = 2.5 * op.apply(u) - 0.75 * op.apply(v);
  CHECK((lhs - rhs).norm() <= 1e-12 * rhs.norm());
  CHECK(op.apply(Field::Zero(static_cast<Eigen::Index>(d.size()))).norm() == 0.0);
  CHECK_THROWS_AS(op.apply(Field::Zero(3)), ValidationError);
}

TEST_CASE("convolution path matches the dense matrix") {
  for (const auto& shape : {ShapeSpec::rectangle(1.0, 1.0), ShapeSpec::disk(1.0)}) {
    const auto d = build_domain(shape, 16);
    const auto op = assemble(d, 0.35);
    const auto m = op.dense_matrix();
    const Field u = random_field(d.size(), 3);
    const Field dense = m * u;
    const Field fft = op.apply_fft(u);
    const double norm_m = m.cwiseAbs().rowwise().sum().maxCoeff();
    CHECK((dense - fft).cwiseAbs().maxCoeff() <= 1e-12 * norm_m * u.cwiseAbs().maxCoeff());
  }
  const auto d1 = build_domain(ShapeSpec::interval(0.0, 3.0), 50);
  const auto op1 = assemble(d1, 0.7);
  const Field u1 = random_field(d1.size(), 4);
  CHECK((op1.apply_dense(u1) - op1.apply_fft(u1)).cwiseAbs().maxCoeff() <= 1e-12 * op1.diagonal());
}

TEST_CASE("large domains use the convolution path") {
  const auto d = build_domain(ShapeSpec::disk(1.0), 64);
  const auto op = assemble(d, 0.5);
  CHECK_FALSE(op.has_dense());
  const auto small = assemble(build_domain(ShapeSpec::disk(1.0), 16), 0.5);
  CHECK(small.has_dense());
}

TEST_CASE("quadratic form equals the explicit double sum") {
  const auto d = build_domain(ShapeSpec::interval(-1.0, 1.0), 8);
  const auto op = assemble(d, 0.45);
  const Field u = random_field(8, 5);
  const double h = d.grid().h;
  double sum = 0.0;
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j)
      if (i != j) sum += op.weight(i - j) * (u[i] - u[j]) * (u[i] - u[j]) * h / 2.0;
    sum += op.tail()[i] * u[i] * u[i] * h;
  }
  CHECK(quadratic_form(op, u) == doctest::Approx(sum).epsilon(1e-12));
  CHECK(quadratic_form(op, Field::Zero(8)) == 0.0);
  CHECK(quadratic_form(op, 3.0 * u) == doctest::Approx(9.0 * quadratic_form(op, u)).epsilon(1e-13));
}

TEST_CASE("operator approximates the fractional Laplacian of a Gaussian") {
  for (double s : {0.25, 0.5, 0.75}) {
    double prev = 1e300;
    for (int n : {256, 512}) {
      const auto d = build_domain(ShapeSpec::interval(-8.0, 8.0), n);
      const auto op = assemble(d, s);
      const Field u = sample(d, [](double x, double) { return std::exp(-x * x); });
      const Field mu = op.apply(u);
      double err = 0.0;
      double scale = 0.0;
      for (std::size_t k = 0; k < d.size(); ++k) {
        const double x = d.grid().center(d.cell(k))[0];
        if (std::abs(x) > 3.0) continue;
        const double ref = gaussian_reference(x, s);
        err = std::max(err, std::abs(mu[static_cast<Eigen::Index>(k)] - ref));
        scale = std::max(scale, std::abs(ref));
      }
      CAPTURE(s);
      CAPTURE(n);
      CHECK(err < prev);
      if (n == 512) CHECK(err < 0.05 * scale);
      prev = err;
    }
  }
}

TEST_CASE("rayleigh quotient") {
  const auto d = build_domain(ShapeSpec::interval(-1.0, 1.0), 32);
  const auto op = assemble(d, 0.5);
  const Field u = random_field(d.size(), 6).cwiseAbs();
  Configuration all{std::vector<std::uint8_t>(d.size(), 1), d.measure()};
  Configuration none{std::vector<std::uint8_t>(d.size(), 0), 0.0};
  CHECK(rayleigh(op, 2.0, all, u) == doctest::Approx(rayleigh(op, 0.0, none, u) + 2.0).epsilon(1e-13));
  CHECK(rayleigh(op, 0.0, none, u) ==
        doctest::Approx(quadratic_form(op, u) / (l2_norm(d.grid(), u) * l2_norm(d.grid(), u))).epsilon(1e-13));
}

TEST_CASE("grid scatter round trip") {
  const auto d = build_domain(ShapeSpec::disk(1.0), 12);
  const Field u = random_field(d.size(), 7);
  const auto g = to_grid(d, u);
  CHECK(g.size() == static_cast<Eigen::Index>(d.grid().cells()));
  CHECK(from_grid(d, g) == u);
}

TEST_CASE("assembly validation") {
  const auto d = build_domain(ShapeSpec::interval(-1.0, 1.0), 8);
  CHECK_THROWS_AS(assemble(d, 1.0), ValidationError);
  CHECK_THROWS_AS(assemble(d, -0.5), ValidationError);
  CHECK(assemble(d, 0.5).weights_checksum() == assemble(d, 0.5).weights_checksum());
  CHECK(assemble(d, 0.5).weights_checksum() != assemble(d, 0.4).weights_checksum());
}

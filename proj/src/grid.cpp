#include "fracmem/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace fracmem {

std::array<double, 2> GridSpec::center(std::size_t idx) const {
  const auto ij = index(idx);
  return {origin[0] + ij[0] * h, dim == 1 ? 0.0 : origin[1] + ij[1] * h};
}

void GridSpec::validate() const {
  if (dim != 1 && dim != 2) throw ValidationError("grid: dim must be 1 or 2");
  if (n < 2) throw ValidationError("grid: n must be at least 2");
  if (!(h > 0.0) || !std::isfinite(h)) throw ValidationError("grid: h must be positive");
}

std::string to_string(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::interval: return "interval";
    case ShapeKind::rectangle: return "rectangle";
    case ShapeKind::disk: return "disk";
    case ShapeKind::annulus: return "annulus";
    case ShapeKind::sector: return "sector";
  }
  return "unknown";
}

ShapeKind shape_kind_from_string(const std::string& name) {
  if (name == "interval") return ShapeKind::interval;
  if (name == "rectangle") return ShapeKind::rectangle;
  if (name == "disk") return ShapeKind::disk;
  if (name == "annulus") return ShapeKind::annulus;
  if (name == "sector") return ShapeKind::sector;
  throw ValidationError("unknown shape '" + name + "'");
}

ShapeSpec ShapeSpec::interval(double lo, double hi) {
  ShapeSpec s;
  s.kind = ShapeKind::interval;
  s.lo = lo;
  s.hi = hi;
  return s;
}

ShapeSpec ShapeSpec::rectangle(double half_x, double half_y) {
  ShapeSpec s;
  s.kind = ShapeKind::rectangle;
  s.half_x = half_x;
  s.half_y = half_y;
  return s;
}

ShapeSpec ShapeSpec::disk(double radius) {
  ShapeSpec s;
  s.kind = ShapeKind::disk;
  s.radius = radius;
  return s;
}

ShapeSpec ShapeSpec::annulus(double b) {
  ShapeSpec s;
  s.kind = ShapeKind::annulus;
  s.b = b;
  return s;
}

ShapeSpec ShapeSpec::sector(double b, int sectors) {
  ShapeSpec s;
  s.kind = ShapeKind::sector;
  s.b = b;
  s.sectors = sectors;
  return s;
}

double ShapeSpec::inner_radius() const {
  switch (kind) {
    case ShapeKind::annulus:
    case ShapeKind::sector: return b;
    default: return 0.0;
  }
}

double ShapeSpec::outer_radius() const {
  switch (kind) {
    case ShapeKind::disk: return radius;
    case ShapeKind::annulus:
    case ShapeKind::sector: return b + 1.0;
    case ShapeKind::rectangle: return std::hypot(half_x, half_y);
    case ShapeKind::interval: return std::max(std::abs(lo), std::abs(hi));
  }
  return 0.0;
}

std::string ShapeSpec::describe() const {
  std::ostringstream os;
  os << to_string(kind);
  switch (kind) {
    case ShapeKind::interval: os << "(" << lo << ", " << hi << ")"; break;
    case ShapeKind::rectangle: os << "(" << half_x << " x " << half_y << ")"; break;
    case ShapeKind::disk: os << "(radius " << radius << ")"; break;
    case ShapeKind::annulus: os << "(b " << b << ")"; break;
    case ShapeKind::sector: os << "(b " << b << ", N " << sectors << ")"; break;
  }
  return os.str();
}

namespace {

void validate_shape(const ShapeSpec& s) {
  auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
  switch (s.kind) {
    case ShapeKind::interval:
      if (!(s.hi > s.lo) || !std::isfinite(s.lo) || !std::isfinite(s.hi))
        throw ValidationError("interval: need lo < hi");
      break;
    case ShapeKind::rectangle:
      if (!positive(s.half_x) || !positive(s.half_y))
        throw ValidationError("rectangle: half widths must be positive");
      break;
    case ShapeKind::disk:
      if (!positive(s.radius)) throw ValidationError("disk: radius must be positive");
      break;
    case ShapeKind::annulus:
      if (!positive(s.b)) throw ValidationError("annulus: b must be positive");
      break;
    case ShapeKind::sector:
      if (!positive(s.b)) throw ValidationError("sector: b must be positive");
      if (s.sectors < 1) throw ValidationError("sector: N must be at least 1");
      break;
  }
}

bool inside_shape(const ShapeSpec& s, double x, double y) {
  switch (s.kind) {
    case ShapeKind::interval: return x > s.lo && x < s.hi;
    case ShapeKind::rectangle: return std::abs(x) < s.half_x && std::abs(y) < s.half_y;
    case ShapeKind::disk: return x * x + y * y < s.radius * s.radius;
    case ShapeKind::annulus: {
      const double r = std::hypot(x, y);
      return r > s.b && r < s.b + 1.0;
    }
    case ShapeKind::sector: {
      const double r = std::hypot(x, y);
      if (!(r > s.b && r < s.b + 1.0)) return false;
      double theta = std::atan2(y, x);
      return theta >= 0.0 && theta <= std::numbers::pi / s.sectors;
    }
  }
  return false;
}

}  // namespace

DomainMask::DomainMask(GridSpec grid, std::vector<std::uint8_t> inside, ShapeSpec shape)
    : grid_(grid), inside_(std::move(inside)), shape_(shape) {
  grid_.validate();
  if (inside_.size() != grid_.cells())
    throw ValidationError("domain mask size does not match grid");
  local_.assign(inside_.size(), -1);
  for (std::size_t c = 0; c < inside_.size(); ++c) {
    if (inside_[c]) {
      local_[c] = static_cast<std::ptrdiff_t>(cells_.size());
      cells_.push_back(c);
    }
  }
}

double DomainMask::measure() const {
  return static_cast<double>(cells_.size()) * grid_.cell_volume();
}

double DomainMask::radius_of(std::size_t k) const {
  const auto c = grid_.center(cells_[k]);
  return std::hypot(c[0], c[1]);
}

double DomainMask::angle_of(std::size_t k) const {
  const auto c = grid_.center(cells_[k]);
  double theta = std::atan2(c[1], c[0]);
  if (theta < 0.0) theta += 2.0 * std::numbers::pi;
  return theta;
}

DomainMask build_domain(const ShapeSpec& shape, int resolution) {
  if (resolution < 2) throw ValidationError("build_domain: resolution must be at least 2");
  validate_shape(shape);

  GridSpec grid;
  grid.n = resolution;
  if (shape.kind == ShapeKind::interval) {
    grid.dim = 1;
    grid.h = (shape.hi - shape.lo) / resolution;
    grid.origin = {shape.lo + 0.5 * grid.h, 0.0};
  } else {
    double half = 0.0;
    switch (shape.kind) {
      case ShapeKind::rectangle: half = std::max(shape.half_x, shape.half_y); break;
      case ShapeKind::disk: half = shape.radius; break;
      default: half = shape.b + 1.0; break;
    }
    grid.dim = 2;
    grid.h = 2.0 * half / resolution;
    const double o = -half + 0.5 * grid.h;
    grid.origin = {o, o};
  }

  std::vector<std::uint8_t> inside(grid.cells(), 0);
  std::size_t count = 0;
  for (std::size_t c = 0; c < inside.size(); ++c) {
    const auto x = grid.center(c);
    if (inside_shape(shape, x[0], x[1])) {
      inside[c] = 1;
      ++count;
    }
  }
  if (count == 0) {
    throw ValidationError("build_domain: no cell centre of " + shape.describe() +
                          " at resolution " + std::to_string(resolution) +
                          " lies inside the shape");
  }
  return DomainMask(grid, std::move(inside), shape);
}

double measure(const std::vector<std::uint8_t>& mask, const GridSpec& grid) {
  const auto count = static_cast<std::size_t>(std::count_if(
      mask.begin(), mask.end(), [](std::uint8_t v) { return v != 0; }));
  return static_cast<double>(count) * grid.cell_volume();
}

std::size_t Configuration::count() const {
  return static_cast<std::size_t>(
      std::count_if(in_d.begin(), in_d.end(), [](std::uint8_t v) { return v != 0; }));
}

std::vector<std::size_t> run_length_encode(const std::vector<std::uint8_t>& mask) {
  std::vector<std::size_t> runs;
  std::uint8_t current = 0;
  std::size_t length = 0;
  for (auto v : mask) {
    const std::uint8_t bit = v ? 1 : 0;
    if (bit != current) {
      runs.push_back(length);
      current = bit;
      length = 0;
    }
    ++length;
  }
  runs.push_back(length);
  return runs;
}

std::vector<std::uint8_t> run_length_decode(const std::vector<std::size_t>& runs) {
  std::vector<std::uint8_t> mask;
  std::uint8_t bit = 0;
  for (auto len : runs) {
    mask.insert(mask.end(), len, bit);
    bit ^= 1;
  }
  return mask;
}

}  // namespace fracmem

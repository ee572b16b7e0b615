#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace fracmem {

/// Thrown when an input violates a documented precondition.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when an iterative numerical method fails to meet its tolerance.
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what, double best_residual = 0.0)
      : std::runtime_error(what), best_residual_(best_residual) {}
  double best_residual() const { return best_residual_; }

 private:
  double best_residual_;
};

/// Uniform cell-centred grid in one or two dimensions.
///
/// Cell (i) or (i, j) has centre origin + index * h along each axis. Linear
/// cell indices are row-major with the x index fastest: idx = i + n * j.
struct GridSpec {
  int dim = 1;
  int n = 2;
  double h = 1.0;
  std::array<double, 2> origin{0.0, 0.0};

  std::size_t cells() const {
    return dim == 1 ? static_cast<std::size_t>(n)
                    : static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
  }
  double cell_volume() const { return dim == 1 ? h : h * h; }
  std::array<double, 2> center(std::size_t idx) const;
  std::array<int, 2> index(std::size_t idx) const {
    if (dim == 1) return {static_cast<int>(idx), 0};
    return {static_cast<int>(idx % static_cast<std::size_t>(n)),
            static_cast<int>(idx / static_cast<std::size_t>(n))};
  }

  void validate() const;
  bool operator==(const GridSpec&) const = default;
};

enum class ShapeKind { interval, rectangle, disk, annulus, sector };

std::string to_string(ShapeKind kind);
ShapeKind shape_kind_from_string(const std::string& name);

/// Parameters of a domain shape.
///
///  interval:  (lo, hi)
///  rectangle: (-half_x, half_x) x (-half_y, half_y)
///  disk:      |x| < radius
///  annulus:   b < |x| < b + 1
///  sector:    b < |x| < b + 1 and 0 <= theta <= pi / sectors
struct ShapeSpec {
  ShapeKind kind = ShapeKind::interval;
  double lo = -1.0;
  double hi = 1.0;
  double half_x = 1.0;
  double half_y = 1.0;
  double radius = 1.0;
  double b = 1.0;
  int sectors = 1;

  static ShapeSpec interval(double lo, double hi);
  static ShapeSpec rectangle(double half_x, double half_y);
  static ShapeSpec disk(double radius);
  static ShapeSpec annulus(double b);
  static ShapeSpec sector(double b, int sectors);

  int dim() const { return kind == ShapeKind::interval ? 1 : 2; }
  bool rotationally_symmetric() const {
    return kind == ShapeKind::disk || kind == ShapeKind::annulus;
  }
  /// Inner radius of the radial range (0 for the disk).
  double inner_radius() const;
  /// Outer radius of the radial range.
  double outer_radius() const;
  std::string describe() const;
};

/// Boolean cell membership of a domain on its embedding grid.
class DomainMask {
 public:
  DomainMask(GridSpec grid, std::vector<std::uint8_t> inside, ShapeSpec shape);

  const GridSpec& grid() const { return grid_; }
  const ShapeSpec& shape() const { return shape_; }
  const std::vector<std::uint8_t>& inside() const { return inside_; }
  bool contains(std::size_t cell) const { return inside_[cell] != 0; }

  /// Number of cells inside the domain; fields on the domain have this length.
  std::size_t size() const { return cells_.size(); }
  /// Grid index of the k-th inside cell (ascending grid order).
  std::size_t cell(std::size_t k) const { return cells_[k]; }
  const std::vector<std::size_t>& cells() const { return cells_; }
  /// Position of a grid cell in the inside-cell ordering, or -1.
  std::ptrdiff_t local_index(std::size_t cell) const { return local_[cell]; }

  double measure() const;

  /// Polar coordinates of the k-th inside cell centre.
  double radius_of(std::size_t k) const;
  double angle_of(std::size_t k) const;  // in [0, 2 pi)

 private:
  GridSpec grid_;
  std::vector<std::uint8_t> inside_;
  ShapeSpec shape_;
  std::vector<std::size_t> cells_;
  std::vector<std::ptrdiff_t> local_;
};

/// Builds the mask of `shape` on a grid with `resolution` cells per axis.
///
/// Intervals use the interval itself as embedding; two-dimensional shapes use
/// the smallest origin-centred square covering them. Membership is decided at
/// cell centres. Throws ValidationError if no centre lands inside the shape.
DomainMask build_domain(const ShapeSpec& shape, int resolution);

/// Measure of a cell mask: count * h^dim.
double measure(const std::vector<std::uint8_t>& mask, const GridSpec& grid);

/// A subset D of a domain, stored as a flag per inside cell.
struct Configuration {
  std::vector<std::uint8_t> in_d;
  double target_measure = 0.0;

  std::size_t count() const;
  double measure(const GridSpec& grid) const {
    return static_cast<double>(count()) * grid.cell_volume();
  }
  bool operator==(const Configuration& other) const { return in_d == other.in_d; }
};

/// Run-length encoding of a 0/1 mask: alternating run lengths starting with a
/// run of zeros (possibly of length zero).
std::vector<std::size_t> run_length_encode(const std::vector<std::uint8_t>& mask);
std::vector<std::uint8_t> run_length_decode(const std::vector<std::size_t>& runs);

}  // namespace fracmem

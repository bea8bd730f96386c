#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "mcastsim/rng.hpp"

namespace mcast {

// Wraps a coordinate into [0, 1). Exactly 1.0 maps to 0.
inline double wrap01(double x) {
  double w = x - std::floor(x);
  return w < 1.0 ? w : 0.0;
}

// A position on the unit torus; both coordinates live in [0, 1).
struct Point {
  double x = 0.0;
  double y = 0.0;

  static Point wrapped(double x, double y) { return {wrap01(x), wrap01(y)}; }
};

// Square partition of the torus into g x g cells of side 1/g.
struct CellGrid {
  int g = 1;

  explicit CellGrid(int side) : g(side) {
    if (side < 1) throw std::invalid_argument("CellGrid: side count must be >= 1");
  }
  double cell_side() const { return 1.0 / g; }
  int cell_count() const { return g * g; }
};

struct CellIndex {
  int i = 0;
  int j = 0;
  bool operator==(const CellIndex&) const = default;
};

inline double axis_distance(double a, double b) {
  double d = std::fabs(a - b);
  return d <= 0.5 ? d : 1.0 - d;
}

// Toroidal Euclidean distance; at most sqrt(2)/2.
inline double torus_distance(const Point& a, const Point& b) {
  double dx = axis_distance(a.x, b.x);
  double dy = axis_distance(a.y, b.y);
  return std::sqrt(dx * dx + dy * dy);
}

inline double torus_distance_sq(const Point& a, const Point& b) {
  double dx = axis_distance(a.x, b.x);
  double dy = axis_distance(a.y, b.y);
  return dx * dx + dy * dy;
}

inline CellIndex cell_of(const Point& p, const CellGrid& grid) {
  int i = static_cast<int>(p.x * grid.g);
  int j = static_cast<int>(p.y * grid.g);
  // Guard against x*g rounding up to g at the top edge.
  if (i >= grid.g) i = grid.g - 1;
  if (j >= grid.g) j = grid.g - 1;
  return {i, j};
}

inline int cell_id(const CellIndex& c, const CellGrid& grid) {
  return c.i * grid.g + c.j;
}

inline int cell_id_of(const Point& p, const CellGrid& grid) {
  return cell_id(cell_of(p, grid), grid);
}

inline Point uniform_point(Rng& rng) {
  double x = uniform01(rng);
  double y = uniform01(rng);
  return {x, y};
}

// Uniform point inside one grid cell.
inline Point uniform_point_in_cell(const CellIndex& c, const CellGrid& grid, Rng& rng) {
  double u = uniform01(rng);
  double v = uniform01(rng);
  return {wrap01((c.i + u) / grid.g), wrap01((c.j + v) / grid.g)};
}

}  // namespace mcast

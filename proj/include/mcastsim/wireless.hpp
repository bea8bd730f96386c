#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "mcastsim/torus.hpp"

namespace mcast {

// One broadcast under the protocol model: a sender, its transmission radius,
// and the receivers it addresses in one concurrent set. receivers[0] is the
// target delivery; the rest are free rides.
struct TransmissionIntent {
  int sender = 0;
  double radius = 0.0;
  std::vector<int> receivers;
  long slot = 0;
};

struct Violation {
  enum class Kind { OutOfRange, Interference };
  Kind kind = Kind::OutOfRange;
  long slot = 0;
  int sender = 0;
  int receiver = 0;
  int interferer = -1;  // -1 for out-of-range violations
  double distance = 0.0;
};

// Spatial-reuse coloring of a cell grid. Cells sharing a color transmit
// simultaneously; the construction guarantees that any two distinct
// same-colored cells are separated, on the torus, by at least
// `min_separation` cells in some axis. min_separation is derived from the
// protocol model ((2+delta)*radius plus the within-cell offset), so
// transmissions from distinct same-colored cells cannot interfere no matter
// where nodes sit inside their cells.
//
// Per axis the cycle of g indices is cut into contiguous blocks of length
// >= min_separation; the color of an index is its offset within its block.
// Same offset in different blocks implies a separation of at least one full
// block in either wrap direction.
struct Coloring {
  CellGrid grid{1};
  int reuse_k = 1;          // K from the sufficient-condition formula
  int min_separation = 1;   // S: guaranteed same-color axis separation
  int colors_per_axis = 1;  // L
  int period = 1;           // L^2 colors / sub-slots
  std::vector<int> axis_color;  // length g

  int color_of(const CellIndex& c) const {
    return axis_color[c.i] * colors_per_axis + axis_color[c.j];
  }
};

inline Coloring build_coloring(const CellGrid& grid, double radius, double delta) {
  if (!(radius > 0.0) || radius > 0.5)
    throw std::invalid_argument("build_coloring: radius must be in (0, 1/2]");
  if (!(delta > 0.0))
    throw std::invalid_argument("build_coloring: delta must be positive");

  const int g = grid.g;
  const double root2 = std::sqrt(2.0);
  int k = static_cast<int>(std::ceil(((2.0 + delta) * radius + 2.0 * root2 / g) * g));
  if (k < 1) k = 1;
  if (k > g)
    throw std::runtime_error("build_coloring: grid too coarse for interference-free reuse");

  // Minimal index separation s such that the gap (s-1)/g between cell
  // extents already exceeds (2+delta)*radius. Never larger than K.
  int sep = static_cast<int>(std::ceil(1.0 + (2.0 + delta) * radius * g));
  if (sep < 1) sep = 1;
  if (sep > k) sep = k;

  Coloring col;
  col.grid = grid;
  col.reuse_k = k;
  col.min_separation = sep;

  int blocks = g / sep;  // >= 1 since sep <= k <= g
  col.axis_color.assign(g, 0);
  int max_len = 0;
  for (int b = 0; b < blocks; ++b) {
    int lo = static_cast<int>(static_cast<long>(b) * g / blocks);
    int hi = static_cast<int>(static_cast<long>(b + 1) * g / blocks);
    max_len = std::max(max_len, hi - lo);
    for (int i = lo; i < hi; ++i) col.axis_color[i] = i - lo;
  }
  col.colors_per_axis = max_len;
  col.period = max_len * max_len;
  return col;
}

// Audits one concurrent set of transmissions against the protocol model:
//  - every listed receiver must be within its sender's radius;
//  - every receiver must be at distance >= (1+delta)*alpha_k from every
//    other sender k.
// Empty result <=> all transmissions are simultaneously valid.
inline std::vector<Violation> audit_slot(std::span<const TransmissionIntent> intents,
                                         std::span<const Point> positions,
                                         double delta) {
  std::vector<Violation> out;
  for (std::size_t a = 0; a < intents.size(); ++a) {
    const auto& ta = intents[a];
    const Point& sender_pos = positions[ta.sender];
    for (int recv : ta.receivers) {
      const Point& rp = positions[recv];
      double d = torus_distance(sender_pos, rp);
      if (d > ta.radius) {
        out.push_back({Violation::Kind::OutOfRange, ta.slot, ta.sender, recv, -1, d});
      }
      for (std::size_t b = 0; b < intents.size(); ++b) {
        if (b == a) continue;
        const auto& tb = intents[b];
        if (tb.sender == ta.sender) continue;
        double di = torus_distance(positions[tb.sender], rp);
        if (di < (1.0 + delta) * tb.radius) {
          out.push_back({Violation::Kind::Interference, ta.slot, ta.sender, recv, tb.sender, di});
        }
      }
    }
  }
  return out;
}

// True iff the exclusion disks (radius delta*alpha/2 around each target
// receiver) are pairwise disjoint on the torus. Tangency counts as disjoint.
inline bool exclusion_disjointness(std::span<const TransmissionIntent> intents,
                                   std::span<const Point> positions,
                                   double delta) {
  for (std::size_t a = 0; a < intents.size(); ++a) {
    if (intents[a].receivers.empty()) continue;
    const Point& ta = positions[intents[a].receivers.front()];
    double ra = delta * intents[a].radius / 2.0;
    for (std::size_t b = a + 1; b < intents.size(); ++b) {
      if (intents[b].receivers.empty()) continue;
      const Point& tb = positions[intents[b].receivers.front()];
      double rb = delta * intents[b].radius / 2.0;
      if (torus_distance(ta, tb) < ra + rb) return false;
    }
  }
  return true;
}

}  // namespace mcast

#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>

#include "mcastsim/torus.hpp"

namespace mcast {

enum class MobilityKind { Iid, Walk, Waypoint };

// Parameters of one of the three per-slot mobility models.
//
//   Iid      -- teleport to an independent uniform point each slot
//   Walk     -- hop to one of the 8 neighboring sub-squares or stay, 1/9 each
//   Waypoint -- add a per-axis displacement drawn uniformly from [step_lo, step_hi]
struct MobilitySpec {
  MobilityKind kind = MobilityKind::Iid;
  CellGrid walk_grid{1};        // Walk only; g = round(sqrt(n_s))
  double step_lo = 0.0;         // Waypoint only
  double step_hi = 0.0;
  bool random_signs = false;    // Waypoint: negate each axis with prob 1/2

  static MobilitySpec iid() { return {}; }

  static MobilitySpec walk(int n_sessions) {
    if (n_sessions < 1) throw std::invalid_argument("walk: n_s must be >= 1");
    int g = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n_sessions))));
    if (g < 1) g = 1;
    MobilitySpec s;
    s.kind = MobilityKind::Walk;
    s.walk_grid = CellGrid(g);
    return s;
  }

  static MobilitySpec waypoint(int n_sessions, bool random_signs = false) {
    if (n_sessions < 1) throw std::invalid_argument("waypoint: n_s must be >= 1");
    double root = std::sqrt(static_cast<double>(n_sessions));
    MobilitySpec s;
    s.kind = MobilityKind::Waypoint;
    s.step_lo = 1.0 / root;
    s.step_hi = 3.0 / root;
    s.random_signs = random_signs;
    if (!(s.step_lo > 0.0 && s.step_lo < s.step_hi && s.step_hi <= 1.0))
      throw std::invalid_argument("waypoint: step range must satisfy 0 < lo < hi <= 1");
    return s;
  }

  static MobilitySpec of(MobilityKind kind, int n_sessions, bool waypoint_random_signs = false) {
    switch (kind) {
      case MobilityKind::Iid: return iid();
      case MobilityKind::Walk: return walk(n_sessions);
      case MobilityKind::Waypoint: return waypoint(n_sessions, waypoint_random_signs);
    }
    throw std::invalid_argument("unknown mobility kind");
  }
};

// A node is the source of its session (ordinal 0) or the ordinal-th
// destination (1..p). Role never changes over a run.
struct Role {
  int session = 0;
  int ordinal = 0;
  bool is_source() const { return ordinal == 0; }
};

struct NodeState {
  int id = 0;
  Role role;
  Point position;
  std::optional<CellIndex> walk_cell;  // present iff the model is Walk
};

// One slot of movement. Pure in (spec, state, rng): the only mutation is the
// caller's stream.
inline NodeState advance(const MobilitySpec& spec, const NodeState& state, Rng& rng) {
  NodeState next = state;
  switch (spec.kind) {
    case MobilityKind::Iid: {
      if (state.walk_cell)
        throw std::invalid_argument("advance: walk_cell present for non-walk mobility");
      next.position = uniform_point(rng);
      return next;
    }
    case MobilityKind::Walk: {
      if (!state.walk_cell)
        throw std::invalid_argument("advance: walk mobility requires walk_cell");
      int g = spec.walk_grid.g;
      // 9 equally likely moves: di, dj in {-1, 0, 1}.
      int move = static_cast<int>(uniform_below(rng, 9));
      int di = move / 3 - 1;
      int dj = move % 3 - 1;
      CellIndex c = *state.walk_cell;
      c.i = (c.i + di + g) % g;
      c.j = (c.j + dj + g) % g;
      next.walk_cell = c;
      next.position = uniform_point_in_cell(c, spec.walk_grid, rng);
      return next;
    }
    case MobilityKind::Waypoint: {
      if (state.walk_cell)
        throw std::invalid_argument("advance: walk_cell present for non-walk mobility");
      double vx = uniform_range(rng, spec.step_lo, spec.step_hi);
      double vy = uniform_range(rng, spec.step_lo, spec.step_hi);
      if (spec.random_signs) {
        std::uint64_t bits = rng();
        if (bits & 1) vx = -vx;
        if (bits & 2) vy = -vy;
      }
      next.position = Point::wrapped(state.position.x + vx, state.position.y + vy);
      return next;
    }
  }
  throw std::invalid_argument("advance: unknown mobility kind");
}

}  // namespace mcast

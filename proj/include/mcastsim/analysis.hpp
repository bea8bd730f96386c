#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "mcastsim/rng.hpp"
#include "mcastsim/torus.hpp"

namespace mcast {

// All logarithms in this module are natural; asymptotic regime boundaries
// are evaluated with every Theta-constant set to 1, so regime labels and the
// middle-case value are order-only statements.

struct BoundParams {
  double n_s = 1;
  double p = 2;
  double D = 1;
  double T = 1;      // slots
  double W = 1;      // bits per slot
  double delta = 1;  // protocol guard
  double kappa = 3;  // cluster constant, > 2

  void validate() const {
    if (!(n_s > 0 && p > 0 && D > 0 && T > 0 && W > 0 && delta > 0))
      throw std::invalid_argument("BoundParams: all parameters must be positive");
    if (!(kappa > 2.0))
      throw std::invalid_argument("BoundParams: kappa must exceed 2");
  }
};

enum class Regime { Zero, Constant, Sqrt };

struct RegimeResult {
  Regime regime = Regime::Sqrt;
  double sqrt_value = 0.0;  // (ln p)(ln n_s p) sqrt(D/n_s); meaningful for Sqrt
  double t1 = 0.0;          // D below t1  -> Zero
  double t2 = 0.0;          // D above t2  -> Constant
};

inline RegimeResult capacity_regime(const BoundParams& params) {
  params.validate();
  if (params.p <= 1.0)
    throw std::domain_error("capacity_regime: unicast degenerate (p = 1); bound inapplicable");
  double lp = std::log(params.p);
  double lnp = std::log(params.n_s * params.p);
  RegimeResult res;
  res.t2 = params.n_s / (lp * lp * lnp * lnp);
  res.t1 = std::cbrt(res.t2);
  res.sqrt_value = lp * lnp * std::sqrt(params.D / params.n_s);
  if (params.D < res.t1) {
    res.regime = Regime::Zero;
  } else if (params.D > res.t2) {
    res.regime = Regime::Constant;
  } else {
    res.regime = Regime::Sqrt;
  }
  return res;
}

// Expected-bits ceiling when packets go directly from sources to
// destinations (no relaying).
inline double lambda_ceiling_no_relay(const BoundParams& params) {
  params.validate();
  double lnp = std::log(params.n_s * params.p);
  double first = 5.0 * params.kappa * lnp *
                 (params.W * params.T * std::sqrt(32.0 / (params.delta * params.delta)) *
                  std::sqrt(params.n_s * params.p));
  double second = (16.0 * params.kappa * params.W * params.T /
                   (params.delta * params.delta)) *
                  params.p * std::log(params.p) * lnp;
  return first + second;
}

// Expected-bits ceiling when every delivery goes through a relay.
inline double lambda_ceiling_relay(const BoundParams& params) {
  params.validate();
  double lnp = std::log(params.n_s * params.p);
  double first = 5.0 * params.kappa * lnp *
                 (std::sqrt(32.0 / (params.delta * params.delta)) * params.W * params.T *
                  (params.p + 1.0) * std::sqrt(params.n_s * params.D));
  double second = (16.0 * params.kappa * params.W * params.T /
                   (params.delta * params.delta)) *
                  params.p * std::log(params.p) * lnp;
  return first + second;
}

struct HeuristicResult {
  double lambda = 0.0;
  double l1 = 0.0;
  double l2 = 0.0;
};

// Virtual-channel throughput at one (L1, L2) pair: the bottleneck of the
// broadcast channel (discounted by the relay-channel erasure probability)
// and the receiving channel with its free rides.
inline double virtual_channel_rate(double n_s, double p, double D, double W,
                                   double l1, double l2) {
  double n = n_s * (p + 1.0);
  double a1 = M_PI * l1 * l1;
  double q2 = std::min(M_PI * l2 * l2, 1.0);  // probability; disks self-overlap past this
  double miss = std::pow(1.0 - q2, D * a1 * n);
  double broadcast = (1.0 - miss) * W / (a1 * n_s);
  double receive = W / (n_s * p * M_PI * l2 * l2) + W * (p - 1.0) / (n_s * p);
  return std::min(broadcast, receive);
}

// Grid search over the two transmission radii on a log grid in (1e-4, 0.5].
inline HeuristicResult heuristic_capacity(double n_s, double p, double D, double W,
                                          int grid_points = 256) {
  if (!(n_s > 0 && p >= 1 && D > 0 && W > 0))
    throw std::invalid_argument("heuristic_capacity: invalid inputs");
  if (grid_points < 2) throw std::invalid_argument("heuristic_capacity: grid too small");
  const double lo = 1e-4, hi = 0.5;
  std::vector<double> grid(grid_points);
  for (int i = 0; i < grid_points; ++i)
    grid[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (grid_points - 1));
  HeuristicResult best;
  best.lambda = -1.0;
  for (double l1 : grid) {
    for (double l2 : grid) {
      double v = virtual_channel_rate(n_s, p, D, W, l1, l2);
      if (v > best.lambda) best = {v, l1, l2};
    }
  }
  return best;
}

// Smallest kappa meeting both cluster-lemma conditions plus kappa > 2.
inline double kappa_min(double gamma, double n_s, double p) {
  if (!(gamma > 0.0 && gamma <= 1.0))
    throw std::invalid_argument("kappa_min: gamma must lie in (0, 1]");
  if (!(n_s * p > 3.0))
    throw std::domain_error("kappa_min: requires n_s * p > 3");
  const double eps = 1e-6;
  double lhs = std::exp(2.0) * (p - 1.0) * M_PI * gamma * gamma /
               ((1.0 + p * gamma * gamma) * std::log(n_s * p));
  return std::max(2.0 + eps, lhs);
}

struct OracleConfig {
  long trials = 1000;
  double significance = 1e-3;
  std::uint64_t seed = 1;
};

struct ClusterMcResult {
  double z_mean = 0.0;        // MC estimate of E[Z_{gamma,kappa}[T]]
  double bound = 0.0;         // T / (n_s p)^2
  double threshold = 0.0;     // kappa (1 + p gamma^2) ln(n_s p)
  double h_mean = 0.0;        // empirical E[H(j,gamma,t)]
  double h_expected = 0.0;    // (p-1) pi gamma^2
  long exceedances = 0;
  long samples = 0;           // (j, t, trial) triples
};

// Places the n_s*p destinations i.i.d.-uniform per slot and counts how often
// a destination sees at least threshold same-session destinations within
// distance gamma.
inline ClusterMcResult cluster_exceedance_mc(int n_s, int p, double gamma, double kappa,
                                             int T, const OracleConfig& oracle) {
  if (n_s < 1 || p < 1 || T < 1 || oracle.trials < 1)
    throw std::invalid_argument("cluster_exceedance_mc: invalid inputs");
  if (kappa < kappa_min(gamma, n_s, p))
    throw std::invalid_argument("cluster_exceedance_mc: kappa below kappa_min");
  ClusterMcResult res;
  res.threshold = kappa * (1.0 + p * gamma * gamma) * std::log(static_cast<double>(n_s) * p);
  res.bound = static_cast<double>(T) /
              (static_cast<double>(n_s) * p * static_cast<double>(n_s) * p);
  res.h_expected = (p - 1.0) * M_PI * gamma * gamma;
  const double g2 = gamma * gamma;
  Rng rng(oracle.seed);
  std::vector<Point> dests(static_cast<std::size_t>(n_s) * p);
  long long h_sum = 0;
  std::vector<int> h(p);
  for (long trial = 0; trial < oracle.trials; ++trial) {
    for (int t = 0; t < T; ++t) {
      for (auto& q : dests) q = uniform_point(rng);
      for (int s = 0; s < n_s; ++s) {
        const Point* base = &dests[static_cast<std::size_t>(s) * p];
        std::fill(h.begin(), h.end(), 0);
        for (int a = 0; a < p; ++a) {
          for (int b = a + 1; b < p; ++b) {
            if (torus_distance_sq(base[a], base[b]) <= g2) {
              ++h[a];
              ++h[b];
            }
          }
        }
        for (int a = 0; a < p; ++a) {
          h_sum += h[a];
          if (h[a] >= res.threshold) ++res.exceedances;
        }
      }
    }
  }
  res.samples = oracle.trials * static_cast<long>(T) * n_s * p;
  res.h_mean = static_cast<double>(h_sum) / res.samples;
  res.z_mean = static_cast<double>(res.exceedances) / oracle.trials;
  return res;
}

struct BallsBinsResult {
  double exact = 0.0;           // n (1 - (1 - m/n)^r)
  double mc_mean = 0.0;
  double freq_ge = 0.0;         // frequency of N >= (1-delta) * exact
  double chernoff_lower = 0.0;  // 1 - 2 exp(-delta^2 exact / 3); may be vacuous
  long trials = 0;
};

// Occupancy after r rounds of marking m distinct bins out of n.
inline BallsBinsResult balls_bins_nonempty(int n_bins, int m_per_round, int rounds,
                                           const OracleConfig& oracle,
                                           double delta_conc) {
  if (m_per_round < 1 || m_per_round > n_bins || rounds < 1)
    throw std::invalid_argument("balls_bins_nonempty: need 1 <= m <= n and rounds >= 1");
  BallsBinsResult res;
  res.exact = n_bins * (1.0 - std::pow(1.0 - static_cast<double>(m_per_round) / n_bins,
                                       rounds));
  res.chernoff_lower = 1.0 - 2.0 * std::exp(-delta_conc * delta_conc * res.exact / 3.0);
  res.trials = oracle.trials;
  Rng rng(oracle.seed);
  std::vector<std::uint8_t> occupied(n_bins);
  std::vector<int> idx(n_bins);
  double thresh = (1.0 - delta_conc) * res.exact;
  long long total = 0;
  long ge = 0;
  for (long trial = 0; trial < oracle.trials; ++trial) {
    std::fill(occupied.begin(), occupied.end(), 0);
    for (int i = 0; i < n_bins; ++i) idx[i] = i;
    for (int r = 0; r < rounds; ++r) {
      for (int k = 0; k < m_per_round; ++k) {
        std::size_t pick = k + uniform_below(rng, static_cast<std::uint64_t>(n_bins - k));
        std::swap(idx[k], idx[pick]);
        occupied[idx[k]] = 1;
      }
    }
    int nonempty = 0;
    for (int i = 0; i < n_bins; ++i) nonempty += occupied[i];
    total += nonempty;
    if (nonempty >= thresh) ++ge;
  }
  res.mc_mean = static_cast<double>(total) / oracle.trials;
  res.freq_ge = static_cast<double>(ge) / oracle.trials;
  return res;
}

}  // namespace mcast

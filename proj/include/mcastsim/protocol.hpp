#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mcastsim/fountain.hpp"
#include "mcastsim/mobility.hpp"
#include "mcastsim/torus.hpp"
#include "mcastsim/wireless.hpp"

namespace mcast {

enum class SimMode { CountDistinct, Coded };

struct SimConfig {
  int n_s = 1;  // multicast sessions
  int p = 1;    // destinations per session
  int D = 1;    // half of the supertime length; each phase runs D slots
  double W = 1.0;
  double delta = 1.0;
  MobilityKind mobility = MobilityKind::Iid;
  SimMode mode = SimMode::CountDistinct;
  int supertime_count = 10;
  std::uint64_t seed = 1;
  bool waypoint_random_signs = false;
  bool count_broadcast_delivery = true;
  double fountain_overhead = 0.25;

  int node_count() const { return n_s * (p + 1); }

  void validate() const {
    if (n_s < 1 || p < 1 || D < 1)
      throw std::invalid_argument("SimConfig: n_s, p and D must all be >= 1");
    if (!(W > 0.0)) throw std::invalid_argument("SimConfig: W must be positive");
    if (!(delta > 0.0)) throw std::invalid_argument("SimConfig: delta must be positive");
    if (supertime_count < 1)
      throw std::invalid_argument("SimConfig: supertime_count must be >= 1");
    if (!(fountain_overhead >= 0.0))
      throw std::invalid_argument("SimConfig: fountain_overhead must be >= 0");
  }
};

// One source plus its p destinations. Node ids are laid out per session:
// session i owns ids [i*(p+1), (i+1)*(p+1)), source first.
struct Session {
  int id = 0;
  int source = 0;
  std::vector<int> destinations;
};

// Derived per-supertime parameters of the joint coding-scheduling algorithm.
struct SupertimePlan {
  int data_packets = 1;  // Q, clamped to >= 1
  CellGrid broadcast_grid{1};
  CellGrid receive_grid{1};
  double broadcast_radius = 0.0;
  double receive_radius = 0.0;
  int phase_slots = 1;  // D slots of broadcasting, then D slots of receiving
};

inline SupertimePlan plan_supertime(const SimConfig& cfg) {
  cfg.validate();
  SupertimePlan plan;
  double d = cfg.D;
  double q = (d / 500.0) * std::sqrt(d / cfg.n_s);
  plan.data_packets = std::max(1, static_cast<int>(std::floor(q)));
  int g1 = std::max(1, static_cast<int>(std::lround(std::sqrt(static_cast<double>(cfg.n_s)))));
  int g2 = std::max(1, static_cast<int>(std::lround(std::pow(
               static_cast<double>(cfg.n_s) * cfg.p * cfg.p * cfg.D, 0.25))));
  plan.broadcast_grid = CellGrid(g1);
  plan.receive_grid = CellGrid(g2);
  plan.broadcast_radius = std::sqrt(2.0) / g1;
  plan.receive_radius = std::sqrt(2.0) / g2;
  plan.phase_slots = cfg.D;
  return plan;
}

// A relayed copy of a coded packet, keyed by session and coded index.
struct Duplicate {
  std::int32_t session = 0;
  std::int32_t index = 0;
};

// Per-slot trace row (optional diagnostics stream).
struct TraceRow {
  long slot = 0;
  int cell = 0;
  int sender = 0;
  int recipients = 0;
};

struct SupertimeReport {
  int supertime = 0;
  // Per session: per-destination distinct coded indices received in this
  // supertime slot, their minimum and mean over the p destinations.
  std::vector<std::vector<int>> delivered;
  std::vector<int> min_delivered;
  std::vector<double> mean_delivered;
  double network_mean = 0.0;      // mean over sessions of mean_delivered
  double network_min_mean = 0.0;  // mean over sessions of min_delivered
  std::vector<std::uint8_t> decoded;        // Coded mode: all p destinations at full rank
  std::vector<std::uint8_t> threshold_met;  // all destinations with >= (1+delta)Q indices
  long broadcast_indices = 0;  // coded indices consumed by sources
  long full_broadcasts = 0;    // broadcasts that reached floor(9(p+1)/10) recipients
  long source_slots = 0;
  long deliveries = 0;  // (destination, index) pairs newly recorded
  long audited_groups = 0;
  long audit_violations = 0;
  long deletion_violations = 0;
  std::vector<Violation> violations;  // empty on a clean run
};

// Discrete-time engine for the joint coding-scheduling algorithm. One
// supertime slot = D broadcasting slots, a deletion step, then D receiving
// slots; ledgers and relayed packets reset at the supertime boundary while
// node positions persist.
class Engine {
 public:
  explicit Engine(const SimConfig& cfg)
      : cfg_(cfg),
        plan_(plan_supertime(cfg)),
        mobility_(MobilitySpec::of(cfg.mobility, cfg.n_s, cfg.waypoint_random_signs)),
        broadcast_coloring_(build_coloring(plan_.broadcast_grid, plan_.broadcast_radius, cfg.delta)),
        receive_coloring_(build_coloring(plan_.receive_grid, plan_.receive_radius, cfg.delta)),
        rng_(cfg.seed),
        n_(cfg.node_count()) {
    full_recipients_ = 9 * (cfg_.p + 1) / 10;  // floor
    pos_.resize(n_);
    for (auto& p : pos_) p = uniform_point(rng_);
    if (cfg_.mobility == MobilityKind::Walk) {
      walk_cell_.resize(n_);
      for (int i = 0; i < n_; ++i)
        walk_cell_[i] = cell_of(pos_[i], mobility_.walk_grid);
    }
    next_index_.assign(cfg_.n_s, 0);
    rx_.resize(n_);
    carry_.resize(n_);
    words_per_dest_ = (cfg_.D + 63) / 64;
    xbits_.assign(static_cast<std::size_t>(cfg_.n_s) * cfg_.p * words_per_dest_, 0);
    xcount_.assign(static_cast<std::size_t>(cfg_.n_s) * cfg_.p, 0);
    begin_supertime();
  }

  const SimConfig& config() const { return cfg_; }
  const SupertimePlan& plan() const { return plan_; }
  const Coloring& broadcast_coloring() const { return broadcast_coloring_; }
  const Coloring& receive_coloring() const { return receive_coloring_; }
  std::span<const Point> positions() const { return pos_; }
  const std::vector<std::vector<Duplicate>>& carried() const { return carry_; }
  const std::vector<std::vector<Duplicate>>& received_raw() const { return rx_; }
  long slot() const { return slot_; }

  std::vector<TraceRow>* trace_sink = nullptr;  // optional, off by default

  Role role_of(int node) const { return {node / (cfg_.p + 1), node % (cfg_.p + 1)}; }

  Session session(int i) const {
    Session s;
    s.id = i;
    s.source = i * (cfg_.p + 1);
    s.destinations.resize(cfg_.p);
    for (int l = 0; l < cfg_.p; ++l) s.destinations[l] = s.source + 1 + l;
    return s;
  }

  int delivered_count(int session, int ordinal) const {
    return xcount_[dest_slot(session, ordinal)];
  }

  bool has_index(int session, int ordinal, int index) const {
    const std::uint64_t* bits = &xbits_[dest_slot(session, ordinal) * words_per_dest_];
    return (bits[index >> 6] >> (index & 63)) & 1;
  }

  // --- one full supertime slot ---------------------------------------------

  SupertimeReport run_supertime() {
    begin_supertime();
    phase_broadcast();
    phase_deletion();
    phase_receiving();
    return finish_supertime();
  }

  std::vector<SupertimeReport> run() {
    std::vector<SupertimeReport> reports;
    reports.reserve(cfg_.supertime_count);
    for (int s = 0; s < cfg_.supertime_count; ++s) reports.push_back(run_supertime());
    return reports;
  }

  // --- individual phases (exposed for tests) -------------------------------

  void begin_supertime() {
    std::fill(next_index_.begin(), next_index_.end(), 0);
    for (auto& v : rx_) v.clear();
    for (auto& v : carry_) v.clear();
    std::fill(xbits_.begin(), xbits_.end(), 0);
    std::fill(xcount_.begin(), xcount_.end(), 0);
    report_ = SupertimeReport{};
    report_.supertime = supertime_;
  }

  void phase_broadcast() {
    for (int t = 0; t < plan_.phase_slots; ++t) broadcast_slot(true);
  }

  void phase_deletion() {
    for (int node = 0; node < n_; ++node) {
      auto& in = rx_[node];
      auto& keep = carry_[node];
      keep.clear();
      if (in.empty()) continue;
      std::sort(in.begin(), in.end(), [](const Duplicate& a, const Duplicate& b) {
        return a.session != b.session ? a.session < b.session : a.index < b.index;
      });
      std::size_t i = 0;
      while (i < in.size()) {
        std::size_t j = i;
        while (j < in.size() && in[j].session == in[i].session) ++j;
        keep.push_back(in[i + uniform_below(rng_, j - i)]);
        i = j;
      }
      in.clear();
    }
    // exact post-phase check: no mobile holds two duplicates of one session
    for (int node = 0; node < n_; ++node) {
      const auto& keep = carry_[node];
      for (std::size_t i = 1; i < keep.size(); ++i)
        if (keep[i].session <= keep[i - 1].session) ++report_.deletion_violations;
    }
  }

  void phase_receiving() {
    for (int t = 0; t < plan_.phase_slots; ++t) receive_slot(true);
    // deadline: undelivered duplicates are dropped
    for (auto& v : carry_) v.clear();
  }

  SupertimeReport finish_supertime() {
    SupertimeReport rep = std::move(report_);
    rep.delivered.assign(cfg_.n_s, std::vector<int>(cfg_.p, 0));
    rep.min_delivered.assign(cfg_.n_s, 0);
    rep.mean_delivered.assign(cfg_.n_s, 0.0);
    double net_mean = 0.0, net_min = 0.0;
    for (int i = 0; i < cfg_.n_s; ++i) {
      int mn = cfg_.D + 1;
      double sum = 0.0;
      for (int l = 0; l < cfg_.p; ++l) {
        int c = xcount_[dest_slot(i, l)];
        rep.delivered[i][l] = c;
        mn = std::min(mn, c);
        sum += c;
      }
      rep.min_delivered[i] = mn;
      rep.mean_delivered[i] = sum / cfg_.p;
      net_mean += rep.mean_delivered[i];
      net_min += mn;
    }
    rep.network_mean = net_mean / cfg_.n_s;
    rep.network_min_mean = net_min / cfg_.n_s;

    if (cfg_.mode == SimMode::Coded) {
      rep.decoded.assign(cfg_.n_s, 1);
      rep.threshold_met.assign(cfg_.n_s, 1);
      int need = static_cast<int>(
          std::ceil((1.0 + cfg_.fountain_overhead) * plan_.data_packets));
      std::uint64_t fseed = mix_seed(cfg_.seed, 0x466f756e7461696eULL);
      for (int i = 0; i < cfg_.n_s; ++i) {
        for (int l = 0; l < cfg_.p; ++l) {
          if (xcount_[dest_slot(i, l)] < need) rep.threshold_met[i] = 0;
          DecoderState dec(i, plan_.data_packets);
          const std::uint64_t* bits = &xbits_[dest_slot(i, l) * words_per_dest_];
          for (int idx = 0; idx < cfg_.D && !dec.can_decode(); ++idx) {
            if ((bits[idx >> 6] >> (idx & 63)) & 1) {
              dec.ingest({i, supertime_, idx, plan_.data_packets,
                          generator_row(fseed, i, supertime_, plan_.data_packets, idx)});
            }
          }
          if (!dec.can_decode()) rep.decoded[i] = 0;
        }
      }
    }
    ++supertime_;
    return rep;
  }

  int indices_sent(int session) const { return next_index_[session]; }

 private:
  friend struct EngineTestAccess;

  void broadcast_slot(bool advance_first) {
    const CellGrid& grid = plan_.broadcast_grid;
    if (advance_first) advance_all();
    bucket_nodes(grid);
    intents_.clear();
    group_of_.clear();
    report_.source_slots += cfg_.n_s;
    for (int cell = 0; cell < grid.cell_count(); ++cell) {
      int lo = cell_start_[cell], hi = cell_start_[cell + 1];
      if (lo == hi) continue;
      // sources with coded packets remaining
      scratch_.clear();
      for (int k = lo; k < hi; ++k) {
        int node = cell_nodes_[k];
        Role r = role_of(node);
        if (r.is_source() && next_index_[r.session] < cfg_.D)
          scratch_.push_back(node);
      }
      if (scratch_.empty()) continue;
      int src = scratch_[uniform_below(rng_, scratch_.size())];
      int session = role_of(src).session;
      int index = next_index_[session]++;
      ++report_.broadcast_indices;

      // recipients: uniform among the other mobiles in the cell
      recipients_.clear();
      for (int k = lo; k < hi; ++k)
        if (cell_nodes_[k] != src) recipients_.push_back(cell_nodes_[k]);
      int r = std::min<int>(full_recipients_, static_cast<int>(recipients_.size()));
      if (r == full_recipients_) ++report_.full_broadcasts;
      for (int k = 0; k < r; ++k) {
        std::size_t pick = k + uniform_below(rng_, recipients_.size() - k);
        std::swap(recipients_[k], recipients_[pick]);
      }
      recipients_.resize(r);
      if (trace_sink)
        trace_sink->push_back({slot_, cell, src, static_cast<int>(recipients_.size())});
      if (r == 0) continue;  // index consumed, nobody to hear it

      for (int recip : recipients_) {
        rx_[recip].push_back({session, index});
        Role rr = role_of(recip);
        if (cfg_.count_broadcast_delivery && rr.session == session && !rr.is_source())
          record_delivery(session, rr.ordinal - 1, index);
      }
      group_of_.push_back(broadcast_coloring_.color_of({cell / grid.g, cell % grid.g}));
      intents_.push_back({src, plan_.broadcast_radius, recipients_, slot_});
    }
    audit_groups(broadcast_coloring_.period);
    ++slot_;
  }

  void receive_slot(bool advance_first) {
    const CellGrid& grid = plan_.receive_grid;
    if (advance_first) advance_all();
    bucket_nodes(grid);
    intents_.clear();
    group_of_.clear();
    for (int cell = 0; cell < grid.cell_count(); ++cell) {
      int lo = cell_start_[cell], hi = cell_start_[cell + 1];
      if (lo == hi) continue;
      process_receive_cell(cell, lo, hi);
    }
    audit_groups(2 * receive_coloring_.period);
    ++slot_;
  }

  std::size_t dest_slot(int session, int ordinal) const {
    return static_cast<std::size_t>(session) * cfg_.p + ordinal;
  }

  void record_delivery(int session, int ordinal, int index) {
    std::uint64_t* bits = &xbits_[dest_slot(session, ordinal) * words_per_dest_];
    std::uint64_t mask = 1ULL << (index & 63);
    if (!(bits[index >> 6] & mask)) {
      bits[index >> 6] |= mask;
      ++xcount_[dest_slot(session, ordinal)];
      ++report_.deliveries;
    }
  }

  void advance_all() {
    if (cfg_.mobility == MobilityKind::Walk) {
      for (int i = 0; i < n_; ++i) {
        NodeState st{i, role_of(i), pos_[i], walk_cell_[i]};
        st = advance(mobility_, st, rng_);
        pos_[i] = st.position;
        walk_cell_[i] = *st.walk_cell;
      }
    } else {
      for (int i = 0; i < n_; ++i) {
        NodeState st{i, role_of(i), pos_[i], std::nullopt};
        pos_[i] = advance(mobility_, st, rng_).position;
      }
    }
  }

  void bucket_nodes(const CellGrid& grid) {
    int cells = grid.cell_count();
    cell_start_.assign(cells + 1, 0);
    node_cell_.resize(n_);
    for (int i = 0; i < n_; ++i) {
      int c = cell_id_of(pos_[i], grid);
      node_cell_[i] = c;
      ++cell_start_[c + 1];
    }
    for (int c = 0; c < cells; ++c) cell_start_[c + 1] += cell_start_[c];
    cell_nodes_.resize(n_);
    fill_pos_.assign(cell_start_.begin(), cell_start_.end() - 1);
    for (int i = 0; i < n_; ++i) cell_nodes_[fill_pos_[node_cell_[i]]++] = i;
  }

  void process_receive_cell(int cell, int lo, int hi) {
    // sessions with destinations present in the cell
    cell_dest_sessions_.clear();
    cell_dests_.clear();
    for (int k = lo; k < hi; ++k) {
      Role r = role_of(cell_nodes_[k]);
      if (!r.is_source()) {
        cell_dest_sessions_.push_back(r.session);
        cell_dests_.push_back({r.session, r.ordinal - 1});
      }
    }
    if (cell_dests_.empty()) return;
    std::sort(cell_dest_sessions_.begin(), cell_dest_sessions_.end());
    cell_dest_sessions_.erase(
        std::unique(cell_dest_sessions_.begin(), cell_dest_sessions_.end()),
        cell_dest_sessions_.end());

    // deliverable duplicates: carried in the cell, with a co-located
    // destination of the session still lacking the coded index
    candidates_.clear();
    for (int k = lo; k < hi; ++k) {
      int node = cell_nodes_[k];
      const auto& carry = carry_[node];
      if (carry.empty()) continue;
      for (int s : cell_dest_sessions_) {
        auto it = std::lower_bound(
            carry.begin(), carry.end(), s,
            [](const Duplicate& d, int sess) { return d.session < sess; });
        if (it == carry.end() || it->session != s) continue;
        bool useful = false;
        for (const auto& [ds, ordinal] : cell_dests_) {
          if (ds == s && !has_index(s, ordinal, it->index)) {
            useful = true;
            break;
          }
        }
        if (useful) candidates_.push_back({node, s, it->index});
      }
    }
    if (candidates_.empty() || candidates_.size() > 2) return;  // cell stays silent when overloaded

    // receiver lists are resolved against the slot-start ledger before any
    // recording, so two copies of one index both carry the full list
    int base_group = 2 * receive_coloring_.color_of(
        {cell / plan_.receive_grid.g, cell % plan_.receive_grid.g});
    int half = 0;
    pending_.clear();
    for (const auto& [carrier, s, index] : candidates_) {
      recipients_.clear();
      for (int k = lo; k < hi; ++k) {
        Role r = role_of(cell_nodes_[k]);
        if (r.session == s && !r.is_source() && !has_index(s, r.ordinal - 1, index))
          recipients_.push_back(cell_nodes_[k]);
      }
      group_of_.push_back(base_group + half++);
      intents_.push_back({carrier, plan_.receive_radius, recipients_, slot_});
      if (trace_sink)
        trace_sink->push_back({slot_, cell, carrier, static_cast<int>(recipients_.size())});
      for (int recip : recipients_) pending_.push_back({s, role_of(recip).ordinal - 1, index});
    }
    for (const auto& [s, ordinal, index] : pending_) record_delivery(s, ordinal, index);
  }

  void audit_groups(int group_count) {
    if (intents_.empty()) return;
    if (static_cast<int>(group_buckets_.size()) < group_count)
      group_buckets_.resize(group_count);
    for (auto& b : group_buckets_) b.clear();
    for (std::size_t i = 0; i < intents_.size(); ++i)
      group_buckets_[group_of_[i]].push_back(static_cast<int>(i));
    for (const auto& bucket : group_buckets_) {
      if (bucket.empty()) continue;
      group_intents_.clear();
      for (int i : bucket) group_intents_.push_back(intents_[i]);
      ++report_.audited_groups;
      auto violations = audit_slot(group_intents_, pos_, cfg_.delta);
      if (!violations.empty()) {
        report_.audit_violations += static_cast<long>(violations.size());
        report_.violations.insert(report_.violations.end(), violations.begin(),
                                  violations.end());
      }
    }
  }

  struct Candidate {
    int carrier;
    int session;
    int index;
  };
  struct PendingDelivery {
    int session;
    int ordinal;
    int index;
  };

  SimConfig cfg_;
  SupertimePlan plan_;
  MobilitySpec mobility_;
  Coloring broadcast_coloring_;
  Coloring receive_coloring_;
  Rng rng_;
  int n_;
  int full_recipients_ = 0;
  long slot_ = 0;
  int supertime_ = 0;

  std::vector<Point> pos_;
  std::vector<CellIndex> walk_cell_;
  std::vector<int> next_index_;
  std::vector<std::vector<Duplicate>> rx_;
  std::vector<std::vector<Duplicate>> carry_;
  int words_per_dest_ = 1;
  std::vector<std::uint64_t> xbits_;
  std::vector<int> xcount_;
  SupertimeReport report_;

  // per-slot scratch
  std::vector<int> cell_start_, cell_nodes_, node_cell_, fill_pos_;
  std::vector<int> scratch_, recipients_;
  std::vector<int> cell_dest_sessions_;
  std::vector<std::pair<int, int>> cell_dests_;
  std::vector<Candidate> candidates_;
  std::vector<PendingDelivery> pending_;
  std::vector<TransmissionIntent> intents_;
  std::vector<int> group_of_;
  std::vector<std::vector<int>> group_buckets_;
  std::vector<TransmissionIntent> group_intents_;
};

// Round-robin scheme for a constant number of sessions: each slot one source
// broadcasts to the whole network with radius sqrt(2)/2, so every packet is
// delivered to all destinations within its slot.
struct RoundRobinResult {
  double throughput_per_session = 0.0;  // packets per slot per session
  int delay_slots = 1;
};

inline RoundRobinResult run_round_robin(const SimConfig& cfg) {
  cfg.validate();
  return {cfg.W / cfg.n_s, 1};
}

}  // namespace mcast

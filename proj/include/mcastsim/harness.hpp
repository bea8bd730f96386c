#pragma once

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "mcastsim/protocol.hpp"

namespace mcast {

enum class Preset { Fig5, Fig6, Fig7, Custom };

inline const char* preset_name(Preset p) {
  switch (p) {
    case Preset::Fig5: return "fig5";
    case Preset::Fig6: return "fig6";
    case Preset::Fig7: return "fig7";
    case Preset::Custom: return "custom";
  }
  return "custom";
}

inline const char* mobility_name(MobilityKind k) {
  switch (k) {
    case MobilityKind::Iid: return "iid";
    case MobilityKind::Walk: return "walk";
    case MobilityKind::Waypoint: return "waypoint";
  }
  return "iid";
}

inline MobilityKind mobility_from_name(const std::string& s) {
  if (s == "iid") return MobilityKind::Iid;
  if (s == "walk") return MobilityKind::Walk;
  if (s == "waypoint") return MobilityKind::Waypoint;
  throw std::invalid_argument("unknown mobility kind: " + s);
}

struct ExperimentSpec {
  Preset preset = Preset::Custom;
  std::string swept_var = "none";  // one of n_s, D, p, none
  std::vector<long> values;        // strictly increasing, non-empty (unless none)
  SimConfig base;                  // fixed fields
  std::vector<MobilityKind> mobilities{MobilityKind::Iid};
  int replicates = 5;
  std::uint64_t base_seed = 1;

  void validate() const {
    if (replicates < 1) throw std::invalid_argument("ExperimentSpec: replicates >= 1");
    if (mobilities.empty()) throw std::invalid_argument("ExperimentSpec: no mobility kinds");
    if (swept_var != "none") {
      if (values.empty()) throw std::invalid_argument("ExperimentSpec: empty value list");
      for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] <= values[i - 1])
          throw std::invalid_argument("ExperimentSpec: values must be strictly increasing");
    }
  }

  SimConfig config_at(long value, MobilityKind mobility) const {
    SimConfig cfg = base;
    cfg.mobility = mobility;
    if (swept_var == "n_s") cfg.n_s = static_cast<int>(value);
    else if (swept_var == "D") cfg.D = static_cast<int>(value);
    else if (swept_var == "p") cfg.p = static_cast<int>(value);
    else if (swept_var != "none")
      throw std::invalid_argument("ExperimentSpec: unknown swept variable " + swept_var);
    return cfg;
  }
};

// Paper sweeps: Fig5 varies n_s at p=10, 2D=200; Fig6 varies D at n_s=500,
// p=10; Fig7 varies p at n_s=500, 2D=200.
inline ExperimentSpec make_preset(Preset preset, std::vector<MobilityKind> mobilities,
                                  int replicates = 5, int supertime_count = 10,
                                  std::uint64_t base_seed = 1) {
  ExperimentSpec spec;
  spec.preset = preset;
  spec.mobilities = std::move(mobilities);
  spec.replicates = replicates;
  spec.base_seed = base_seed;
  spec.base.supertime_count = supertime_count;
  spec.base.seed = base_seed;
  switch (preset) {
    case Preset::Fig5:
      spec.swept_var = "n_s";
      spec.values = {200, 400, 600, 800, 1000};
      spec.base.p = 10;
      spec.base.D = 100;
      break;
    case Preset::Fig6:
      spec.swept_var = "D";
      spec.values = {100, 150, 200, 250, 300, 350, 400};
      spec.base.n_s = 500;
      spec.base.p = 10;
      break;
    case Preset::Fig7:
      spec.swept_var = "p";
      spec.values = {4, 8, 12, 16, 20, 24, 28, 32, 36, 40};
      spec.base.n_s = 500;
      spec.base.D = 100;
      break;
    case Preset::Custom:
      break;
  }
  spec.validate();
  return spec;
}

struct RunRecord {
  Preset preset = Preset::Custom;
  std::string swept_var = "none";
  long value = 0;
  MobilityKind mobility = MobilityKind::Iid;
  int replicate = 0;
  std::uint64_t seed = 0;
  double delivered_mean = 0.0;  // mean over sessions and supertimes of the
                                // per-destination mean distinct-index count
  double throughput = 0.0;      // per supertime slot; equals delivered_mean in
                                // count-distinct mode
  bool error = false;
  // aggregate diagnostics from the run
  long audit_violations = 0;
  long deletion_violations = 0;
  double min_delivered_mean = 0.0;  // same aggregation of the per-session min
};

inline std::uint64_t derive_seed(std::uint64_t base_seed, long value,
                                 MobilityKind mobility, int replicate) {
  return base_seed ^ mix_seed(static_cast<std::uint64_t>(value),
                              static_cast<std::uint64_t>(mobility),
                              static_cast<std::uint64_t>(replicate));
}

inline int resolve_worker_count(std::size_t jobs) {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  unsigned cap = hw;
  if (const char* env = std::getenv("MCAST_SIM_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) cap = static_cast<unsigned>(v);
    // 0 or malformed -> auto
  }
  return static_cast<int>(std::min<std::size_t>(jobs, cap));
}

inline RunRecord run_single(const ExperimentSpec& spec, long value,
                            MobilityKind mobility, int replicate) {
  RunRecord rec;
  rec.preset = spec.preset;
  rec.swept_var = spec.swept_var;
  rec.value = value;
  rec.mobility = mobility;
  rec.replicate = replicate;
  rec.seed = derive_seed(spec.base_seed, value, mobility, replicate);
  try {
    SimConfig cfg = spec.config_at(value, mobility);
    cfg.seed = rec.seed;
    Engine engine(cfg);
    double mean_sum = 0.0, min_sum = 0.0;
    for (int s = 0; s < cfg.supertime_count; ++s) {
      SupertimeReport rep = engine.run_supertime();
      mean_sum += rep.network_mean;
      min_sum += rep.network_min_mean;
      rec.audit_violations += rep.audit_violations;
      rec.deletion_violations += rep.deletion_violations;
    }
    rec.delivered_mean = mean_sum / cfg.supertime_count;
    rec.min_delivered_mean = min_sum / cfg.supertime_count;
    rec.throughput = rec.delivered_mean;
  } catch (const std::exception&) {
    rec.error = true;
    rec.delivered_mean = std::nan("");
    rec.throughput = std::nan("");
  }
  return rec;
}

// Executes every (value x mobility x replicate) job. Output order is the
// deterministic job order (value-major, then mobility, then replicate),
// independent of scheduling.
inline std::vector<RunRecord> run_sweep(const ExperimentSpec& spec) {
  spec.validate();
  struct Job {
    long value;
    MobilityKind mobility;
    int replicate;
  };
  std::vector<Job> jobs;
  std::vector<long> values = spec.swept_var == "none" ? std::vector<long>{0} : spec.values;
  for (long v : values)
    for (MobilityKind m : spec.mobilities)
      for (int r = 0; r < spec.replicates; ++r) jobs.push_back({v, m, r});

  std::vector<RunRecord> records(jobs.size());
  int workers = resolve_worker_count(jobs.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i)
      records[i] = run_single(spec, jobs[i].value, jobs[i].mobility, jobs[i].replicate);
    return records;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      records[i] = run_single(spec, jobs[i].value, jobs[i].mobility, jobs[i].replicate);
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return records;
}

// --- fitting -----------------------------------------------------------------

struct FitResult {
  double alpha = 0.0;
  std::vector<double> x;              // model value per point
  std::vector<double> y;              // mean throughput per point
  std::vector<double> rel_residuals;  // (y - alpha x) / (alpha x) per point
};

inline double fit_through_origin(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("fit: need at least two points");
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += x[i] * y[i];
    sxx += x[i] * x[i];
  }
  if (sxx == 0.0) throw std::invalid_argument("fit: degenerate, all x are zero");
  return sxy / sxx;
}

// Least squares of throughput against the scaling model 2D*sqrt(2D/n_s),
// per-point means over the replicates of one mobility kind.
inline FitResult fit_alpha(const ExperimentSpec& spec, const std::vector<RunRecord>& records,
                           MobilityKind mobility) {
  FitResult fit;
  for (long v : spec.values) {
    SimConfig cfg = spec.config_at(v, mobility);
    double two_d = 2.0 * cfg.D;
    double model = two_d * std::sqrt(two_d / cfg.n_s);
    double sum = 0.0;
    int count = 0;
    for (const auto& rec : records) {
      if (rec.mobility != mobility || rec.value != v || rec.error) continue;
      sum += rec.throughput;
      ++count;
    }
    if (count == 0) continue;
    fit.x.push_back(model);
    fit.y.push_back(sum / count);
  }
  fit.alpha = fit_through_origin(fit.x, fit.y);
  fit.rel_residuals.resize(fit.x.size());
  for (std::size_t i = 0; i < fit.x.size(); ++i) {
    double model = fit.alpha * fit.x[i];
    fit.rel_residuals[i] = (fit.y[i] - model) / model;
  }
  return fit;
}

// --- CSV ----------------------------------------------------------------------

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline void emit_csv(const std::vector<RunRecord>& records, std::ostream& out) {
  out << "preset,swept_var,value,mobility,replicate,seed,delivered_mean,throughput\n";
  for (const auto& rec : records) {
    out << preset_name(rec.preset) << ',' << rec.swept_var << ',' << rec.value << ','
        << mobility_name(rec.mobility) << ',' << rec.replicate << ',' << rec.seed << ','
        << format_double(rec.delivered_mean) << ',' << format_double(rec.throughput)
        << '\n';
  }
}

inline void emit_csv(const std::vector<RunRecord>& records, const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // binary keeps LF endings everywhere
  if (!out) throw std::runtime_error("emit_csv: cannot open " + path);
  emit_csv(records, out);
  out.flush();
  if (!out) throw std::runtime_error("emit_csv: write failed for " + path);
}

inline Preset preset_from_name(const std::string& s) {
  if (s == "fig5") return Preset::Fig5;
  if (s == "fig6") return Preset::Fig6;
  if (s == "fig7") return Preset::Fig7;
  if (s == "custom") return Preset::Custom;
  throw std::invalid_argument("unknown preset: " + s);
}

inline std::vector<RunRecord> parse_csv(std::istream& in) {
  std::vector<RunRecord> records;
  std::string line;
  if (!std::getline(in, line)) return records;  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    RunRecord rec;
    std::getline(ss, field, ',');
    rec.preset = preset_from_name(field);
    std::getline(ss, rec.swept_var, ',');
    std::getline(ss, field, ',');
    rec.value = std::stol(field);
    std::getline(ss, field, ',');
    rec.mobility = mobility_from_name(field);
    std::getline(ss, field, ',');
    rec.replicate = std::stoi(field);
    std::getline(ss, field, ',');
    rec.seed = std::stoull(field);
    std::getline(ss, field, ',');
    rec.delivered_mean = std::stod(field);
    std::getline(ss, field, ',');
    rec.throughput = std::stod(field);
    records.push_back(std::move(rec));
  }
  return records;
}

// --- config files ----------------------------------------------------------

// Flat `key = value` files with '#' comments; keys are the SimConfig field
// names.
inline SimConfig parse_config(std::istream& in) {
  SimConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string s) {
      auto b = s.find_first_not_of(" \t\r");
      auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string t = trim(line);
    if (t.empty()) continue;
    auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key = value");
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    auto as_bool = [&](const std::string& v) {
      if (v == "true" || v == "1") return true;
      if (v == "false" || v == "0") return false;
      throw std::invalid_argument("config: bad boolean for " + key);
    };
    if (key == "n_s") cfg.n_s = std::stoi(value);
    else if (key == "p") cfg.p = std::stoi(value);
    else if (key == "D") cfg.D = std::stoi(value);
    else if (key == "W") cfg.W = std::stod(value);
    else if (key == "delta") cfg.delta = std::stod(value);
    else if (key == "mobility") cfg.mobility = mobility_from_name(value);
    else if (key == "mode") {
      if (value == "count_distinct") cfg.mode = SimMode::CountDistinct;
      else if (value == "coded") cfg.mode = SimMode::Coded;
      else throw std::invalid_argument("config: unknown mode " + value);
    } else if (key == "supertime_count") cfg.supertime_count = std::stoi(value);
    else if (key == "seed") cfg.seed = std::stoull(value);
    else if (key == "waypoint_random_signs") cfg.waypoint_random_signs = as_bool(value);
    else if (key == "count_broadcast_delivery") cfg.count_broadcast_delivery = as_bool(value);
    else if (key == "fountain_overhead") cfg.fountain_overhead = std::stod(value);
    else throw std::invalid_argument("config: unknown key " + key);
  }
  cfg.validate();
  return cfg;
}

inline SimConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  return parse_config(in);
}

}  // namespace mcast

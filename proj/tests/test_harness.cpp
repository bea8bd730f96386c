#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "mcastsim/cli.hpp"
#include "mcastsim/harness.hpp"

using namespace mcast;

namespace {

ExperimentSpec tiny_spec() {
  ExperimentSpec spec;
  spec.preset = Preset::Custom;
  spec.swept_var = "n_s";
  spec.values = {60, 80};
  spec.base.p = 3;
  spec.base.D = 20;
  spec.base.supertime_count = 2;
  spec.mobilities = {MobilityKind::Iid, MobilityKind::Walk};
  spec.replicates = 2;
  spec.base_seed = 5;
  return spec;
}

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) : path("/tmp/mcastsim_test_" + name) {}
  ~TempFile() { std::remove(path.c_str()); }
  std::string read() const {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }
};

int run_cli(std::initializer_list<const char*> args, std::string* out_text = nullptr,
            std::string* err_text = nullptr) {
  std::vector<const char*> argv{"mcast_sim"};
  argv.insert(argv.end(), args.begin(), args.end());
  std::ostringstream out, err;
  int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return code;
}

}  // namespace

TEST_CASE("figure presets match the paper sweeps") {
  ExperimentSpec f5 = make_preset(Preset::Fig5, {MobilityKind::Walk});
  CHECK(f5.swept_var == "n_s");
  CHECK(f5.values == std::vector<long>{200, 400, 600, 800, 1000});
  CHECK(f5.base.p == 10);
  CHECK(f5.base.D == 100);  // 2D = 200

  ExperimentSpec f6 = make_preset(Preset::Fig6, {MobilityKind::Walk});
  CHECK(f6.swept_var == "D");
  CHECK(f6.values == std::vector<long>{100, 150, 200, 250, 300, 350, 400});
  CHECK(f6.base.n_s == 500);
  CHECK(f6.base.p == 10);

  ExperimentSpec f7 = make_preset(Preset::Fig7, {MobilityKind::Walk});
  CHECK(f7.swept_var == "p");
  CHECK(f7.values == std::vector<long>{4, 8, 12, 16, 20, 24, 28, 32, 36, 40});
  CHECK(f7.base.n_s == 500);
  CHECK(f7.base.D == 100);
}

TEST_CASE("experiment spec validation") {
  ExperimentSpec spec = tiny_spec();
  spec.replicates = 0;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec = tiny_spec();
  spec.values = {80, 60};
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec = tiny_spec();
  spec.values.clear();
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}

TEST_CASE("run_sweep produces one record per point x mobility x replicate") {
  ExperimentSpec spec = tiny_spec();
  auto records = run_sweep(spec);
  REQUIRE(records.size() == 2 * 2 * 2);
  // deterministic job order: value-major, then mobility, then replicate
  CHECK(records[0].value == 60);
  CHECK(records[0].mobility == MobilityKind::Iid);
  CHECK(records[0].replicate == 0);
  CHECK(records[7].value == 80);
  CHECK(records[7].mobility == MobilityKind::Walk);
  CHECK(records[7].replicate == 1);
  for (const auto& rec : records) {
    CHECK_FALSE(rec.error);
    CHECK(rec.throughput >= 0.0);
    CHECK(rec.throughput == rec.delivered_mean);
    CHECK(rec.audit_violations == 0);
    CHECK(rec.deletion_violations == 0);
  }
  // replicates with different seeds differ; same point, same stats otherwise
  CHECK(records[0].seed != records[1].seed);
}

TEST_CASE("run_sweep is reproducible byte for byte") {
  ExperimentSpec spec = tiny_spec();
  std::ostringstream a, b;
  emit_csv(run_sweep(spec), a);
  emit_csv(run_sweep(spec), b);
  CHECK(a.str() == b.str());
  CHECK_FALSE(a.str().empty());
}

TEST_CASE("infeasible points become errored rows and the sweep continues") {
  ExperimentSpec spec = tiny_spec();
  spec.values = {1, 60};  // n_s = 1: broadcast radius sqrt(2) > 1/2, no coloring
  spec.mobilities = {MobilityKind::Iid};
  spec.replicates = 1;
  auto records = run_sweep(spec);
  REQUIRE(records.size() == 2);
  CHECK(records[0].error);
  CHECK(std::isnan(records[0].throughput));
  CHECK_FALSE(records[1].error);
}

TEST_CASE("fit through the origin") {
  SECTION("exact synthetic fit") {
    std::vector<double> x{10, 20, 40}, y{0.9, 1.8, 3.6};
    double alpha = fit_through_origin(x, y);
    CHECK(alpha == Catch::Approx(0.09).epsilon(1e-12));
  }
  SECTION("degenerate inputs") {
    CHECK_THROWS_AS(fit_through_origin({0, 0}, {1, 2}), std::invalid_argument);
    CHECK_THROWS_AS(fit_through_origin({1}, {1}), std::invalid_argument);
  }
  SECTION("fit_alpha aggregates replicates per point") {
    ExperimentSpec spec = tiny_spec();
    spec.mobilities = {MobilityKind::Iid};
    std::vector<RunRecord> records;
    for (long v : spec.values) {
      SimConfig cfg = spec.config_at(v, MobilityKind::Iid);
      double model = 2.0 * cfg.D * std::sqrt(2.0 * cfg.D / cfg.n_s);
      for (int r = 0; r < 2; ++r) {
        RunRecord rec;
        rec.value = v;
        rec.mobility = MobilityKind::Iid;
        rec.replicate = r;
        rec.throughput = 0.09 * model;
        records.push_back(rec);
      }
    }
    FitResult fit = fit_alpha(spec, records, MobilityKind::Iid);
    CHECK(fit.alpha == Catch::Approx(0.09).epsilon(1e-12));
    for (double r : fit.rel_residuals) CHECK(r == Catch::Approx(0.0).margin(1e-12));
  }
}

TEST_CASE("csv emission and round trip") {
  SECTION("empty record list gives a header-only file") {
    std::ostringstream out;
    emit_csv({}, out);
    CHECK(out.str() ==
          "preset,swept_var,value,mobility,replicate,seed,delivered_mean,throughput\n");
  }
  SECTION("three records give four lines") {
    std::vector<RunRecord> records(3);
    records[1].value = 42;
    std::ostringstream out;
    emit_csv(records, out);
    int lines = 0;
    for (char c : out.str()) lines += c == '\n';
    CHECK(lines == 4);
  }
  SECTION("round trip preserves records up to float formatting") {
    ExperimentSpec spec = tiny_spec();
    spec.mobilities = {MobilityKind::Walk};
    spec.replicates = 1;
    auto records = run_sweep(spec);
    std::ostringstream out;
    emit_csv(records, out);
    std::istringstream in(out.str());
    auto parsed = parse_csv(in);
    REQUIRE(parsed.size() == records.size());
    std::ostringstream again;
    emit_csv(parsed, again);
    CHECK(again.str() == out.str());
    for (std::size_t i = 0; i < records.size(); ++i) {
      CHECK(parsed[i].value == records[i].value);
      CHECK(parsed[i].mobility == records[i].mobility);
      CHECK(parsed[i].replicate == records[i].replicate);
      CHECK(parsed[i].seed == records[i].seed);
    }
  }
}

TEST_CASE("config files parse the SimConfig fields") {
  std::istringstream in(
      "# experiment configuration\n"
      "n_s = 60\n"
      "p = 3          # destinations\n"
      "D = 20\n"
      "W = 1.0\n"
      "delta = 1.0\n"
      "mobility = waypoint\n"
      "mode = count_distinct\n"
      "supertime_count = 4\n"
      "seed = 99\n"
      "waypoint_random_signs = true\n"
      "count_broadcast_delivery = false\n"
      "fountain_overhead = 0.25\n");
  SimConfig cfg = parse_config(in);
  CHECK(cfg.n_s == 60);
  CHECK(cfg.p == 3);
  CHECK(cfg.D == 20);
  CHECK(cfg.mobility == MobilityKind::Waypoint);
  CHECK(cfg.supertime_count == 4);
  CHECK(cfg.seed == 99);
  CHECK(cfg.waypoint_random_signs);
  CHECK_FALSE(cfg.count_broadcast_delivery);

  std::istringstream bad_key("unknown_key = 1\n");
  CHECK_THROWS_AS(parse_config(bad_key), std::invalid_argument);
  std::istringstream bad_mode("mode = wat\n");
  CHECK_THROWS_AS(parse_config(bad_mode), std::invalid_argument);
  std::istringstream no_eq("n_s 60\n");
  CHECK_THROWS_AS(parse_config(no_eq), std::invalid_argument);
}

TEST_CASE("derived seeds separate replicates and mobility kinds") {
  auto s = derive_seed(1, 200, MobilityKind::Walk, 0);
  CHECK(s == derive_seed(1, 200, MobilityKind::Walk, 0));
  CHECK(s != derive_seed(1, 200, MobilityKind::Walk, 1));
  CHECK(s != derive_seed(1, 200, MobilityKind::Iid, 0));
  CHECK(s != derive_seed(1, 400, MobilityKind::Walk, 0));
  CHECK(s != derive_seed(2, 200, MobilityKind::Walk, 0));
}

TEST_CASE("cli: usage errors exit 1") {
  std::string err;
  CHECK(run_cli({}, nullptr, &err) == 1);
  CHECK_FALSE(err.empty());
  CHECK(run_cli({"sweep", "--bogus-flag"}, nullptr, &err) == 1);
  CHECK(run_cli({"nonsense"}, nullptr, &err) == 1);
}

TEST_CASE("cli: bounds prints the regime table") {
  std::string out;
  int code = run_cli({"bounds", "--ns", "1000000", "--p", "10", "--d", "10"}, &out);
  CHECK(code == 0);
  CHECK(out.find("regime=sqrt") != std::string::npos);
  CHECK(out.find("sqrt_value=0.117363") != std::string::npos);
  CHECK(out.find("lambda_ceiling_relay=") != std::string::npos);
  CHECK(out.find("heuristic_lambda=") != std::string::npos);
}

TEST_CASE("cli: bounds at p=1 is a runtime error") {
  std::string err;
  CHECK(run_cli({"bounds", "--ns", "100", "--p", "1", "--d", "10"}, nullptr, &err) == 2);
  CHECK(err.find("unicast degenerate") != std::string::npos);
}

TEST_CASE("cli: run executes a config file and writes records plus trace") {
  TempFile cfg("run.cfg"), out("run.csv"), trace("run_trace.csv");
  {
    std::ofstream f(cfg.path);
    f << "n_s = 60\np = 3\nD = 20\nmobility = iid\nsupertime_count = 2\nseed = 7\n";
  }
  std::string text;
  int code = run_cli({"run", "--config", cfg.path.c_str(), "--out", out.path.c_str(),
                      "--trace", trace.path.c_str()},
                     &text);
  REQUIRE(code == 0);
  std::string csv = out.read();
  CHECK(csv.rfind("preset,", 0) == 0);
  std::istringstream in(csv);
  auto parsed = parse_csv(in);
  REQUIRE(parsed.size() == 1);
  CHECK(parsed[0].seed == 7);
  CHECK(parsed[0].throughput >= 0.0);
  std::string tr = trace.read();
  CHECK(tr.rfind("kind,", 0) == 0);
  CHECK(tr.find("tx,") != std::string::npos);
  CHECK(tr.find("violation,") == std::string::npos);

  // determinism: the same invocation produces byte-identical CSV
  TempFile out2("run2.csv");
  REQUIRE(run_cli({"run", "--config", cfg.path.c_str(), "--out", out2.path.c_str()}) == 0);
  CHECK(out2.read() == csv);
}

TEST_CASE("cli: run reports missing config as a runtime error") {
  TempFile out("missing.csv");
  std::string err;
  CHECK(run_cli({"run", "--config", "/tmp/does_not_exist.cfg", "--out", out.path.c_str()},
                nullptr, &err) == 2);
}

TEST_CASE("cli: sweep row count matches points x replicates") {
  TempFile out("sweep.csv");
  std::string text;
  int code = run_cli({"sweep", "--preset", "fig5", "--mobility", "walk", "--replicates",
                      "2", "--supertimes", "1", "--out", out.path.c_str()},
                     &text);
  REQUIRE(code == 0);
  std::istringstream in(out.read());
  auto parsed = parse_csv(in);
  CHECK(parsed.size() == 5 * 2);  // 5 points x 2 replicates, one mobility
  for (const auto& rec : parsed) CHECK(rec.swept_var == "n_s");
}

TEST_CASE("cli: oracle subcommands run") {
  std::string out;
  CHECK(run_cli({"oracle", "balls-bins", "--bins", "100", "--per-round", "10", "--rounds",
                 "10", "--trials", "2000"},
                &out) == 0);
  CHECK(out.find("exact=65.1322") != std::string::npos);
  CHECK(run_cli({"oracle", "cluster", "--ns", "20", "--p", "5", "--gamma", "0.05", "--t",
                 "10", "--trials", "20"},
                &out) == 0);
  CHECK(out.find("z_mean=") != std::string::npos);
}

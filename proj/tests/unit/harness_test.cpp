#include <cmath>
#include <filesystem>
#include <random>

#include <gtest/gtest.h>
#include <json.hpp>

#include "oamjrc/constants.hpp"
#include "oamjrc/errors.hpp"
#include "oamjrc/harness.hpp"
#include "oamjrc/synth.hpp"

using namespace oamjrc;

namespace {

std::vector<TargetEstimate> as_estimates(const std::vector<Scatterer>& t) {
  std::vector<TargetEstimate> e;
  for (const auto& s : t) {
    TargetEstimate x;
    x.R = s.R;
    x.psi = s.psi;
    x.phi = s.phi;
    x.r = s.r;
    e.push_back(x);
  }
  return e;
}

CMatrix random_matrix(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> g;
  CMatrix a(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) a(i, j) = cdouble(g(gen), g(gen));
  return a;
}

ExperimentPlan tiny_plan() {
  ExperimentPlan p;
  p.scene = reference_scene();
  p.snr_grid_db = {0.0, 15.0};
  p.mu_grid = {0.5, 1.0};
  p.trials = 3;
  p.snapshots = 60;
  p.velocity = true;
  p.cpi_slots = 64;
  p.comm_bits = 4;
  p.comm_snapshots = 20;
  p.seed = 11;
  p.threads = 1;
  return p;
}

std::string tables_text(const MonteCarloResult& r) {
  return to_csv(rmse_table(r.rmse)) + to_csv(comm_table(r.comm));
}

}  // namespace

TEST(Pairing, RecoversShuffle) {
  const Scene s = reference_scene();
  auto est = as_estimates(s.targets);
  std::swap(est[0], est[2]);
  const Pairing p = pair_estimates(s.targets, est, s);
  EXPECT_EQ(p.perm, (std::vector<int>{2, 1, 0}));
  EXPECT_EQ(p.cost, 0.0);
}

TEST(Pairing, SingleTarget) {
  Scene s = reference_scene();
  s.targets.resize(1);
  auto est = as_estimates(s.targets);
  est[0].R += 1.0;
  const Pairing p = pair_estimates(s.targets, est, s);
  EXPECT_EQ(p.perm, std::vector<int>{0});
  EXPECT_NEAR(p.cost, 1.0 / 1e4, 1e-12);
}

TEST(Pairing, CardinalityMismatchThrows) {
  const Scene s = reference_scene();
  auto est = as_estimates(s.targets);
  est.pop_back();
  EXPECT_THROW(pair_estimates(s.targets, est, s), std::invalid_argument);
}

TEST(Pairing, RangeWrapsAtUnambiguousRange) {
  EXPECT_NEAR(range_error(9999.0, 1.0, 1e4), -2.0, 1e-9);
  EXPECT_NEAR(range_error(3.0, 1.0, 1e4), 2.0, 1e-12);
}

TEST(Pairing, NoiselessPipeline) {
  const Scene s = reference_scene(0.5);
  const EstimateSet est = estimate_positions_from_covariance(radar_covariance(s) - s.noise_power *
                                                                 CMatrix::Identity(radar_covariance(s).rows(),
                                                                                   radar_covariance(s).rows()),
                                                             ProcessingContext::from_scene(s));
  EXPECT_LT(pair_estimates(s.targets, est.targets, s).cost, 1e-6);
}

TEST(Kruskal, IdentityHasFullRank) {
  EXPECT_EQ(kruskal_rank_bruteforce(CMatrix::Identity(5, 5)), 5);
}

TEST(Kruskal, ZeroColumnGivesZero) {
  CMatrix a = random_matrix(4, 3, 1);
  a.col(1).setZero();
  EXPECT_EQ(kruskal_rank_bruteforce(a), 0);
}

TEST(Kruskal, RepeatedColumnGivesOne) {
  CMatrix a = random_matrix(4, 3, 2);
  a.col(2) = 3.0 * a.col(0);
  EXPECT_EQ(kruskal_rank_bruteforce(a), 1);
}

TEST(Kruskal, GenericMatrixIsMinOfShape) {
  EXPECT_EQ(kruskal_rank_bruteforce(random_matrix(4, 7, 3)), 4);
  EXPECT_EQ(kruskal_rank_bruteforce(random_matrix(8, 5, 4)), 5);
}

TEST(Kruskal, KhatriRaoOfSteeringIsFull) {
  const SteeringSet st = steering_matrices(reference_scene());
  EXPECT_EQ(kruskal_rank_bruteforce(khatri_rao(st.B, st.A_R)), 3);
}

TEST(Kruskal, TooManyColumnsRejected) {
  EXPECT_THROW(kruskal_rank_bruteforce(random_matrix(3, 13, 5)), std::invalid_argument);
  EXPECT_THROW(kruskal_rank_bruteforce(random_matrix(3, 6, 5), 5), std::invalid_argument);
}

TEST(Emit, CsvLayout) {
  Table t{"x", {"a", "b"}, {}};
  EXPECT_EQ(to_csv(t), "a,b\n");
  t.rows = {{"1", "2"}, {"3", "4"}, {"5", "nan"}};
  EXPECT_EQ(to_csv(t), "a,b\n1,2\n3,4\n5,nan\n");
}

TEST(Emit, JsonKeepsNumbersAndNullsNonFinite) {
  const Table t{"x", {"p", "v"}, {{"R", "1.5"}, {"psi", "nan"}}};
  const auto j = nlohmann::json::parse(to_json(t));
  ASSERT_EQ(j.size(), 2u);
  EXPECT_EQ(j[0]["p"], "R");
  EXPECT_EQ(j[0]["v"], 1.5);
  EXPECT_TRUE(j[1]["v"].is_null());
}

TEST(Emit, NumbersRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23}) EXPECT_EQ(std::stod(format_number(v)), v);
  EXPECT_EQ(format_number(std::nan("")), "nan");
  EXPECT_EQ(format_number(-INFINITY), "-inf");
}

TEST(Emit, WritesFilesAndReportsFailures) {
  const auto dir = std::filesystem::temp_directory_path() / "oamjrc_emit_test";
  std::filesystem::remove_all(dir);
  const Table t{"rmse", {"a"}, {{"1"}}};
  emit_results({t}, "csv", dir, "{}\n");
  EXPECT_TRUE(std::filesystem::exists(dir / "rmse.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "summary.json"));
  EXPECT_THROW(emit_results({t}, "xml", dir, ""), ConfigError);
  EXPECT_THROW(emit_results({t}, "csv", dir / "rmse.csv" / "sub", ""), IoError);
  std::filesystem::remove_all(dir);
}

TEST(Experiment, ParsesGridsAndDefaults) {
  const ExperimentPlan p = parse_experiment(R"({
    "array": {"M": 6, "N": 6, "f0": 79e9, "delta_f": 30e3},
    "beam": {"z_ref": 1.9},
    "oam": {"U": 10, "mu": 0.5},
    "targets": [{"phi_deg": 5, "psi_deg": 45, "R": 10, "r": 0.21}],
    "experiment": {"snr_db": {"start": -10, "stop": 20, "step": 3}, "trials": 5, "comm": {"bits": 8}}
  })");
  EXPECT_EQ(p.snr_grid_db.size(), 11u);
  EXPECT_DOUBLE_EQ(p.snr_grid_db.back(), 20.0);
  EXPECT_EQ(p.mu_grid, default_mu_grid());
  EXPECT_EQ(p.trials, 5);
  EXPECT_EQ(p.comm_bits, 8);
  EXPECT_EQ(p.snapshots, 200);
}

TEST(Experiment, RejectsBadSettings) {
  const std::string head = R"({"array": {"M": 6, "N": 6, "f0": 79e9, "delta_f": 30e3}, "beam": {"z_ref": 1.9},
    "oam": {"U": 10, "mu": 0.5}, "targets": [], "experiment": )";
  EXPECT_THROW(parse_experiment(head + R"({"mu": [0.25]}})"), ConfigError);
  EXPECT_THROW(parse_experiment(head + R"({"trials": 0}})"), ConfigError);
  EXPECT_THROW(parse_experiment(head + R"({"snr_db": []}})"), ConfigError);
  EXPECT_THROW(parse_experiment(head + R"({"snr_db": {"start": 0, "stop": 1, "step": 0}}})"), ConfigError);
  EXPECT_THROW(parse_experiment(head + R"({"snr_db": "loud"}})"), ConfigError);
}

TEST(MonteCarlo, NoiselessTrialsAreExact) {
  ExperimentPlan p = tiny_plan();
  p.snr_grid_db = {INFINITY};
  p.mu_grid = {0.5};
  p.velocity = false;
  p.comm_bits = 0;
  const MonteCarloResult r = run_monte_carlo(p);
  ASSERT_EQ(r.rmse.size(), 4u);
  for (const auto& row : r.rmse) {
    EXPECT_EQ(row.failures, 0);
    EXPECT_LT(row.rmse, 1e-6) << row.param;
  }
  EXPECT_TRUE(r.comm.empty());
}

TEST(MonteCarlo, RowAccounting) {
  const ExperimentPlan p = tiny_plan();
  const MonteCarloResult r = run_monte_carlo(p);
  EXPECT_EQ(r.rmse.size(), 2u * 2 * 5);
  for (const auto& row : r.rmse) {
    EXPECT_EQ(row.trials + row.failures, p.trials);
    // mean of per-trial RMS never exceeds the root of the mean square
    if (row.trials > 0) EXPECT_GE(row.rmse_pooled, row.rmse * (1 - 1e-12)) << row.param;
  }
  // mu = 1 carries no comm states
  EXPECT_EQ(r.comm.size(), 2u);
  for (const auto& row : r.comm) {
    EXPECT_EQ(row.mu, 0.5);
    EXPECT_LE(row.bit_errors, row.bits_sent);
  }
}

TEST(MonteCarlo, ThreadCountDoesNotChangeOutput) {
  ExperimentPlan p = tiny_plan();
  const std::string one = tables_text(run_monte_carlo(p));
  p.threads = 4;
  EXPECT_EQ(tables_text(run_monte_carlo(p)), one);
  p.threads = 1;
  EXPECT_EQ(tables_text(run_monte_carlo(p)), one);
}

TEST(MonteCarlo, InvalidSceneRefusedUnlessAllowed) {
  ExperimentPlan p = tiny_plan();
  p.scene.array.M = 3;
  p.velocity = false;
  p.comm_bits = 0;
  EXPECT_THROW(run_monte_carlo(p), ConfigError);
}

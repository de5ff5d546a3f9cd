#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "oamjrc/estimate.hpp"
#include "oamjrc/scenario.hpp"

namespace oamjrc {

struct CpiChannelSpec {
  int m = 0;
  int l = 0;
};

struct ExperimentPlan {
  Scene scene;
  std::vector<double> snr_grid_db;
  std::vector<double> mu_grid;
  int trials = 200;
  int snapshots = 200;  ///< L_r per radar frame

  bool velocity = false;
  int cpi_slots = 256;
  double T_sym = 5e-6;
  std::vector<CpiChannelSpec> cpi_channels{{0, 0}, {0, -5}};

  int comm_bits = 0;  ///< bits per comm state per frame; 0 disables the comm run
  int comm_snapshots = 50;

  std::uint64_t seed = 1;
  int threads = 0;  ///< 0 = hardware concurrency
  bool allow_invalid = false;

  /// Throws ConfigError for empty grids, J < 1, or a mu with non-integral mu U.
  void validate() const;
};

/// Reads a scene file that carries an optional "experiment" section.
ExperimentPlan parse_experiment(const std::string& json_text);
ExperimentPlan load_experiment(const std::filesystem::path& path);

/// Default experiment grid: SNR -10:3:20 dB, mu in {0.3, 0.5, 0.8, 1.0}.
std::vector<double> default_snr_grid();
std::vector<double> default_mu_grid();

/// Per-parameter normalization of the pairing cost.
struct PairingScales {
  double R = 0.0;
  double psi = 0.0;
  double phi = 0.0;
  double r = 0.0;
};

/// Admissible interval widths: R_max, pi, the azimuth window, and the radial interval.
PairingScales interval_scales(const Scene& scene);

/// Optimal truth-to-estimate assignment. perm[q] is the estimate paired with
/// truth target q. Cost sums |error| over (R, psi, phi, r), each divided by
/// its scale (interval widths unless given).
struct Pairing {
  std::vector<int> perm;
  double cost = 0.0;
};
Pairing pair_estimates(const std::vector<Scatterer>& truth, const std::vector<TargetEstimate>& est,
                       const Scene& scene);
Pairing pair_estimates(const std::vector<Scatterer>& truth, const std::vector<TargetEstimate>& est,
                       const Scene& scene, const PairingScales& scales);

/// Range error modulo the unambiguous range c / delta_f.
double range_error(double est, double truth, double R_max);

struct RmseRow {
  double snr_db = 0;
  double mu = 0;
  std::string param;  ///< R, psi, phi, r, nu
  double rmse = 0;    ///< degrees for angles, meters, m/s
  double rmse_pooled = 0;  ///< sqrt of the mean squared error over trials and targets; not emitted
  double rcrlb = 0;
  int trials = 0;     ///< trials that contributed
  int failures = 0;
};

struct CommRow {
  double snr_db = 0;
  double mu = 0;
  long bits_sent = 0;
  long bit_errors = 0;
  double ber = 0;
  double p_e_analytic = 0;
  double throughput_empirical = 0;
  double throughput_analytic = 0;
  int failures = 0;
};

struct MonteCarloResult {
  std::vector<RmseRow> rmse;
  std::vector<CommRow> comm;
};

/// Runs every (snr, mu, trial) cell. Output is a pure function of the plan,
/// independent of the thread count.
MonteCarloResult run_monte_carlo(const ExperimentPlan& plan);

/// Exact Kruskal rank by testing every column subset. At most 12 columns.
int kruskal_rank_bruteforce(const CMatrix& a, int max_cols = 12);

// ---- emission ----

struct Table {
  std::string name;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Shortest round-trip decimal form; locale independent.
std::string format_number(double v);

Table rmse_table(const std::vector<RmseRow>& rows);
Table comm_table(const std::vector<CommRow>& rows);

std::string to_csv(const Table& t);
/// Array of objects keyed by header; numeric-looking cells stay numbers.
std::string to_json(const Table& t);

/// JSON summary with the plan echo and the library version.
std::string summary_json(const ExperimentPlan& plan, const MonteCarloResult& result);

/// Writes each table as <name>.csv or <name>.json plus summary.json.
/// Throws IoError when the directory cannot be written.
void emit_results(const std::vector<Table>& tables, const std::string& format,
                  const std::filesystem::path& out_dir, const std::string& summary);

void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace oamjrc

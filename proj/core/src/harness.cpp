#include "oamjrc/harness.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include <json.hpp>

#include "oamjrc/assignment.hpp"
#include "oamjrc/bounds.hpp"
#include "oamjrc/constants.hpp"
#include "oamjrc/errors.hpp"
#include "oamjrc/linktheory.hpp"
#include "oamjrc/rng.hpp"
#include "oamjrc/scene_io.hpp"
#include "oamjrc/synth.hpp"

namespace oamjrc {

using nlohmann::json;

namespace {

constexpr std::array<const char*, 5> kParams = {"R", "psi", "phi", "r", "nu"};
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> grid_from(const json& v, const char* what) {
  if (v.is_array()) return v.get<std::vector<double>>();
  if (v.is_object()) {
    const double a = v.at("start").get<double>();
    const double b = v.at("stop").get<double>();
    const double s = v.at("step").get<double>();
    if (!(s > 0.0)) throw ConfigError(std::string(what) + ": step must be positive");
    std::vector<double> out;
    for (int k = 0; a + k * s <= b + 1e-9 * s; ++k) out.push_back(a + k * s);
    return out;
  }
  throw ConfigError(std::string(what) + ": expected an array or {start, stop, step}");
}

struct CellSetup {
  Scene scene;
  ProcessingContext ctx;
  std::array<double, 5> rcrlb{};
  PairingScales scales;
  LinkReport link;
};

struct TrialOutcome {
  bool failed = false;
  std::array<double, 5> rms{kNaN, kNaN, kNaN, kNaN, kNaN};
  bool comm_run = false;
  bool comm_failed = false;
  long bits = 0;
  long errors = 0;
};

double rms_of(const std::vector<double>& e) {
  double s = 0.0;
  for (double x : e) s += x * x;
  return std::sqrt(s / static_cast<double>(e.size()));
}

TrialOutcome run_trial(const ExperimentPlan& plan, const CellSetup& cell, std::uint64_t seed) {
  TrialOutcome out;
  const Scene& sc = cell.scene;
  const int Q = sc.Q();
  try {
    const SnapshotBlock block = radar_snapshots(sc, plan.snapshots, derive_seed(seed, 1));
    const EstimateSet est = estimate_positions_from_block(block, cell.ctx);
    const Pairing pr = pair_estimates(sc.targets, est.targets, sc, cell.scales);
    const double R_max = ambiguity_limits(sc).R_max;

    std::array<std::vector<double>, 4> err;
    for (int q = 0; q < Q; ++q) {
      const auto& t = sc.targets[q];
      const auto& e = est.targets[pr.perm[q]];
      err[0].push_back(range_error(e.R, t.R, R_max));
      err[1].push_back(rad2deg(wrap_pi(e.psi - t.psi)));
      err[2].push_back(rad2deg(wrap_pi(e.phi - t.phi)));
      err[3].push_back(e.r - t.r);
    }
    for (int k = 0; k < 4; ++k) out.rms[k] = rms_of(err[k]);

    if (plan.velocity) {
      std::vector<CpiChannel> chans;
      for (const auto& c : plan.cpi_channels)
        chans.push_back({c.m, c.l, doppler_cpi(sc, c.m, c.l, plan.cpi_slots, plan.T_sym, derive_seed(seed, 2))});
      const VelocityResult v = estimate_velocity(chans, est.targets, cell.ctx, plan.T_sym);
      std::vector<double> ev;
      bool all = true;
      for (int q = 0; q < Q; ++q) {
        const int k = pr.perm[q];
        if (v.unresolved[k]) all = false;
        ev.push_back(v.nu[k] - sc.targets[q].nu);
      }
      if (all) out.rms[4] = rms_of(ev);
    }
  } catch (const EstimationError&) {
    out.failed = true;
  }

  if (plan.comm_bits > 0 && sc.oam.comm_state_count() > 0) {
    out.comm_run = true;
    try {
      const SymbolFrame frame = random_symbol_frame(sc.oam, plan.comm_bits, derive_seed(seed, 3));
      std::vector<SnapshotBlock> slots;
      for (int k = 0; k < frame.slots(); ++k)
        slots.push_back(jrc_snapshots(sc, frame, k, plan.comm_snapshots,
                                      derive_seed(seed, 4, static_cast<std::uint64_t>(k))));
      const EstimateSet est = process_jrc(slots, cell.ctx);
      for (std::size_t c = 0; c < frame.bits.size(); ++c)
        for (std::size_t b = 0; b < frame.bits[c].size(); ++b) {
          ++out.bits;
          if (est.symbols.bits[c][b] != frame.bits[c][b]) ++out.errors;
        }
    } catch (const EstimationError&) {
      out.comm_failed = true;
      out.bits = 0;
      out.errors = 0;
    }
  }
  return out;
}

void validate_scene_or_throw(const Scene& s) {
  const ValidationReport rep = validate_scene(s);
  if (rep.ok()) return;
  std::string msg = "scene fails identifiability checks:";
  for (const auto& c : rep.checks)
    if (!c.pass) msg += " " + c.id;
  throw ConfigError(msg);
}

}  // namespace

std::vector<double> default_snr_grid() {
  std::vector<double> g;
  for (int s = -10; s <= 20; s += 3) g.push_back(s);
  return g;
}

std::vector<double> default_mu_grid() { return {0.3, 0.5, 0.8, 1.0}; }

void ExperimentPlan::validate() const {
  if (snr_grid_db.empty()) throw ConfigError("experiment: SNR grid is empty");
  if (mu_grid.empty()) throw ConfigError("experiment: mu grid is empty");
  if (trials < 1) throw ConfigError("experiment: trials must be >= 1");
  if (snapshots < 1) throw ConfigError("experiment: snapshots must be >= 1");
  if (threads < 0) throw ConfigError("experiment: threads must be >= 0");
  if (velocity && (cpi_slots < 2 || cpi_channels.size() < 2))
    throw ConfigError("experiment: velocity needs cpi_slots >= 2 and two channels");
  if (comm_bits < 0 || comm_snapshots < 1) throw ConfigError("experiment: invalid comm settings");
  for (double mu : mu_grid) {
    if (!(mu >= 0.0 && mu <= 1.0)) throw ConfigError("experiment: mu outside [0, 1]");
    const OamPlan p(scene.oam.U(), scene.oam.delta(), mu);
    if (!p.mu_is_integral()) throw ConfigError("experiment: mu * U must be an integer for every mu");
  }
}

ExperimentPlan parse_experiment(const std::string& text) {
  ExperimentPlan plan;
  plan.scene = parse_scene(text);
  plan.snr_grid_db = default_snr_grid();
  plan.mu_grid = default_mu_grid();
  try {
    const json root = json::parse(text);
    if (root.contains("experiment")) {
      const json& e = root["experiment"];
      if (e.contains("snr_db")) plan.snr_grid_db = grid_from(e["snr_db"], "experiment.snr_db");
      if (e.contains("mu")) plan.mu_grid = grid_from(e["mu"], "experiment.mu");
      plan.trials = e.value("trials", plan.trials);
      plan.snapshots = e.value("snapshots", plan.snapshots);
      plan.velocity = e.value("velocity", plan.velocity);
      plan.cpi_slots = e.value("cpi_slots", plan.cpi_slots);
      plan.T_sym = e.value("T_sym", plan.T_sym);
      if (e.contains("cpi_channels")) {
        plan.cpi_channels.clear();
        for (const json& c : e["cpi_channels"]) plan.cpi_channels.push_back({c.at("m").get<int>(), c.at("l").get<int>()});
      }
      if (e.contains("comm")) {
        plan.comm_bits = e["comm"].value("bits", plan.comm_bits);
        plan.comm_snapshots = e["comm"].value("snapshots", plan.comm_snapshots);
      }
      plan.seed = e.value("seed", plan.seed);
      plan.threads = e.value("threads", plan.threads);
      plan.allow_invalid = e.value("allow_invalid", plan.allow_invalid);
    }
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("experiment config: ") + ex.what());
  }
  plan.validate();
  return plan;
}

ExperimentPlan load_experiment(const std::filesystem::path& path) {
  return parse_experiment(read_text_file(path));
}

PairingScales interval_scales(const Scene& scene) {
  const AmbiguityLimits lim = ambiguity_limits(scene);
  return {lim.R_max, kPi, lim.phi_max - lim.phi_min, std::max(lim.r_max - lim.r_min, 1e-12)};
}

double range_error(double est, double truth, double R_max) {
  double e = std::fmod(est - truth, R_max);
  if (e > 0.5 * R_max) e -= R_max;
  if (e < -0.5 * R_max) e += R_max;
  return e;
}

Pairing pair_estimates(const std::vector<Scatterer>& truth, const std::vector<TargetEstimate>& est,
                       const Scene& scene) {
  return pair_estimates(truth, est, scene, interval_scales(scene));
}

Pairing pair_estimates(const std::vector<Scatterer>& truth, const std::vector<TargetEstimate>& est,
                       const Scene& scene, const PairingScales& w) {
  const int Q = static_cast<int>(truth.size());
  if (static_cast<int>(est.size()) != Q) throw std::invalid_argument("pair_estimates: cardinality mismatch");
  const double R_max = ambiguity_limits(scene).R_max;

  RMatrix cost(Q, Q);
  for (int q = 0; q < Q; ++q)
    for (int k = 0; k < Q; ++k) {
      const auto& t = truth[q];
      const auto& e = est[k];
      double c = std::abs(range_error(e.R, t.R, R_max)) / w.R + std::abs(wrap_pi(e.psi - t.psi)) / w.psi +
                 std::abs(wrap_pi(e.phi - t.phi)) / w.phi + std::abs(e.r - t.r) / w.r;
      if (!std::isfinite(c)) c = 1e6;
      cost(q, k) = c;
    }
  Pairing p;
  p.perm = hungarian(cost);
  for (int q = 0; q < Q; ++q) p.cost += cost(q, p.perm[q]);
  return p;
}

MonteCarloResult run_monte_carlo(const ExperimentPlan& plan) {
  plan.validate();
  const int nS = static_cast<int>(plan.snr_grid_db.size());
  const int nM = static_cast<int>(plan.mu_grid.size());
  const int J = plan.trials;

  std::vector<CellSetup> cells;
  for (int si = 0; si < nS; ++si)
    for (int mi = 0; mi < nM; ++mi) {
      CellSetup c;
      c.scene = plan.scene.with_mu(plan.mu_grid[mi]);
      c.scene.set_snr_db(plan.snr_grid_db[si]);
      if (!plan.allow_invalid) validate_scene_or_throw(c.scene);
      c.ctx = ProcessingContext::from_scene(c.scene);
      const int Q = c.scene.Q();
      c.rcrlb.fill(0.0);
      if (c.scene.noise_power > 0.0) {
        // FIM blocks are (phi, r, R, psi); the table order is (R, psi, phi, r, nu).
        const PositionFim f = position_fim(c.scene, plan.snapshots);
        auto block_rms = [&](int b) { return std::sqrt(f.crlb.segment(b * Q, Q).mean()); };
        c.rcrlb[0] = block_rms(2);
        c.rcrlb[1] = rad2deg(block_rms(3));
        c.rcrlb[2] = rad2deg(block_rms(0));
        c.rcrlb[3] = block_rms(1);
        const VelocityFim v = velocity_fim(f, c.scene, default_t_eval(plan.cpi_slots, plan.T_sym));
        c.rcrlb[4] = std::sqrt(v.crlb.mean());
        // Pair on the scale of the expected errors so that no single noisy
        // parameter dominates the assignment.
        const PairingScales widths = interval_scales(c.scene);
        auto pick = [](double bound, double width) {
          return std::isfinite(bound) && bound > 0.0 ? std::min(bound, width) : width;
        };
        c.scales = {pick(block_rms(2), widths.R), pick(block_rms(3), widths.psi),
                    pick(block_rms(0), widths.phi), pick(block_rms(1), widths.r)};
      } else {
        c.scales = interval_scales(c.scene);
      }
      if (plan.comm_bits > 0 && c.scene.oam.comm_state_count() > 0)
        c.link = total_error_prob(link_params_for(c.scene, plan.snr_grid_db[si], plan.T_sym));
      cells.push_back(std::move(c));
    }

  const std::size_t total = cells.size() * static_cast<std::size_t>(J);
  std::vector<TrialOutcome> outcomes(total);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < total; i = next++) {
      const std::size_t cell = i / static_cast<std::size_t>(J);
      const int j = static_cast<int>(i % static_cast<std::size_t>(J));
      const int si = static_cast<int>(cell) / nM;
      const int mi = static_cast<int>(cell) % nM;
      outcomes[i] = run_trial(plan, cells[cell],
                              derive_seed(plan.seed, static_cast<std::uint64_t>(si),
                                          static_cast<std::uint64_t>(mi), static_cast<std::uint64_t>(j)));
    }
  };
  int nthreads = plan.threads > 0 ? plan.threads : static_cast<int>(std::thread::hardware_concurrency());
  nthreads = std::clamp(nthreads, 1, static_cast<int>(std::max<std::size_t>(total, 1)));
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  MonteCarloResult res;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const int si = static_cast<int>(c) / nM;
    const int mi = static_cast<int>(c) % nM;
    const auto* first = &outcomes[c * static_cast<std::size_t>(J)];
    const int nparams = plan.velocity ? 5 : 4;
    for (int k = 0; k < nparams; ++k) {
      RmseRow row;
      row.snr_db = plan.snr_grid_db[si];
      row.mu = plan.mu_grid[mi];
      row.param = kParams[k];
      row.rcrlb = cells[c].rcrlb[k];
      double acc = 0.0, acc2 = 0.0;
      for (int j = 0; j < J; ++j) {
        const TrialOutcome& o = first[j];
        if (o.failed || std::isnan(o.rms[k])) {
          ++row.failures;
          continue;
        }
        acc += o.rms[k];
        acc2 += o.rms[k] * o.rms[k];
        ++row.trials;
      }
      row.rmse = row.trials > 0 ? acc / row.trials : kNaN;
      row.rmse_pooled = row.trials > 0 ? std::sqrt(acc2 / row.trials) : kNaN;
      res.rmse.push_back(row);
    }
    if (plan.comm_bits > 0 && cells[c].scene.oam.comm_state_count() > 0) {
      CommRow row;
      row.snr_db = plan.snr_grid_db[si];
      row.mu = plan.mu_grid[mi];
      long frames = 0;
      for (int j = 0; j < J; ++j) {
        const TrialOutcome& o = first[j];
        if (!o.comm_run) continue;
        if (o.comm_failed) {
          ++row.failures;
          continue;
        }
        ++frames;
        row.bits_sent += o.bits;
        row.bit_errors += o.errors;
      }
      row.ber = row.bits_sent > 0 ? static_cast<double>(row.bit_errors) / static_cast<double>(row.bits_sent) : kNaN;
      row.p_e_analytic = cells[c].link.p_e;
      row.throughput_analytic = cells[c].link.throughput;
      const double duration = static_cast<double>(frames) * (plan.comm_bits + 1) * plan.T_sym;
      row.throughput_empirical =
          duration > 0.0 ? throughput_empirical(static_cast<double>(row.bits_sent - row.bit_errors), duration) : 0.0;
      res.comm.push_back(row);
    }
  }
  return res;
}

}  // namespace oamjrc

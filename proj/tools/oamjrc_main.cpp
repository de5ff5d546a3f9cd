// oamjrc command-line front end.
//
//   oamjrc synth|estimate|mc|crlb|ber|field-map|validate [options]
//
// Exit codes: 0 ok, 1 configuration or validation error, 2 estimation
// failure, 3 I/O error.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "oamjrc/beamphysics.hpp"
#include "oamjrc/block_io.hpp"
#include "oamjrc/bounds.hpp"
#include "oamjrc/constants.hpp"
#include "oamjrc/errors.hpp"
#include "oamjrc/estimate.hpp"
#include "oamjrc/harness.hpp"
#include "oamjrc/linktheory.hpp"
#include "oamjrc/rng.hpp"
#include "oamjrc/scene_io.hpp"
#include "oamjrc/synth.hpp"
#include "oamjrc/version.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace oamjrc;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "csv";
  std::optional<int> threads;
};

ExperimentPlan plan_from(const Common& c) {
  ExperimentPlan plan;
  if (c.config.empty()) {
    plan.scene = reference_scene();
  } else {
    plan = load_experiment(c.config);
  }
  if (plan.snr_grid_db.empty()) plan.snr_grid_db = default_snr_grid();
  if (plan.mu_grid.empty()) plan.mu_grid = default_mu_grid();
  if (c.seed) plan.seed = *c.seed;
  if (c.threads) plan.threads = *c.threads;
  return plan;
}

// No --out means the single table goes to stdout.
void write_tables(const Common& c, const std::vector<Table>& tables, const std::string& summary = {}) {
  if (c.out.empty()) {
    if (c.format != "csv" && c.format != "json") throw ConfigError("unknown output format '" + c.format + "'");
    for (const auto& t : tables) std::cout << (c.format == "csv" ? to_csv(t) : to_json(t));
    return;
  }
  emit_results(tables, c.format, c.out, summary);
}

void require_valid(const Scene& scene, bool allow_invalid) {
  const ValidationReport rep = validate_scene(scene);
  if (rep.ok() || allow_invalid) return;
  std::string msg = "scene fails identifiability checks:";
  for (const auto& ch : rep.checks)
    if (!ch.pass) msg += " " + ch.id + " (" + ch.detail + ")";
  throw ConfigError(msg);
}

std::string bits_hex(const std::vector<std::uint8_t>& bits) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  for (std::size_t i = 0; i < bits.size(); i += 4) {
    int v = 0;
    for (std::size_t k = 0; k < 4; ++k) v = (v << 1) | (i + k < bits.size() ? bits[i + k] & 1 : 0);
    s += digits[v];
  }
  return s;
}

// JSON has no NaN; unresolved values become null.
ordered_json num(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

// ---- synth ----

struct SynthArgs {
  std::string frame = "radar";
  int snapshots = 200;
  int bits = 8;
  int slots = 256;
  double T_sym = 5e-6;
  std::optional<double> snr_db;
  bool wideband = false;
};

int run_synth(const Common& c, const SynthArgs& a) {
  ExperimentPlan plan = plan_from(c);
  Scene scene = plan.scene;
  if (a.snr_db) scene.set_snr_db(*a.snr_db);
  require_valid(scene, plan.allow_invalid);
  const fs::path dir = c.out.empty() ? fs::path(".") : fs::path(c.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  SynthOptions opts;
  opts.wideband = a.wideband;

  if (a.frame == "radar") {
    write_block(dir / "radar.bin", radar_snapshots(scene, a.snapshots, plan.seed, opts));
  } else if (a.frame == "jrc") {
    const SymbolFrame frame = random_symbol_frame(scene.oam, a.bits, derive_seed(plan.seed, 3));
    for (int k = 0; k < frame.slots(); ++k) {
      char name[32];
      std::snprintf(name, sizeof name, "slot_%03d.bin", k);
      write_block(dir / name,
                  jrc_snapshots(scene, frame, k, a.snapshots, derive_seed(plan.seed, 4, k), opts));
    }
    ordered_json truth;
    truth["reference_slot"] = frame.reference_slot;
    for (std::size_t i = 0; i < frame.comm_u.size(); ++i)
      truth["bits"].push_back({{"u", frame.comm_u[i]}, {"hex", bits_hex(frame.bits[i])}});
    write_text_file(dir / "frame.json", truth.dump(2) + "\n");
  } else if (a.frame == "cpi") {
    // Full cube: rows (u, m, n), one column per slow-time slot.
    SnapshotBlock b;
    const int S = scene.oam.state_count(), M = scene.array.M, N = scene.array.N;
    b.S = S;
    b.M = M;
    b.N = N;
    b.kind = FrameKind::CoherentCpi;
    b.seed = plan.seed;
    b.noise_power = scene.noise_power;
    b.data.resize(b.rows(), a.slots);
    for (int s = 0; s < S; ++s)
      for (int m = 0; m < M; ++m)
        b.data.middleRows(b.row(s, m, 0), N) =
            doppler_cpi(scene, m, scene.oam.l(s - scene.oam.U()), a.slots, a.T_sym, plan.seed);
    write_block(dir / "cpi.bin", b);
  } else {
    throw ConfigError("unknown frame kind '" + a.frame + "' (radar, jrc, cpi)");
  }
  return 0;
}

// ---- estimate ----

struct EstimateArgs {
  std::vector<std::string> in;
  std::string cpi;
  double T_sym = 5e-6;
  std::vector<int> channel_l{0, -5};
  int channel_m = 0;
  std::optional<int> targets;
};

int run_estimate(const Common& c, const EstimateArgs& a) {
  const ExperimentPlan plan = plan_from(c);
  ProcessingContext ctx = ProcessingContext::from_scene(plan.scene);
  if (a.targets) ctx.Q = *a.targets;
  if (ctx.Q < 1) throw ConfigError("model order must be at least 1");
  if (a.in.empty()) throw ConfigError("estimate needs at least one --in block");

  std::vector<SnapshotBlock> blocks;
  for (const auto& p : a.in) blocks.push_back(read_block(fs::path(p)));
  EstimateSet est;
  if (blocks.front().kind == FrameKind::JrcMdm) {
    est = process_jrc(blocks, ctx);
  } else {
    if (blocks.size() != 1) throw ConfigError("radar estimation takes a single block");
    est = estimate_positions_from_block(blocks.front(), ctx);
  }

  if (!a.cpi.empty()) {
    const SnapshotBlock cube = read_block(fs::path(a.cpi));
    if (cube.kind != FrameKind::CoherentCpi) throw ConfigError(a.cpi + " is not a coherent CPI block");
    if (cube.S != ctx.oam.state_count() || cube.M != ctx.array.M || cube.N != ctx.array.N)
      throw ConfigError("CPI block dimensions do not match the configuration");
    std::vector<CpiChannel> channels;
    for (int l : a.channel_l) {
      if (l % ctx.oam.delta() != 0 || std::abs(l / ctx.oam.delta()) > ctx.oam.U())
        throw ConfigError("CPI channel l=" + std::to_string(l) + " is not a transmitted state");
      if (a.channel_m < 0 || a.channel_m >= cube.M) throw ConfigError("CPI channel m out of range");
      const int s = l / ctx.oam.delta() + ctx.oam.U();
      channels.push_back({a.channel_m, l, cube.data.middleRows(cube.row(s, a.channel_m, 0), cube.N)});
    }
    const VelocityResult v = estimate_velocity(channels, est.targets, ctx, a.T_sym);
    for (std::size_t q = 0; q < est.targets.size(); ++q) {
      est.targets[q].nu = v.nu[q];
      est.targets[q].Omega = v.Omega[q];
      est.targets[q].nu_unresolved = v.unresolved[q];
      if (v.unresolved[q]) est.warnings.push_back("velocity of target " + std::to_string(q) + " unresolved");
    }
  }

  ordered_json out;
  out["version"] = kVersionDescribe;
  out["targets"] = ordered_json::array();
  for (const auto& t : est.targets)
    out["targets"].push_back({{"R", num(t.R)},
                              {"psi_deg", num(rad2deg(t.psi))},
                              {"r", num(t.r)},
                              {"phi_deg", num(rad2deg(t.phi))},
                              {"nu", num(t.nu)},
                              {"Omega", num(t.Omega)},
                              {"r_flag", t.r_flag}});
  out["warnings"] = est.warnings;
  out["symbols"] = ordered_json::array();
  for (std::size_t i = 0; i < est.symbols.comm_u.size(); ++i)
    out["symbols"].push_back({{"u", est.symbols.comm_u[i]},
                              {"erased", static_cast<bool>(est.symbols.erased[i])},
                              {"bits", bits_hex(est.symbols.bits[i])}});
  const std::string text = out.dump(2) + "\n";
  if (c.out.empty()) {
    std::cout << text;
  } else {
    std::error_code ec;
    fs::create_directories(c.out, ec);
    if (ec) throw IoError("cannot create " + c.out + ": " + ec.message());
    write_text_file(fs::path(c.out) / "estimate.json", text);
  }
  return 0;
}

// ---- mc ----

struct McArgs {
  std::optional<int> trials;
  std::optional<int> snapshots;
};

int run_mc(const Common& c, const McArgs& a) {
  ExperimentPlan plan = plan_from(c);
  if (a.trials) plan.trials = *a.trials;
  if (a.snapshots) plan.snapshots = *a.snapshots;
  plan.validate();
  if (!plan.allow_invalid)
    for (double mu : plan.mu_grid) require_valid(plan.scene.with_mu(mu), false);
  const MonteCarloResult res = run_monte_carlo(plan);
  std::vector<Table> tables{rmse_table(res.rmse)};
  if (!res.comm.empty()) tables.push_back(comm_table(res.comm));
  write_tables(c, tables, summary_json(plan, res));
  return 0;
}

// ---- crlb ----

int run_crlb(const Common& c, int snapshots, double T_sym, int cpi_slots) {
  const ExperimentPlan plan = plan_from(c);
  require_valid(plan.scene, plan.allow_invalid);
  Table t;
  t.name = "crlb";
  t.header = {"snr_db", "param_name", "target_index", "rcrlb"};
  for (const auto& r : crlb_sweep(plan.scene, plan.snr_grid_db, snapshots, default_t_eval(cpi_slots, T_sym)))
    t.rows.push_back({format_number(r.snr_db), r.param, std::to_string(r.target), format_number(r.rcrlb)});
  write_tables(c, {t});
  return 0;
}

// ---- ber ----

int run_ber(const Common& c, double T_sym, std::optional<double> corr_phi_deg) {
  const ExperimentPlan plan = plan_from(c);
  Table t;
  t.name = "ber";
  t.header = {"snr_db", "mu", "p_oam", "p_b", "p_e", "throughput_analytic"};
  for (double snr : plan.snr_grid_db)
    for (double mu : plan.mu_grid) {
      LinkParams p = link_params_for(plan.scene.with_mu(mu), snr, T_sym);
      if (corr_phi_deg) p.corr_phi = deg2rad(*corr_phi_deg);
      const LinkReport r = total_error_prob(p);
      t.rows.push_back({format_number(snr), format_number(mu), format_number(r.p_oam), format_number(r.p_b),
                        format_number(r.p_e), format_number(r.throughput)});
    }
  write_tables(c, {t});
  return 0;
}

// ---- field-map ----

struct FieldMapArgs {
  int l = 1;
  std::optional<double> z;
  std::optional<double> extent;
  int points = 101;
  std::string policy;
};

int run_field_map(const Common& c, const FieldMapArgs& a) {
  BeamConfig beam = c.config.empty() ? reference_scene().beam : load_scene(c.config).beam;
  if (a.policy == "fixed" || a.policy == "Fixed") {
    beam.waist_policy = WaistPolicy::Fixed;
  } else if (a.policy == "equal_ring" || a.policy == "EqualRing") {
    beam.waist_policy = WaistPolicy::EqualRing;
  } else if (!a.policy.empty()) {
    throw ConfigError("unknown waist policy '" + a.policy + "'");
  }
  const double z = a.z.value_or(beam.z_ref);
  if (!(z > 0)) throw ConfigError("field-map: z must be positive");
  if (a.points < 2) throw ConfigError("field-map: need at least 2 points per axis");
  const double half = a.extent.value_or(2.5 * beam_geometry(std::max(1, std::abs(a.l)), z, beam).r_max);

  Table t;
  t.name = "field_map";
  t.header = {"x", "y", "magnitude", "phase_rad"};
  for (int iy = 0; iy < a.points; ++iy) {
    const double y = -half + 2.0 * half * iy / (a.points - 1);
    for (int ix = 0; ix < a.points; ++ix) {
      const double x = -half + 2.0 * half * ix / (a.points - 1);
      const cdouble f = lg_field(std::hypot(x, y), std::atan2(y, x), z, a.l, beam);
      t.rows.push_back({format_number(x), format_number(y), format_number(std::abs(f)), format_number(std::arg(f))});
    }
  }
  write_tables(c, {t});
  return 0;
}

// ---- validate ----

int run_validate(const Common& c) {
  const ExperimentPlan plan = plan_from(c);
  const ValidationReport rep = validate_scene(plan.scene);
  if (c.format == "json") {
    ordered_json j = ordered_json::array();
    for (const auto& ch : rep.checks) j.push_back({{"id", ch.id}, {"pass", ch.pass}, {"detail", ch.detail}});
    std::cout << j.dump(2) << "\n";
  } else {
    for (const auto& ch : rep.checks)
      std::cout << (ch.pass ? "ok    " : "FAIL  ") << ch.id << (ch.detail.empty() ? "" : "  " + ch.detail) << "\n";
  }
  return rep.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"OAM joint radar-communications toolkit"};
  app.set_version_flag("--version", std::string(kVersionDescribe));
  app.require_subcommand(1);

  Common common;
  auto add_common = [&common](CLI::App* sub) {
    sub->add_option("--config", common.config, "scene / experiment JSON file");
    sub->add_option("--seed", common.seed, "base seed");
    sub->add_option("--out", common.out, "output directory (stdout when omitted)");
    sub->add_option("--format", common.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--threads", common.threads, "worker threads, 0 = auto")->check(CLI::NonNegativeNumber);
  };

  SynthArgs synth;
  auto* s_synth = app.add_subcommand("synth", "generate snapshot blocks");
  add_common(s_synth);
  s_synth->add_option("--frame", synth.frame, "radar, jrc or cpi");
  s_synth->add_option("--snapshots", synth.snapshots, "snapshots per block")->check(CLI::PositiveNumber);
  s_synth->add_option("--bits", synth.bits, "bits per comm state (jrc)")->check(CLI::NonNegativeNumber);
  s_synth->add_option("--slots", synth.slots, "slow-time slots (cpi)")->check(CLI::Range(2, 1 << 20));
  s_synth->add_option("--tsym", synth.T_sym, "symbol period in seconds");
  s_synth->add_option("--snr", synth.snr_db, "override the configured SNR (dB)");
  s_synth->add_flag("--wideband", synth.wideband, "element wavelengths in the phase terms");

  EstimateArgs est;
  auto* s_est = app.add_subcommand("estimate", "estimate targets and symbols from blocks");
  add_common(s_est);
  s_est->add_option("--in", est.in, "snapshot block(s); several JRC slots in order")->expected(1, -1);
  s_est->add_option("--cpi", est.cpi, "coherent CPI block for velocity");
  s_est->add_option("--tsym", est.T_sym, "CPI symbol period in seconds");
  s_est->add_option("--cpi-l", est.channel_l, "OAM states used for Doppler")->expected(2, -1);
  s_est->add_option("--cpi-m", est.channel_m, "transmit element used for Doppler");
  s_est->add_option("--targets", est.targets, "model order (defaults to the configured target count)");

  McArgs mc;
  auto* s_mc = app.add_subcommand("mc", "Monte Carlo RMSE / BER sweep");
  add_common(s_mc);
  s_mc->add_option("--trials", mc.trials, "trials per grid cell")->check(CLI::PositiveNumber);
  s_mc->add_option("--snapshots", mc.snapshots, "radar snapshots per trial")->check(CLI::PositiveNumber);

  int crlb_snapshots = 200, crlb_slots = 256;
  double T_sym = 5e-6;
  auto* s_crlb = app.add_subcommand("crlb", "root CRLB over the SNR grid");
  add_common(s_crlb);
  s_crlb->add_option("--snapshots", crlb_snapshots, "radar snapshots")->check(CLI::PositiveNumber);
  s_crlb->add_option("--slots", crlb_slots, "CPI slots (velocity bound epoch)")->check(CLI::PositiveNumber);
  s_crlb->add_option("--tsym", T_sym, "symbol period in seconds");

  std::optional<double> corr_phi;
  auto* s_ber = app.add_subcommand("ber", "analytic error probability and throughput");
  add_common(s_ber);
  s_ber->add_option("--tsym", T_sym, "symbol period in seconds");
  s_ber->add_option("--corr-phi", corr_phi, "azimuth (deg) in the state correlation");

  FieldMapArgs fm;
  auto* s_fm = app.add_subcommand("field-map", "LG field magnitude and phase on an x/y grid");
  add_common(s_fm);
  s_fm->add_option("--l", fm.l, "OAM number");
  s_fm->add_option("--z", fm.z, "propagation distance (m)");
  s_fm->add_option("--extent", fm.extent, "half width of the grid (m)");
  s_fm->add_option("--points", fm.points, "points per axis");
  s_fm->add_option("--policy", fm.policy, "waist policy: equal_ring or fixed");

  auto* s_val = app.add_subcommand("validate", "identifiability checks for a scene");
  add_common(s_val);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (s_synth->parsed()) return run_synth(common, synth);
    if (s_est->parsed()) return run_estimate(common, est);
    if (s_mc->parsed()) return run_mc(common, mc);
    if (s_crlb->parsed()) return run_crlb(common, crlb_snapshots, T_sym, crlb_slots);
    if (s_ber->parsed()) return run_ber(common, T_sym, corr_phi);
    if (s_fm->parsed()) return run_field_map(common, fm);
    if (s_val->parsed()) return run_validate(common);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const EstimationError& e) {
    std::cerr << "estimation failed: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::domain_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

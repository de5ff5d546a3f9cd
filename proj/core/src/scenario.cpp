#include "oamjrc/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "oamjrc/constants.hpp"

namespace oamjrc {

double ArrayConfig::wavelength0() const { return kSpeedOfLight / f0; }

double ArrayConfig::wavelength(int m) const { return kSpeedOfLight / (f0 - m * delta_f); }

void ArrayConfig::validate() const {
  if (M < 1 || N < 1) throw std::invalid_argument("array: M and N must be >= 1");
  if (!(d > 0.0)) throw std::invalid_argument("array: d must be positive");
  if (!(f0 > 0.0)) throw std::invalid_argument("array: f0 must be positive");
  if (!(delta_f > 0.0)) throw std::invalid_argument("array: delta_f must be positive");
}

OamPlan::OamPlan(int U, int delta, double mu) : U_(U), delta_(delta), mu_(mu) {
  if (U < 0) throw std::invalid_argument("oam: U must be >= 0");
  if (delta < 1) throw std::invalid_argument("oam: delta must be a positive integer");
  if (!(mu >= 0.0 && mu <= 1.0)) throw std::invalid_argument("oam: mu must lie in [0, 1]");
  radar_half_ = static_cast<int>(std::floor(mu * U + 1e-9));
}

bool OamPlan::mu_is_integral() const {
  const double x = mu_ * U_;
  return std::abs(x - std::round(x)) < 1e-9;
}

std::vector<int> OamPlan::radar_states() const {
  std::vector<int> out;
  for (int u = -radar_half_; u <= radar_half_; ++u) out.push_back(u);
  return out;
}

std::vector<int> OamPlan::comm_states() const {
  std::vector<int> out;
  for (int u = -U_; u <= U_; ++u)
    if (!is_radar(u)) out.push_back(u);
  return out;
}

double Scene::ring_radius() const { return beam_geometry(1, beam.z_ref, beam).r_max; }

double Scene::curvature(int l) const { return beam_geometry(l, beam.z_ref, beam).R_z; }

double Scene::total_signal_power() const {
  double s = 0.0;
  for (const auto& t : targets) s += t.sigma2;
  return s;
}

double Scene::snr_db() const {
  if (noise_power <= 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(total_signal_power() / noise_power);
}

void Scene::set_snr_db(double snr) {
  if (std::isinf(snr) && snr > 0) {
    noise_power = 0.0;
    return;
  }
  noise_power = total_signal_power() / std::pow(10.0, snr / 10.0);
}

Scene Scene::with_mu(double mu) const {
  Scene s = *this;
  s.oam = OamPlan(oam.U(), oam.delta(), mu);
  return s;
}

bool ValidationReport::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
}

const ConditionCheck* ValidationReport::find(const std::string& id) const {
  for (const auto& c : checks)
    if (c.id == id) return &c;
  return nullptr;
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(8);
  os << v;
  return os.str();
}

}  // namespace

AmbiguityLimits ambiguity_limits(const Scene& scene) {
  AmbiguityLimits lim;
  lim.R_max = kSpeedOfLight / scene.array.delta_f;
  lim.phi_max = kPi / (2.0 * scene.oam.delta());
  lim.phi_min = -lim.phi_max;

  double min_curv = std::numeric_limits<double>::infinity();
  for (int u : scene.oam.radar_states())
    min_curv = std::min(min_curv, scene.curvature(scene.oam.l(u)));
  const double rm = scene.ring_radius();
  const double half = scene.array.wavelength0() / 2.0 * min_curv;
  lim.r_min = std::sqrt(std::max(0.0, rm * rm - half));
  lim.r_max = std::sqrt(rm * rm + half);
  return lim;
}

ValidationReport validate_scene(const Scene& scene) {
  ValidationReport rep;
  auto add = [&rep](std::string id, bool pass, std::string detail) {
    rep.checks.push_back({std::move(id), pass, std::move(detail)});
  };

  const auto& a = scene.array;
  const int Q = scene.Q();
  const bool array_ok = a.M >= 1 && a.N >= 1 && a.d > 0 && a.f0 > 0 && a.delta_f > 0;
  const bool beam_ok = scene.beam.wavelength0 > 0 && scene.beam.w_ref > 0 && scene.beam.z_ref > 0;
  add("array", array_ok, array_ok ? "" : "non-positive array dimension or frequency");
  add("beam", beam_ok, beam_ok ? "" : "non-positive beam length");
  if (!array_ok || !beam_ok) return rep;

  double R_far = 0.0;
  for (const auto& t : scene.targets) R_far = std::max(R_far, t.R);

  const double d_limit = kSpeedOfLight / (2.0 * a.f0);
  add("C1", a.d <= d_limit * (1 + 1e-12), "d=" + fmt(a.d) + " limit=" + fmt(d_limit));
  const double df_limit = R_far > 0 ? kSpeedOfLight / R_far : std::numeric_limits<double>::infinity();
  add("C2", a.delta_f <= df_limit, "delta_f=" + fmt(a.delta_f) + " limit=" + fmt(df_limit));
  add("C3", a.N > Q, "N=" + std::to_string(a.N) + " Q=" + std::to_string(Q));
  add("C4", a.M > Q, "M=" + std::to_string(a.M) + " Q=" + std::to_string(Q));
  const double mu = scene.oam.mu();
  const bool c5 = scene.oam.U() > 0 && mu >= 1.0 / scene.oam.U() - 1e-12 && mu <= 1.0;
  add("C5", c5, "mu=" + fmt(mu) + " U=" + std::to_string(scene.oam.U()));
  add("mu_integral", scene.oam.mu_is_integral(), "mu*U=" + fmt(mu * scene.oam.U()));
  add("targets", Q >= 1, "Q=" + std::to_string(Q));

  const AmbiguityLimits lim = ambiguity_limits(scene);
  for (int q = 0; q < Q; ++q) {
    const auto& t = scene.targets[q];
    const std::string k = "[" + std::to_string(q) + "]";
    add("A1.R" + k, t.R >= scene.beam.z_ref && t.R <= lim.R_max,
        "R=" + fmt(t.R) + " in [" + fmt(scene.beam.z_ref) + ", " + fmt(lim.R_max) + "]");
    add("A2.phi" + k, t.phi >= lim.phi_min && t.phi <= lim.phi_max,
        "phi=" + fmt(t.phi) + " in [" + fmt(lim.phi_min) + ", " + fmt(lim.phi_max) + "]");
    add("A2.r" + k, t.r >= lim.r_min && t.r <= lim.r_max,
        "r=" + fmt(t.r) + " in [" + fmt(lim.r_min) + ", " + fmt(lim.r_max) + "]");
    add("sigma2" + k, t.sigma2 > 0, "sigma2=" + fmt(t.sigma2));
  }

  bool distinct_sin = true;
  bool distinct_R = true;
  for (int p = 0; p < Q; ++p)
    for (int q = p + 1; q < Q; ++q) {
      if (std::abs(std::sin(scene.targets[p].psi) - std::sin(scene.targets[q].psi)) < 1e-12)
        distinct_sin = false;
      if (std::abs(scene.targets[p].R - scene.targets[q].R) < 1e-12) distinct_R = false;
    }
  add("A1.distinct_sin_psi", distinct_sin, "");
  add("A1.distinct_R", distinct_R, "");
  add("noise", scene.noise_power >= 0.0, "noise_power=" + fmt(scene.noise_power));
  return rep;
}

Scene reference_scene(double mu) {
  Scene s;
  s.array.M = 6;
  s.array.N = 6;
  s.array.f0 = 79e9;
  s.array.delta_f = 30e3;
  s.array.d = s.array.wavelength0() / 2.0;

  s.beam.wavelength0 = s.array.wavelength0();
  s.beam.w_ref = 2.0 * s.beam.wavelength0;
  s.beam.waist_policy = WaistPolicy::EqualRing;
  s.beam.z_ref = 1.9;

  s.oam = OamPlan(10, 1, mu);
  s.targets = {
      {deg2rad(5.0), deg2rad(45.0), 10.0, 0.21, 1.0, 10.0},
      {deg2rad(30.0), deg2rad(60.0), 15.0, 0.215, 1.0, 20.0},
      {deg2rad(60.0), deg2rad(30.0), 7.0, 0.22, 1.0, 5.0},
  };
  s.set_snr_db(10.0);
  return s;
}

}  // namespace oamjrc

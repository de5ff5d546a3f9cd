#include "oamjrc/linktheory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace oamjrc {

double LinkParams::power_of(int comm_index) const {
  if (sigma_s2.empty()) return sigma_s2_default;
  return sigma_s2.at(static_cast<std::size_t>(comm_index));
}

void LinkParams::validate() const {
  if (!(mu >= 0.0 && mu <= 1.0)) throw std::invalid_argument("link: mu must lie in [0, 1]");
  if (U < 0 || delta < 1) throw std::invalid_argument("link: invalid OAM plan");
  if (!(sigma_n2 > 0.0)) throw std::invalid_argument("link: sigma_n2 must be positive");
  if (!(gamma_bar_b >= 0.0)) throw std::invalid_argument("link: gamma_bar_b must be >= 0");
  if (!(T_sym > 0.0)) throw std::invalid_argument("link: T_sym must be positive");
  if (!(sigma_s2_default > 0.0)) throw std::invalid_argument("link: sigma_s2 must be positive");
  for (double s : sigma_s2)
    if (!(s > 0.0)) throw std::invalid_argument("link: sigma_s2 must be positive");
  if (!sigma_s2.empty() && static_cast<int>(sigma_s2.size()) != plan().comm_state_count())
    throw std::invalid_argument("link: one sigma_s2 per comm state required");
}

double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double pep(int l_u, int l_v, double sigma_s2, const LinkParams& p) {
  if (l_u == l_v) throw std::invalid_argument("pep: states must differ");
  const double C = std::cos((l_u - l_v) * p.corr_phi);
  const double arg = (1.0 - p.mu) * p.U * sigma_s2 * std::max(0.0, 1.0 - C) / p.sigma_n2;
  return q_function(std::sqrt(arg));
}

double oam_detect_prob(const LinkParams& p, bool* clamped) {
  const OamPlan plan = p.plan();
  const std::vector<int> comm = plan.comm_states();
  double sum = 0.0;
  for (std::size_t a = 0; a < comm.size(); ++a)
    for (std::size_t b = 0; b < comm.size(); ++b)
      if (a != b) sum += pep(plan.l(comm[a]), plan.l(comm[b]), p.power_of(static_cast<int>(a)), p);
  const double raw = 1.0 - sum;
  if (clamped) *clamped = raw < 0.0 || raw > 1.0;
  return std::clamp(raw, 0.0, 1.0);
}

double dpsk_ber_rayleigh(double gamma_bar_b) {
  if (!(gamma_bar_b >= 0.0)) throw std::invalid_argument("dpsk_ber_rayleigh: negative mean SNR");
  return 0.5 / (1.0 + gamma_bar_b);
}

LinkReport total_error_prob(const LinkParams& p) {
  p.validate();
  const OamPlan plan = p.plan();
  const std::vector<int> comm = plan.comm_states();
  const int C = static_cast<int>(comm.size());

  LinkReport r;
  for (int u : comm) r.comm_l.push_back(plan.l(u));
  r.p_b = dpsk_ber_rayleigh(p.gamma_bar_b);
  if ((1.0 - p.mu) * p.U < 1.0 - 1e-9 || C == 0) {
    r.comm_disabled = true;
    r.p_oam = 0.0;
    r.p_e = std::nan("");
    r.throughput = 0.0;
    r.pep = RMatrix::Zero(C, C);
    return r;
  }

  r.pep = RMatrix::Zero(C, C);
  for (int a = 0; a < C; ++a)
    for (int b = 0; b < C; ++b)
      if (a != b) {
        r.pep(a, b) = pep(r.comm_l[a], r.comm_l[b], p.power_of(a), p);
        r.union_sum += r.pep(a, b);
      }
  const double raw = 1.0 - r.union_sum;
  r.p_oam_clamped = raw < 0.0;
  r.p_oam = std::clamp(raw, 0.0, 1.0);
  r.p_e = 1.0 - (1.0 - r.p_b) * r.p_oam;
  r.bits_per_symbol = std::log2(2.0 * (1.0 - p.mu) * p.U) + 1.0;
  r.throughput = (1.0 - r.p_e) * r.bits_per_symbol / p.T_sym;
  return r;
}

double throughput_empirical(double bits_delivered, double duration) {
  if (!(duration > 0.0)) throw std::invalid_argument("throughput: duration must be positive");
  return bits_delivered / duration;
}

LinkParams link_params_for(const Scene& scene, double snr_db, double T_sym) {
  LinkParams p;
  p.mu = scene.oam.mu();
  p.U = scene.oam.U();
  p.delta = scene.oam.delta();
  p.T_sym = T_sym;
  const double snr = std::pow(10.0, snr_db / 10.0);
  p.sigma_s2_default = 1.0;
  p.sigma_n2 = 1.0 / snr;
  p.gamma_bar_b = snr;
  if (!scene.targets.empty()) {
    const auto it = std::max_element(scene.targets.begin(), scene.targets.end(),
                                     [](const Scatterer& a, const Scatterer& b) { return a.sigma2 < b.sigma2; });
    p.corr_phi = it->phi;
  }
  return p;
}

}  // namespace oamjrc

#include "oamjrc/scene_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "oamjrc/constants.hpp"
#include "oamjrc/errors.hpp"

namespace oamjrc {

using nlohmann::json;

namespace {

double number_or_inf(const json& v, const char* what) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "+inf" || s == "Infinity") return std::numeric_limits<double>::infinity();
  }
  throw ConfigError(std::string("expected a number or \"inf\" for ") + what);
}

WaistPolicy parse_policy(const std::string& s) {
  if (s == "EqualRing" || s == "equal_ring") return WaistPolicy::EqualRing;
  if (s == "Fixed" || s == "fixed") return WaistPolicy::Fixed;
  throw ConfigError("unknown waist_policy '" + s + "'");
}

Scene scene_from_tree(const json& root) {
  Scene s;
  try {
    const json& arr = root.at("array");
    s.array.M = arr.at("M").get<int>();
    s.array.N = arr.at("N").get<int>();
    s.array.f0 = arr.at("f0").get<double>();
    s.array.delta_f = arr.at("delta_f").get<double>();
    s.array.d = arr.contains("d") ? arr["d"].get<double>() : s.array.wavelength0() / 2.0;

    const json& beam = root.at("beam");
    s.beam.wavelength0 = s.array.wavelength0();
    if (beam.contains("w_ref"))
      s.beam.w_ref = beam["w_ref"].get<double>();
    else
      s.beam.w_ref = beam.value("w_ref_wavelengths", 2.0) * s.beam.wavelength0;
    s.beam.waist_policy = parse_policy(beam.value("waist_policy", std::string("EqualRing")));
    s.beam.z_ref = beam.at("z_ref").get<double>();

    const json& oam = root.at("oam");
    const int U = oam.at("U").get<int>();
    const int delta = oam.value("delta", 1);
    const double mu = oam.at("mu").get<double>();
    s.oam = OamPlan(U, delta, mu);
    if (!s.oam.mu_is_integral())
      throw ConfigError("oam: mu * U must be an integer (got " + std::to_string(mu * U) + ")");

    for (const json& t : root.at("targets")) {
      Scatterer sc;
      sc.phi = deg2rad(t.at("phi_deg").get<double>());
      sc.psi = deg2rad(t.at("psi_deg").get<double>());
      sc.R = t.at("R").get<double>();
      sc.r = t.at("r").get<double>();
      sc.sigma2 = t.value("sigma2", 1.0);
      sc.nu = t.value("nu", 0.0);
      s.targets.push_back(sc);
    }

    if (root.contains("noise")) {
      const json& noise = root["noise"];
      if (noise.contains("power"))
        s.noise_power = noise["power"].get<double>();
      else if (noise.contains("snr_db"))
        s.set_snr_db(number_or_inf(noise["snr_db"], "noise.snr_db"));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scene config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("scene config: ") + e.what());
  }
  s.array.validate();
  s.beam.validate();
  return s;
}

}  // namespace

Scene parse_scene(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scene config is not valid JSON: ") + e.what());
  }
  try {
    return scene_from_tree(root);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Scene load_scene(const std::filesystem::path& path) { return parse_scene(read_text_file(path)); }

std::string scene_to_json(const Scene& s, int indent) {
  json root;
  root["array"] = {{"M", s.array.M},
                   {"N", s.array.N},
                   {"f0", s.array.f0},
                   {"delta_f", s.array.delta_f},
                   {"d", s.array.d}};
  root["beam"] = {{"w_ref", s.beam.w_ref},
                  {"waist_policy",
                   s.beam.waist_policy == WaistPolicy::EqualRing ? "EqualRing" : "Fixed"},
                  {"z_ref", s.beam.z_ref}};
  root["oam"] = {{"U", s.oam.U()}, {"delta", s.oam.delta()}, {"mu", s.oam.mu()}};
  json targets = json::array();
  for (const auto& t : s.targets)
    targets.push_back({{"phi_deg", rad2deg(t.phi)},
                       {"psi_deg", rad2deg(t.psi)},
                       {"R", t.R},
                       {"r", t.r},
                       {"sigma2", t.sigma2},
                       {"nu", t.nu}});
  root["targets"] = targets;
  root["noise"] = {{"power", s.noise_power}};
  return root.dump(indent);
}

}  // namespace oamjrc

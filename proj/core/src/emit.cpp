#include <charconv>
#include <cmath>
#include <fstream>
#include <system_error>

#include <json.hpp>

#include "oamjrc/constants.hpp"
#include "oamjrc/errors.hpp"
#include "oamjrc/harness.hpp"
#include "oamjrc/scene_io.hpp"
#include "oamjrc/version.hpp"

namespace oamjrc {

using nlohmann::ordered_json;

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

Table rmse_table(const std::vector<RmseRow>& rows) {
  Table t;
  t.name = "rmse";
  t.header = {"snr_db", "mu", "param", "rmse", "rcrlb", "trials", "failures"};
  for (const auto& r : rows)
    t.rows.push_back({format_number(r.snr_db), format_number(r.mu), r.param, format_number(r.rmse),
                      format_number(r.rcrlb), std::to_string(r.trials), std::to_string(r.failures)});
  return t;
}

Table comm_table(const std::vector<CommRow>& rows) {
  Table t;
  t.name = "comm";
  t.header = {"snr_db", "mu", "bits_sent", "bit_errors", "ber", "p_e_analytic",
              "throughput_empirical", "throughput_analytic", "failures"};
  for (const auto& r : rows)
    t.rows.push_back({format_number(r.snr_db), format_number(r.mu), std::to_string(r.bits_sent),
                      std::to_string(r.bit_errors), format_number(r.ber), format_number(r.p_e_analytic),
                      format_number(r.throughput_empirical), format_number(r.throughput_analytic),
                      std::to_string(r.failures)});
  return t;
}

std::string to_csv(const Table& t) {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
  return out;
}

namespace {

ordered_json cell_value(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec == std::errc() && res.ptr == s.data() + s.size()) {
    if (std::isfinite(v)) return v;
    return nullptr;
  }
  if (s == "nan" || s == "inf" || s == "-inf") return nullptr;
  return s;
}

}  // namespace

std::string to_json(const Table& t) {
  ordered_json arr = ordered_json::array();
  for (const auto& r : t.rows) {
    ordered_json o = ordered_json::object();
    for (std::size_t i = 0; i < t.header.size() && i < r.size(); ++i) o[t.header[i]] = cell_value(r[i]);
    arr.push_back(std::move(o));
  }
  return arr.dump(2) + "\n";
}

std::string summary_json(const ExperimentPlan& plan, const MonteCarloResult& result) {
  ordered_json j;
  j["version"] = kVersionDescribe;
  ordered_json e;
  e["snr_db"] = plan.snr_grid_db;
  e["mu"] = plan.mu_grid;
  e["mu_grid_note"] = "reproduction choice; the sharing factors are not part of the scene";
  e["trials"] = plan.trials;
  e["snapshots"] = plan.snapshots;
  e["velocity"] = plan.velocity;
  e["cpi_slots"] = plan.cpi_slots;
  e["T_sym"] = plan.T_sym;
  ordered_json ch = ordered_json::array();
  for (const auto& c : plan.cpi_channels) ch.push_back({{"m", c.m}, {"l", c.l}});
  e["cpi_channels"] = ch;
  e["comm"] = {{"bits", plan.comm_bits}, {"snapshots", plan.comm_snapshots}};
  e["seed"] = plan.seed;
  e["allow_invalid"] = plan.allow_invalid;
  j["experiment"] = e;
  j["scene"] = ordered_json::parse(scene_to_json(plan.scene));

  int failures = 0;
  for (const auto& r : result.rmse)
    if (r.param == "R") failures += r.failures;
  j["rows"] = {{"rmse", result.rmse.size()}, {"comm", result.comm.size()}};
  j["failed_trials"] = failures;
  return j.dump(2) + "\n";
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << text;
  if (!os) throw IoError("failed writing " + path.string());
}

void emit_results(const std::vector<Table>& tables, const std::string& format,
                  const std::filesystem::path& out_dir, const std::string& summary) {
  if (format != "csv" && format != "json") throw ConfigError("unknown output format '" + format + "'");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
  for (const auto& t : tables)
    write_text_file(out_dir / (t.name + "." + format), format == "csv" ? to_csv(t) : to_json(t));
  if (!summary.empty()) write_text_file(out_dir / "summary.json", summary);
}

}  // namespace oamjrc

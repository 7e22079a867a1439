#pragma once

#include <charconv>
#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "beamwander/analytics.hpp"
#include "beamwander/cli/config.hpp"
#include "beamwander/experiment.hpp"
#include "beamwander/screen_validation.hpp"

namespace beamwander::cli {

inline constexpr std::string_view kSweepCsvVersion = "beamwander-sweep-csv v1";
inline constexpr std::string_view kSweepColumns =
    "cn2,r1_ratio,rw2_mean,rw2_se,rb2_sim,rb2_analytic,ratio,n_atm,n_src,seed,status";

using nlohmann::ordered_json;

/// Shortest round-trip text for a double.
inline std::string num(double v) {
  if (std::isnan(v))
    return "nan";
  if (std::isinf(v))
    return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

inline std::string csv_field(std::string s) {
  for (char &c : s)
    if (c == ',' || c == '\n' || c == '\r' || c == '"')
      c = ';';
  return s;
}

inline void write_config_comment(std::ostream &os, const RunConfig &rc, std::string_view command) {
  os << "# command: " << command << "\n";
  os << echo_text(rc, "# config: ");
}

inline void write_sweep_csv(std::ostream &os, const RunConfig &rc, std::string_view command,
                            const std::vector<SweepRow> &rows) {
  os << "# " << kSweepCsvVersion << "\n";
  write_config_comment(os, rc, command);
  os << kSweepColumns << "\n";
  for (const auto &r : rows) {
    const auto &s = r.stats;
    os << num(r.cn2) << ',' << num(r.r1_ratio) << ',' << num(s.rw2_mean) << ',' << num(s.rw2_se)
       << ',' << num(s.rb2_longterm) << ',' << num(s.rb2_analytic) << ',' << num(s.ratio()) << ','
       << s.n_atm << ',' << s.n_src << ',' << s.seed << ',' << csv_field(r.status) << "\n";
  }
}

inline ordered_json config_json(const RunConfig &rc) {
  ordered_json j = ordered_json::object();
  for (const auto &[k, v] : rc.echo)
    if (!v.empty())
      j[k] = v;
  return j;
}

inline ordered_json stats_json(const WanderStats &s) {
  const auto &d = s.diagnostics;
  return {
      {"estimator", std::string(to_string(s.estimator))},
      {"rw2_mean", s.rw2_mean},
      {"rw2_se", s.rw2_se},
      {"rb2_longterm", s.rb2_longterm},
      {"rb2_longterm_se", s.rb2_longterm_se},
      {"rb2_shortterm", s.rb2_shortterm},
      {"rb2_shortterm_se", s.rb2_shortterm_se},
      {"rb2_analytic", s.rb2_analytic},
      {"ratio", s.ratio()},
      {"decomposition_residual", s.decomposition_residual},
      {"decomposition_se", s.decomposition_se},
      {"decomposition_holds", s.decomposition_holds()},
      {"n_atm", s.n_atm},
      {"n_src", s.n_src},
      {"seed", s.seed},
      {"diagnostics",
       {{"valid", d.valid},
        {"message", d.message},
        {"max_absorbed_fraction", d.max_absorbed_fraction},
        {"step_phase_variance", d.step_phase_variance},
        {"max_screen_step_phase", d.max_screen_step_phase},
        {"window_to_beam_radius", d.window_to_beam_radius},
        {"inner_scale_unresolved", d.inner_scale_unresolved},
        {"enough_realizations", d.enough_realizations},
        {"strong_turbulence", d.strong_turbulence}}},
  };
}

inline ordered_json sweep_json(const RunConfig &rc, std::string_view command,
                               const std::vector<SweepRow> &rows) {
  ordered_json j;
  j["format"] = "beamwander-sweep-json v1";
  j["command"] = command;
  j["config"] = config_json(rc);
  j["rows"] = ordered_json::array();
  for (const auto &r : rows) {
    ordered_json row;
    row["cn2"] = r.cn2;
    row["r1_ratio"] = r.r1_ratio;
    row["status"] = r.status;
    row["stats"] = stats_json(r.stats);
    j["rows"].push_back(row);
  }
  return j;
}

/// Every closed-form quantity for one parameter set.
struct AnalyticReport {
  double r1 = 0.0;
  double lambda_c = 0.0;
  double omega0 = 0.0;
  WanderPrediction weak;
  double classic = 0.0;
  double rb2 = 0.0;
  double broadening = 0.0;
  StrongTurbulenceCheck strong;
  std::optional<CrossCorrelationEstimate> cross;
};

inline AnalyticReport analytic_report(const ExperimentConfig &e) {
  AnalyticReport a;
  a.r1 = e.src.r1();
  a.lambda_c = e.src.lambda_c;
  a.omega0 = carrier_frequency(e.src);
  a.weak = wander_variance_weak(e.src, e.turb, e.geom);
  a.classic = classic_wander(e.turb.cn2, e.geom.z, e.src.r0);
  a.rb2 = beam_radius_squared(e.src, e.turb, e.geom);
  a.broadening = turbulence_broadening(e.turb, e.geom.z);
  a.strong = strong_turbulence_condition(e.src, e.turb, e.geom);
  if (e.turb.cn2 > 0.0)
    a.cross = cross_correlation_wander(e.src, e.turb, e.geom);
  return a;
}

inline constexpr std::string_view kAnalyticColumns =
    "cn2,z,r0,r1,lambda_c,q0,i1_a2,i1,regime,rw2_weak,rw2_classic,rb2,delta_rb2,strong,"
    "strong_margin,rw2_cross,cross_advisory_only";

inline void write_analytic_csv(std::ostream &os, const RunConfig &rc, const AnalyticReport &a) {
  const auto &e = rc.experiment;
  os << "# beamwander-analytic-csv v1\n";
  write_config_comment(os, rc, "analytic");
  os << kAnalyticColumns << "\n";
  os << num(e.turb.cn2) << ',' << num(e.geom.z) << ',' << num(e.src.r0) << ',' << num(a.r1) << ','
     << num(a.lambda_c) << ',' << num(e.src.q0) << ',' << num(a.weak.a2) << ',' << num(a.weak.i1)
     << ',' << to_string(a.weak.regime) << ',' << num(a.weak.rw2) << ',' << num(a.classic) << ','
     << num(a.rb2) << ',' << num(a.broadening) << ',' << (a.strong.holds ? "true" : "false") << ','
     << num(a.strong.margin) << ',' << (a.cross ? num(a.cross->rw2) : "nan") << ','
     << (a.cross ? (a.cross->advisory_only ? "true" : "false") : "true") << "\n";
}

inline ordered_json analytic_json(const RunConfig &rc, const AnalyticReport &a) {
  ordered_json j;
  j["format"] = "beamwander-analytic-json v1";
  j["config"] = config_json(rc);
  j["r1"] = a.r1;
  j["lambda_c"] = std::isinf(a.lambda_c) ? ordered_json("inf") : ordered_json(a.lambda_c);
  j["omega0"] = a.omega0;
  j["i1_a2"] = a.weak.a2;
  j["i1"] = a.weak.i1;
  j["regime"] = std::string(to_string(a.weak.regime));
  j["rw2_weak"] = a.weak.rw2;
  j["rw2_classic"] = a.classic;
  j["rb2"] = a.rb2;
  j["delta_rb2"] = a.broadening;
  j["strong_turbulence"] = {{"holds", a.strong.holds}, {"margin", a.strong.margin}};
  if (a.cross)
    j["rw2_cross"] = {{"value", a.cross->rw2}, {"advisory_only", a.cross->advisory_only}};
  else
    j["rw2_cross"] = nullptr;
  return j;
}

inline constexpr std::string_view kValidationColumns =
    "separation,empirical,std_error,theory,relative_error,in_range,pass";

inline void write_validation_csv(std::ostream &os, const RunConfig &rc,
                                 const ScreenValidationReport &r) {
  os << "# beamwander-validate-screens-csv v1\n";
  write_config_comment(os, rc, "validate-screens");
  os << "# checked range: [" << num(r.range_lo) << ", " << num(r.range_hi) << "] m, screens "
     << r.screens << ", overall " << (r.pass ? "PASS" : "FAIL") << "\n";
  os << kValidationColumns << "\n";
  for (const auto &b : r.bins)
    os << num(b.separation) << ',' << num(b.empirical) << ',' << num(b.std_error) << ','
       << num(b.theory) << ',' << num(b.relative_error) << ',' << (b.in_range ? "true" : "false")
       << ',' << (b.pass ? "true" : "false") << "\n";
}

inline ordered_json validation_json(const RunConfig &rc, const ScreenValidationReport &r) {
  ordered_json j;
  j["format"] = "beamwander-validate-screens-json v1";
  j["config"] = config_json(rc);
  j["range"] = {r.range_lo, r.range_hi};
  j["screens"] = r.screens;
  j["pass"] = r.pass;
  j["bins"] = ordered_json::array();
  for (const auto &b : r.bins)
    j["bins"].push_back({{"separation", b.separation},
                         {"empirical", b.empirical},
                         {"std_error", b.std_error},
                         {"theory", b.theory},
                         {"relative_error", b.relative_error},
                         {"in_range", b.in_range},
                         {"pass", b.pass}});
  return j;
}

} // namespace beamwander::cli

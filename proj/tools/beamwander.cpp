// beamwander: beam-wander analytics, Monte Carlo runs, C_n² sweeps and screen checks.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "beamwander/cli/config.hpp"
#include "beamwander/cli/report.hpp"
#include "beamwander/experiment.hpp"
#include "beamwander/screen_io.hpp"
#include "beamwander/screen_validation.hpp"

namespace bw = beamwander;
namespace cli = beamwander::cli;

namespace {

enum Exit { kOk = 0, kConfigError = 1, kNumericalError = 2, kInternalError = 3 };

struct Invocation {
  std::string config_path;
  std::map<std::string, std::string> overrides;
  double inject_exponent = 0.0;
  std::string dump_screen;
};

/// Registers --config and one --<key> override per schema key.
void add_config_options(CLI::App &sub, Invocation &inv) {
  sub.add_option("-c,--config", inv.config_path, "key = value config file");
  for (const auto &k : cli::kKeys) {
    const std::string key(k.name);
    sub.add_option_function<std::string>(
           "--" + cli::flag_name(k.name),
           [&inv, key](const std::string &v) { inv.overrides[key] = v; }, std::string(k.help))
        ->type_name("VALUE");
  }
}

std::optional<int> env_workers() {
  const char *s = std::getenv("BEAMWANDER_WORKERS");
  if (!s || !*s)
    return std::nullopt;
  char *end = nullptr;
  const long v = std::strtol(s, &end, 10);
  if (*end != '\0' || v < 0)
    throw bw::ConfigError("BEAMWANDER_WORKERS", "expected a nonnegative integer");
  return static_cast<int>(v);
}

cli::RunConfig resolve(const Invocation &inv) {
  cli::RawConfig raw;
  if (!inv.config_path.empty())
    cli::read_config_file(inv.config_path, raw);
  for (const auto &[k, v] : inv.overrides)
    cli::apply_override(raw, k, v);
  return cli::resolve_config(raw, env_workers());
}

void emit(const cli::RunConfig &rc, const std::string &text) {
  if (rc.output == "-") {
    std::cout << text;
    return;
  }
  std::ofstream os(rc.output, std::ios::binary);
  if (!os)
    throw bw::ConfigError("output", "cannot open " + rc.output);
  os << text;
  if (!os)
    throw bw::Error("failed writing " + rc.output);
}

int cmd_analytic(const Invocation &inv) {
  const auto rc = resolve(inv);
  const auto a = cli::analytic_report(rc.experiment);
  std::ostringstream os;
  if (rc.format.value_or(cli::OutputFormat::json) == cli::OutputFormat::json)
    os << cli::analytic_json(rc, a).dump(2) << "\n";
  else
    cli::write_analytic_csv(os, rc, a);
  emit(rc, os.str());
  return kOk;
}

int cmd_simulate(const Invocation &inv) {
  const auto rc = resolve(inv);
  bw::SweepRow row;
  row.cn2 = rc.experiment.turb.cn2;
  const double r1 = rc.experiment.src.r1();
  row.r1_ratio = r1 * r1 / (rc.experiment.src.r0 * rc.experiment.src.r0);
  row.stats = bw::run_wander_experiment(rc.experiment);
  const auto &d = row.stats.diagnostics;
  if (!d.valid)
    row.status = "invalid: " + d.message;
  else if (!d.enough_realizations)
    row.status = "ok-low-n";
  std::ostringstream os;
  if (rc.format.value_or(cli::OutputFormat::csv) == cli::OutputFormat::json)
    os << cli::sweep_json(rc, "simulate", {row}).dump(2) << "\n";
  else
    cli::write_sweep_csv(os, rc, "simulate", {row});
  emit(rc, os.str());
  if (!d.valid) {
    std::cerr << "beamwander: run invalidated: " << d.message << "\n";
    return kNumericalError;
  }
  return kOk;
}

int cmd_sweep(const Invocation &inv) {
  const auto rc = resolve(inv);
  if (rc.cn2_grid.empty())
    throw bw::ConfigError("cn2_grid", "missing required key");
  const auto rows = bw::sweep_cn2(rc.experiment, rc.cn2_grid, rc.ratios);
  std::ostringstream os;
  if (rc.format.value_or(cli::OutputFormat::csv) == cli::OutputFormat::json)
    os << cli::sweep_json(rc, "sweep", rows).dump(2) << "\n";
  else
    cli::write_sweep_csv(os, rc, "sweep", rows);
  emit(rc, os.str());
  int failed = 0;
  for (const auto &r : rows)
    if (!r.ok()) {
      ++failed;
      std::cerr << "beamwander: cn2=" << r.cn2 << " ratio=" << r.r1_ratio << ": " << r.status
                << "\n";
    }
  return failed ? kNumericalError : kOk;
}

int cmd_validate_screens(const Invocation &inv) {
  const auto rc = resolve(inv);
  const auto &e = rc.experiment;
  bw::ScreenValidationOptions opts;
  opts.screens = rc.screens;
  opts.master_seed = e.master_seed;
  opts.workers = rc.workers;
  if (inv.inject_exponent != 0.0)
    opts.spectral_exponent = inv.inject_exponent;
  if (!inv.dump_screen.empty()) {
    bw::ScreenOptions so;
    so.spectral_exponent = opts.spectral_exponent;
    const auto seed = bw::derive_seed(opts.master_seed, bw::Stream::validation, {0});
    bw::write_screen(inv.dump_screen,
                     bw::generate_turbulence_screen(e.grid, e.turb, rc.dz, e.src.q0, seed, so));
  }
  const auto report = bw::validate_turbulence_screens(e.grid, e.turb, rc.dz, e.src.q0, opts);
  std::ostringstream os;
  if (rc.format.value_or(cli::OutputFormat::csv) == cli::OutputFormat::json)
    os << cli::validation_json(rc, report).dump(2) << "\n";
  else
    cli::write_validation_csv(os, rc, report);
  emit(rc, os.str());
  std::cerr << "beamwander: screen statistics " << (report.pass ? "PASS" : "FAIL") << "\n";
  return report.pass ? kOk : kNumericalError;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Laser beam wander in turbulence: analytics, Monte Carlo, sweeps"};
  app.require_subcommand(1);
  Invocation analytic, simulate, sweep, validate;

  auto *a = app.add_subcommand("analytic", "closed-form wander, beam radius and regime flags");
  add_config_options(*a, analytic);
  auto *s = app.add_subcommand("simulate", "one Monte Carlo wander experiment");
  add_config_options(*s, simulate);
  auto *w = app.add_subcommand("sweep", "experiment over a cn2 grid and coherence ratios");
  add_config_options(*w, sweep);
  auto *v = app.add_subcommand("validate-screens", "screen structure function vs quadrature");
  add_config_options(*v, validate);
  v->add_option("--inject-psd-exponent", validate.inject_exponent,
                "test hook: replace the 11/6 spectral exponent");
  v->add_option("--dump-screen", validate.dump_screen, "write the first screen (binary + .txt)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*a)
      return cmd_analytic(analytic);
    if (*s)
      return cmd_simulate(simulate);
    if (*w)
      return cmd_sweep(sweep);
    return cmd_validate_screens(validate);
  } catch (const bw::ConfigError &e) {
    std::cerr << "beamwander: " << e.what() << "\n";
    return kConfigError;
  } catch (const bw::Error &e) {
    std::cerr << "beamwander: " << e.what() << "\n";
    return kNumericalError;
  } catch (const std::exception &e) {
    std::cerr << "beamwander: internal error: " << e.what() << "\n";
    return kInternalError;
  }
}

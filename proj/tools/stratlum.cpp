// Command-line front end: dipole emission in layered structures, reflector
// thickness/wavelength sweeps, photophysics fits and synthetic photon streams.
// Every data-producing command writes a manifest.json that can be fed back via
// --config to repeat the run exactly.

#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "stratlum/config.hpp"
#include "stratlum/csvio.hpp"
#include "stratlum/design.hpp"
#include "stratlum/emission.hpp"
#include "stratlum/material_bundle.hpp"
#include "stratlum/photophysics.hpp"
#include "stratlum/svgplot.hpp"
#include "stratlum/version.hpp"

namespace fs = std::filesystem;
using namespace stratlum;

namespace {

struct Args {
  std::string config_path;
  std::string preset;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool seed_set = false;
  double quadrature_tol = 0.0;
  bool quadrature_tol_set = false;
  unsigned threads = 1;
  std::string material_name;
  double show_wavelength_nm = 0.0;
  bool show_wavelength_set = false;
};

std::string num(double v) { return csv::format_number(v); }

std::string now_iso8601() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw InputError("failed writing '" + path.string() + "'");
}

void write_manifest(const fs::path& dir, const RunConfig& cfg,
                    const std::vector<std::string>& outputs) {
  nlohmann::json m;
  m["tool"] = "stratlum";
  m["version"] = version_string;
  m["command"] = cfg.command;
  m["timestamp"] = now_iso8601();
  m["config"] = config_to_json(cfg);
  m["outputs"] = outputs;
  write_text(dir / "manifest.json", m.dump(2) + "\n");
}

RunConfig load_run_config(const Args& args, const MaterialSet& materials,
                          const std::string& subcommand) {
  if (!args.config_path.empty() && !args.preset.empty())
    throw InputError("give either --config or --preset, not both");
  RunConfig cfg;
  if (!args.config_path.empty()) {
    cfg = load_config_file(args.config_path, materials);
  } else if (!args.preset.empty()) {
    cfg = parse_config(nlohmann::json{{"preset", args.preset}}, materials);
  } else {
    throw InputError("'" + subcommand + "' needs --config FILE or --preset NAME");
  }
  if (cfg.command.empty())
    cfg.command = subcommand;
  else if (cfg.command != subcommand)
    throw InputError("config describes command '" + cfg.command +
                     "' but subcommand '" + subcommand + "' was invoked");
  if (args.quadrature_tol_set) {
    if (!(args.quadrature_tol > 0.0))
      throw InputError("--quadrature-tol must be positive");
    cfg.quadrature.rel_tol = args.quadrature_tol;
  }
  if (args.seed_set && cfg.synth) cfg.synth->seed = args.seed;
  return cfg;
}

fs::path prepare_out_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw InputError("cannot create output directory '" + dir + "'");
  return p;
}

struct PowerChannels {
  double total = 0.0;
  double up = 0.0;
  double collected = 0.0;
};

std::vector<std::string> cmd_solve(const RunConfig& cfg,
                                   const MaterialSet& materials,
                                   const fs::path& dir) {
  if (cfg.stack.is_null())
    throw InputError("solve needs a 'stack' (inline or via 'stack_file')");
  const LayerStack stack = stack_from_json(cfg.stack, materials);
  const StackEnvironment env(stack, cfg.dipole, cfg.loss_floor);
  const QuadratureSettings& qs = cfg.quadrature;

  auto channels = [&](Orientation o) {
    PowerChannels ch;
    ch.total = total_power(env, o, qs).value;
    ch.up = radiated_power(env, Direction::up, o, qs).value;
    ch.collected = collected_power(env, cfg.na, o, qs).value;
    return ch;
  };
  const PowerChannels vert = channels(Orientation::vertical);
  const PowerChannels hor = channels(Orientation::horizontal);
  const PowerChannels iso{(vert.total + 2.0 * hor.total) / 3.0,
                          (vert.up + 2.0 * hor.up) / 3.0,
                          (vert.collected + 2.0 * hor.collected) / 3.0};
  const PowerChannels& head = cfg.dipole.orientation == Orientation::vertical
                                  ? vert
                                  : cfg.dipole.orientation == Orientation::horizontal
                                        ? hor
                                        : iso;

  std::ostringstream txt;
  auto block = [&](const std::string& prefix, const PowerChannels& ch) {
    txt << prefix << "purcell_total " << num(ch.total) << "\n";
    txt << prefix << "power_up " << num(ch.up) << "\n";
    txt << prefix << "power_down_or_absorbed " << num(ch.total - ch.up) << "\n";
    txt << prefix << "power_collected " << num(ch.collected) << "\n";
    txt << prefix << "eta_na " << num(ch.collected / ch.total) << "\n";
  };
  txt << "wavelength_nm " << num(cfg.dipole.wavelength_nm) << "\n";
  txt << "na " << num(cfg.na) << "\n";
  txt << "loss_floor " << num(cfg.loss_floor) << "\n";
  txt << "orientation " << to_string(cfg.dipole.orientation) << "\n";
  block("", head);
  block("vertical_", vert);
  block("horizontal_", hor);
  write_text(dir / "emission.txt", txt.str());

  std::vector<double> thetas;
  const double step = cfg.farfield_theta_step_deg;
  for (double deg = 0.0; deg <= 90.0 + 1e-9; deg += step)
    thetas.push_back(std::min(deg, 90.0) * std::numbers::pi / 180.0);
  const auto samples = far_field(env, Direction::up, thetas);
  csv::Table table({"theta_deg", "dP_dOmega_vertical", "dP_dOmega_horizontal",
                    "dP_dOmega_avg"});
  for (const auto& s : samples)
    table.add_row({csv::format_number(s.theta_rad * 180.0 / std::numbers::pi, 6),
                   csv::format_number(s.vertical, 6),
                   csv::format_number(s.horizontal, 6),
                   csv::format_number(s.average, 6)});
  table.write((dir / "farfield.csv").string());

  return {"emission.txt", "farfield.csv"};
}

std::vector<std::string> cmd_sweep(const RunConfig& cfg,
                                   const MaterialSet& materials,
                                   const fs::path& dir, unsigned threads) {
  if (!cfg.sweep) throw InputError("sweep needs a 'sweep' section");
  const RunConfig::Sweep& sw = *cfg.sweep;
  const SweepMetric metric = metric_from_string(sw.metric);

  std::vector<SweepCurve> curves;
  for (const auto& entry : sw.stacks) {
    const LayerStack stack = stack_from_json(entry.stack, materials);
    if (sw.kind == "thickness") {
      const SweepSpec spec{.base_stack = stack,
                           .swept_layer = sw.layer_index,
                           .start_nm = sw.start_nm,
                           .stop_nm = sw.stop_nm,
                           .step_nm = sw.step_nm,
                           .metric = metric,
                           .na = cfg.na,
                           .dipole = cfg.dipole,
                           .loss_floor = cfg.loss_floor,
                           .quadrature = cfg.quadrature,
                           .label = entry.label};
      curves.push_back(thickness_sweep(spec, threads));
    } else {
      curves.push_back(wavelength_sweep(stack, cfg.dipole, sw.start_nm,
                                        sw.stop_nm, sw.step_nm, metric, cfg.na,
                                        cfg.loss_floor, cfg.quadrature,
                                        entry.label, threads));
    }
  }

  const SweepCurve* reference = nullptr;
  for (const auto& curve : curves)
    if (curve.label == sw.reference_label) reference = &curve;

  std::vector<PeakReport> reports;
  for (const auto& curve : curves) {
    PeakReport report = find_peaks(curve, sw.min_prominence);
    if (reference) report.enhancement_vs_reference = enhancement(curve, *reference);
    reports.push_back(std::move(report));
  }

  csv::Table table({"label", curves[0].abscissa_name, curves[0].metric_name});
  for (const auto& curve : curves)
    for (std::size_t i = 0; i < curve.abscissa.size(); ++i)
      table.add_row({curve.label, num(curve.abscissa[i]), num(curve.values[i])});
  table.write((dir / "sweep.csv").string());

  std::ostringstream txt;
  txt << "metric " << sw.metric << "\n";
  txt << "abscissa " << curves[0].abscissa_name << "\n";
  txt << "na " << num(cfg.na) << "\n";
  if (reference) txt << "reference_label " << sw.reference_label << "\n";
  for (std::size_t c = 0; c < curves.size(); ++c) {
    txt << "\n";
    txt << "curve " << curves[c].label << "\n";
    txt << "peak_count " << reports[c].peaks.size() << "\n";
    for (const Peak& p : reports[c].peaks)
      txt << "peak " << p.order << " position_nm " << num(p.position_nm)
          << " value " << num(p.value) << "\n";
    if (reference)
      txt << "enhancement_vs_reference "
          << num(reports[c].enhancement_vs_reference) << "\n";
  }
  write_text(dir / "peaks.txt", txt.str());

  svg::PlotOptions opt;
  opt.title = sw.metric + " vs " + curves[0].abscissa_name;
  opt.x_label = curves[0].abscissa_name;
  opt.y_label = curves[0].metric_name;
  svg::write_plot((dir / "sweep.svg").string(), curves, reports, opt);

  return {"sweep.csv", "peaks.txt", "sweep.svg"};
}

std::vector<std::string> cmd_fit(const RunConfig& cfg, const fs::path& dir) {
  if (!cfg.fit) throw InputError("fit needs a 'fit' section");
  const RunConfig::Fit& f = *cfg.fit;

  std::ostringstream txt;
  txt << "kind " << f.kind << "\n";
  txt << "data " << f.data_path << "\n";
  if (f.kind == "saturation") {
    const auto points = csv::read_xy(f.data_path, "power_mw", "counts_per_s");
    const SaturationFit fit = fit_saturation(points);
    txt << "points " << points.size() << "\n";
    txt << "rate_sat_cps " << num(fit.params.rate_sat_cps) << "\n";
    txt << "rate_sat_cps_sigma " << num(fit.sigma.rate_sat_cps) << "\n";
    txt << "p_sat_mw " << num(fit.params.p_sat_mw) << "\n";
    txt << "p_sat_mw_sigma " << num(fit.sigma.p_sat_mw) << "\n";
    txt << "background_slope_cps_per_mw "
        << num(fit.params.background_slope_cps_per_mw) << "\n";
    txt << "background_slope_cps_per_mw_sigma "
        << num(fit.sigma.background_slope_cps_per_mw) << "\n";
    txt << "dark_counts_cps " << num(fit.params.dark_counts_cps) << "\n";
    txt << "dark_counts_cps_sigma " << num(fit.sigma.dark_counts_cps) << "\n";
    txt << "residual_norm " << num(fit.residual_norm) << "\n";
    txt << "iterations " << fit.iterations << "\n";
  } else if (f.kind == "spectrum") {
    const auto points = csv::read_xy(f.data_path, "x_ghz", "counts");
    const SpectrumFit fit = fit_lorentzian(points, f.resolution_floor_ghz);
    txt << "points " << points.size() << "\n";
    txt << "center_ghz " << num(fit.center) << "\n";
    txt << "center_ghz_sigma " << num(fit.sigma_center) << "\n";
    txt << "fwhm_ghz " << num(fit.fwhm_ghz) << "\n";
    txt << "fwhm_ghz_sigma " << num(fit.sigma_fwhm_ghz) << "\n";
    txt << "amplitude " << num(fit.amplitude) << "\n";
    txt << "amplitude_sigma " << num(fit.sigma_amplitude) << "\n";
    txt << "baseline " << num(fit.baseline) << "\n";
    txt << "baseline_sigma " << num(fit.sigma_baseline) << "\n";
    txt << "resolution_floor_ghz " << num(fit.resolution_floor_ghz) << "\n";
    txt << "resolution_limited " << (fit.resolution_limited ? 1 : 0) << "\n";
    txt << "no_peak " << (fit.no_peak ? 1 : 0) << "\n";
    txt << "residual_norm " << num(fit.residual_norm) << "\n";
  } else {
    const auto points = csv::read_xy(f.data_path, "tau_ns", "coincidences");
    const G2Fit fit = fit_g2(points, f.rho);
    txt << "points " << points.size() << "\n";
    txt << "rho " << num(fit.rho) << "\n";
    txt << "g2_zero_raw " << num(fit.g2_zero_raw) << "\n";
    txt << "g2_zero_raw_sigma " << num(fit.sigma_g2_zero_raw) << "\n";
    txt << "g2_zero " << num(fit.g2_zero) << "\n";
    txt << "g2_zero_sigma " << num(fit.sigma_g2_zero) << "\n";
    txt << "tau1_ns " << num(fit.tau1_ns) << "\n";
    txt << "tau1_ns_sigma " << num(fit.sigma_tau1_ns) << "\n";
    txt << "plateau " << num(fit.plateau) << "\n";
    txt << "corrected_clipped " << (fit.corrected_clipped ? 1 : 0) << "\n";
    txt << "classification " << to_string(fit.classification) << "\n";
    txt << "residual_norm " << num(fit.residual_norm) << "\n";
  }
  write_text(dir / "fit.txt", txt.str());
  return {"fit.txt"};
}

std::vector<std::string> cmd_synth(const RunConfig& cfg, const fs::path& dir) {
  if (!cfg.synth) throw InputError("synth needs a 'synth' section");
  const G2Histogram hist = simulate_hbt(*cfg.synth);
  csv::Table table({"tau_ns", "coincidences"});
  for (std::size_t i = 0; i < hist.tau_ns.size(); ++i)
    table.add_row({num(hist.tau_ns[i]), std::to_string(hist.counts[i])});
  table.write((dir / "g2_histogram.csv").string());
  return {"g2_histogram.csv"};
}

int cmd_materials_list(const MaterialSet& materials) {
  for (const std::string& name : materials.names()) {
    const OpticalMaterial& m = materials.get(name);
    std::printf("%-10s %-13s %g-%g nm\n", name.c_str(), to_string(m.kind()),
                m.min_wavelength_nm(), m.max_wavelength_nm());
  }
  return 0;
}

int cmd_materials_show(const MaterialSet& materials, const Args& args) {
  const OpticalMaterial& m = materials.get(args.material_name);
  std::printf("name %s\n", m.name().c_str());
  std::printf("kind %s\n", to_string(m.kind()));
  std::printf("wavelength_range_nm %g %g\n", m.min_wavelength_nm(),
              m.max_wavelength_nm());
  if (args.show_wavelength_set) {
    const std::complex<double> nk = m.refractive_index(args.show_wavelength_nm);
    const std::complex<double> eps = nk * nk;
    std::printf("wavelength_nm %g\n", args.show_wavelength_nm);
    std::printf("n %s\n", num(nk.real()).c_str());
    std::printf("k %s\n", num(nk.imag()).c_str());
    std::printf("eps_re %s\n", num(eps.real()).c_str());
    std::printf("eps_im %s\n", num(eps.imag()).c_str());
  }
  return 0;
}

int dispatch(const Args& args, const std::string& subcommand) {
  const MaterialSet materials = bundled_materials();
  if (subcommand == "materials.list") return cmd_materials_list(materials);
  if (subcommand == "materials.show") return cmd_materials_show(materials, args);

  const RunConfig cfg = load_run_config(args, materials, subcommand);
  const fs::path dir = prepare_out_dir(args.out_dir);
  std::vector<std::string> outputs;
  if (subcommand == "solve")
    outputs = cmd_solve(cfg, materials, dir);
  else if (subcommand == "sweep")
    outputs = cmd_sweep(cfg, materials, dir, args.threads);
  else if (subcommand == "fit")
    outputs = cmd_fit(cfg, dir);
  else
    outputs = cmd_synth(cfg, dir);
  write_manifest(dir, cfg, outputs);
  for (const auto& name : outputs)
    std::printf("wrote %s\n", (dir / name).string().c_str());
  std::printf("wrote %s\n", (dir / "manifest.json").string().c_str());
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  Args args;
  CLI::App app{"dipole emission in stratified media: solver, reflector design "
               "sweeps, photophysics fits and synthetic photon streams"};
  app.set_version_flag("--version", std::string(version_string));
  app.require_subcommand(1);

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", args.config_path,
                    "JSON config file (a manifest.json also works)");
    cmd->add_option("--preset", args.preset,
                    "built-in configuration (paper_fig1c, paper_65nm, "
                    "paper_265nm, paper_nometal)");
    cmd->add_option("--out", args.out_dir, "output directory")
        ->capture_default_str();
    cmd->add_option("--quadrature-tol", args.quadrature_tol,
                    "relative tolerance for power integrals")
        ->each([&](const std::string&) { args.quadrature_tol_set = true; });
    cmd->add_option("--seed", args.seed, "random seed override (synth)")
        ->each([&](const std::string&) { args.seed_set = true; });
    cmd->add_option("--threads", args.threads, "worker threads for sweeps");
  };

  add_common(app.add_subcommand(
      "solve", "emitted power, collection efficiency and far field"));
  add_common(app.add_subcommand(
      "sweep", "vary a layer thickness or the wavelength; report peaks"));
  add_common(app.add_subcommand(
      "fit", "fit saturation, spectrum or g2 data from CSV"));
  add_common(app.add_subcommand(
      "synth", "simulate a photon stream and histogram coincidences"));

  CLI::App* materials = app.add_subcommand("materials", "bundled optical data");
  materials->require_subcommand(1);
  materials->add_subcommand("list", "list bundled materials");
  CLI::App* show = materials->add_subcommand("show", "details for one material");
  show->add_option("name", args.material_name, "material name")->required();
  show->add_option("--wavelength", args.show_wavelength_nm,
                   "evaluate n, k at this vacuum wavelength (nm)")
      ->each([&](const std::string&) { args.show_wavelength_set = true; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  std::string subcommand = app.get_subcommands().front()->get_name();
  if (subcommand == "materials")
    subcommand += "." + materials->get_subcommands().front()->get_name();

  try {
    return dispatch(args, subcommand);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const FitError& e) {
    std::cerr << "fit error: " << e.what() << "\n";
    if (!e.trace().empty()) std::cerr << e.trace() << "\n";
    return 4;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}

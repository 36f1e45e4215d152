// Command-line front end: configuration in, JSON/CSV out.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nanotrap/atom_cs.hpp"
#include "nanotrap/config.hpp"
#include "nanotrap/constants.hpp"
#include "nanotrap/dynamics.hpp"
#include "nanotrap/error.hpp"
#include "nanotrap/io.hpp"
#include "nanotrap/light_matter.hpp"
#include "nanotrap/spectra.hpp"

#ifndef NANOTRAP_CONFIG_DIR
#define NANOTRAP_CONFIG_DIR "configs"
#endif

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace nanotrap;

namespace {

constexpr int exit_config = 2;
constexpr int exit_numeric = 3;

struct Common {
  std::string config_path = std::string(NANOTRAP_CONFIG_DIR) + "/experiment.cfg";
  std::string out_dir = ".";
  std::optional<std::int64_t> seed;
  std::vector<std::string> overrides;
};

struct Context {
  RunConfig cfg;
  AtomicData data;
  fs::path out;

  std::uint64_t seed() const { return static_cast<std::uint64_t>(cfg.integer("run.seed")); }
  double radius() const { return cfg.number("fiber.radius"); }
  FiberSpec fiber() const { return {radius(), data.silica, 1.0}; }
};

Context make_context(const Common& common) {
  Context ctx{RunConfig::load(common.config_path), {}, common.out_dir};
  for (const std::string& o : common.overrides) ctx.cfg.set(o);
  if (common.seed) ctx.cfg.set("run.seed", std::to_string(*common.seed));
  ctx.cfg.check_required();
  const std::string data_file = ctx.cfg.has("atom.data_file") ? ctx.cfg.text("atom.data_file") : "";
  ctx.data = load_atomic_data(data_file.empty() ? default_atomic_data_path() : fs::path(data_file));
  return ctx;
}

json config_json(const RunConfig& cfg) {
  json out = json::object();
  for (const ConfigKey& k : config_schema())
    if (cfg.has(k.name)) out[k.name] = cfg.text(k.name);
  return out;
}

void emit_json(const Context& ctx, const std::string& name, json body) {
  body["config"] = config_json(ctx.cfg);
  const std::string text = body.dump(2) + "\n";
  write_file_atomic(ctx.out / name, text);
  std::cout << (ctx.out / name).string() << '\n';
}

void emit_csv(const Context& ctx, const std::string& name, const std::string& body) {
  write_file_atomic(ctx.out / name, ctx.cfg.echo("# ") + body);
  std::cout << (ctx.out / name).string() << '\n';
}

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

json site_json(const Cylindrical& p, double radius) {
  return {{"r_m", p.r}, {"phi_rad", p.phi}, {"z_m", p.z}, {"height_above_surface_m", p.r - radius}};
}

TrapParameters trap_parameters(const Context& ctx) {
  TrapParameters p;
  p.radius = ctx.radius();
  p.blue_wavelength = ctx.cfg.number("blue.wavelength");
  p.blue_power = ctx.cfg.number("blue.power");
  p.phi_b = ctx.cfg.number("blue.phi_b");
  p.red_wavelength = ctx.cfg.number("red.wavelength");
  p.red_power = ctx.cfg.number("red.power");
  p.red_imbalance = ctx.cfg.number("red.imbalance");
  p.red_phase = ctx.cfg.number("red.phase");
  p.surface_potential = ctx.cfg.flag("surface.enabled");
  return p;
}

TrapConfig make_trap(const Context& ctx, const TrapParameters& p) {
  TrapConfig config = build_trap(ctx.data, p);
  if (ctx.cfg.has("surface.c3") && p.surface_potential)
    config.c3 = ctx.cfg.number("surface.c3") * constants::h * 1e-18;
  return config;
}

LightField named_beam(const Context& ctx, const std::string& name) {
  const FiberSpec fiber = ctx.fiber();
  if (name == "probe")
    return LightField::running(solve_he11(fiber, ctx.cfg.number("probe.wavelength")), ctx.cfg.number("probe.power"), 0.0);
  if (name == "tuneout")
    return LightField::running(solve_he11(fiber, ctx.cfg.number("tuneout.wavelength")),
                               ctx.cfg.number("tuneout.power"), ctx.cfg.number("tuneout.polarization"));
  if (name == "blue")
    return LightField::running(solve_he11(fiber, ctx.cfg.number("blue.wavelength")), ctx.cfg.number("blue.power"),
                               0.5 * constants::pi + ctx.cfg.number("blue.phi_b"));
  if (name == "red") {
    const double p = ctx.cfg.number("red.power");
    return LightField::standing(solve_he11(fiber, ctx.cfg.number("red.wavelength")), p,
                                p * ctx.cfg.number("red.imbalance"), 0.0, ctx.cfg.number("red.phase"));
  }
  throw Error(Errc::config, "unknown beam '" + name + "' (probe, tuneout, blue, red)");
}

// ---------------------------------------------------------------------------

void run_mode(const Context& ctx) {
  const FiberSpec fiber = ctx.fiber();
  json modes = json::object();
  for (const char* beam : {"blue", "red", "probe", "tuneout"}) {
    const double wavelength = ctx.cfg.number(std::string(beam) + ".wavelength");
    const GuidedMode m = solve_he11(fiber, wavelength);
    modes[beam] = {{"wavelength_m", wavelength},
                   {"core_index", m.core_index},
                   {"v_number", v_number(fiber, wavelength)},
                   {"beta_per_m", m.beta},
                   {"effective_index", m.effective_index()},
                   {"interior_parameter_per_m", m.interior_parameter},
                   {"exterior_parameter_per_m", m.exterior_parameter},
                   {"normalization_V_per_m_sqrtW", m.normalization},
                   {"multimode", m.multimode}};
    std::cout << beam << ": beta = " << m.beta << " 1/m, V = " << v_number(fiber, wavelength) << '\n';
  }
  emit_json(ctx, "mode.json", {{"radius_m", fiber.radius}, {"modes", modes}});
}

void run_fieldmap(const Context& ctx, const std::string& beam, const PolarGrid& grid_in) {
  PolarGrid grid = grid_in;
  if (grid.r_min <= 0.0) grid.r_min = ctx.radius();
  const LightField field = named_beam(ctx, beam);
  const std::vector<FieldSample> samples = field_map(field, grid);
  std::ostringstream fields, derived;
  write_field_csv(fields, samples);
  derived.precision(17);
  derived << "r_m,phi_rad,z_m,intensity_V2_per_m2,eps_x,eps_y,eps_z\n";
  for (const FieldSample& s : samples) {
    const Vec3 eps = s.field.squaredNorm() > 0.0 ? ellipticity(s.field) : Vec3::Zero();
    derived << s.position.r << ',' << s.position.phi << ',' << s.position.z << ',' << s.field.squaredNorm() << ','
            << eps.x() << ',' << eps.y() << ',' << eps.z() << '\n';
  }
  emit_csv(ctx, "fieldmap_" + beam + ".csv", fields.str());
  emit_csv(ctx, "fieldmap_" + beam + "_intensity.csv", derived.str());
}

void run_trap(const Context& ctx, bool with_tuneout) {
  TrapParameters p = trap_parameters(ctx);
  if (with_tuneout)
    p.manipulation = TrapParameters::Manipulation{ctx.cfg.number("tuneout.wavelength"), ctx.cfg.number("tuneout.power"),
                                                  ctx.cfg.number("tuneout.polarization"), Direction::forward};
  const TrapConfig config = make_trap(ctx, p);
  const Vec3 offset(0.0, ctx.cfg.number("magnetic.offset_clock"), 0.0);
  const MagneticEnvironment env = site_fields(ctx.data, config, offset);
  const Potential averaged = [&](const Cylindrical& q) { return averaged_potential(ctx.data, config, q, 4, offset); };
  const TrapFrequencies nu = trap_frequencies(averaged, env.upper_site, ctx.data.mass);
  const ClockSplitting clock = clock_splitting(ctx.data, env);
  const double depth = averaged({env.upper_site.r + 2e-6, env.upper_site.phi, env.upper_site.z}) - averaged(env.upper_site);
  std::cout << "minimum " << (env.upper_site.r - ctx.radius()) * 1e9 << " nm above the surface; frequencies "
            << nu.radial / 1e3 << ", " << nu.azimuthal / 1e3 << ", " << nu.axial / 1e3 << " kHz\n";
  emit_json(ctx, "trap.json",
            {{"minimum_position", site_json(env.upper_site, ctx.radius())},
             {"lower_site_position", site_json(env.lower_site, ctx.radius())},
             {"trap_frequencies_Hz", {{"radial", nu.radial}, {"azimuthal", nu.azimuthal}, {"axial", nu.axial}}},
             {"radial_barrier_Hz", depth},
             {"Bfict_upper_G", vec_json(env.fictitious_upper)},
             {"Bfict_lower_G", vec_json(env.fictitious_lower)},
             {"clock_splitting_Hz", clock.exact}});
}

void run_bfict(const Context& ctx, const std::string& scheme, std::optional<double> phi_b_deg,
               std::optional<double> imbalance) {
  TrapParameters p = trap_parameters(ctx);
  double offset_g = ctx.cfg.number("magnetic.offset_mw");
  if (scheme == "tuneout") {
    p.manipulation = TrapParameters::Manipulation{ctx.cfg.number("tuneout.wavelength"), ctx.cfg.number("tuneout.power"),
                                                  ctx.cfg.number("tuneout.polarization"), Direction::forward};
    offset_g = ctx.cfg.number("magnetic.offset_clock");
  } else if (scheme == "tilt") {
    if (phi_b_deg) p.phi_b = *phi_b_deg * constants::pi / 180.0;
  } else if (scheme == "imbalance") {
    if (imbalance) p.red_imbalance = *imbalance;
  } else {
    throw Error(Errc::config, "bfict: unknown scheme '" + scheme + "' (tuneout, tilt, imbalance)");
  }
  const TrapConfig config = make_trap(ctx, p);
  const Vec3 offset(0.0, offset_g, 0.0);
  const MagneticEnvironment env = site_fields(ctx.data, config, offset);
  const ClockSplitting clock = clock_splitting(ctx.data, env);
  const double mw = mw_splitting(ctx.data, env, HyperfineState::ground(3, -3), HyperfineState::ground(4, -3));
  const double separation = (env.upper_site.cartesian() - env.lower_site.cartesian()).norm();
  const double gradient = (env.fictitious_upper - env.fictitious_lower).norm() * 1e-4 / separation;
  std::cout << "Bfict upper " << env.fictitious_upper.transpose() << " G, lower " << env.fictitious_lower.transpose()
            << " G; clock splitting " << clock.exact << " Hz; MW (3,-3)->(4,-3) splitting " << mw << " Hz\n";
  emit_json(ctx, "bfict_" + scheme + ".json",
            {{"scheme", scheme},
             {"phi_b_rad", p.phi_b},
             {"red_imbalance", p.red_imbalance},
             {"offset_field_G", vec_json(offset)},
             {"upper_site", site_json(env.upper_site, ctx.radius())},
             {"lower_site", site_json(env.lower_site, ctx.radius())},
             {"Bfict_upper_G", vec_json(env.fictitious_upper)},
             {"Bfict_lower_G", vec_json(env.fictitious_lower)},
             {"Bfict_gradient_T_per_m", gradient},
             {"clock_splitting_Hz", clock.exact},
             {"clock_splitting_approx_Hz", clock.approximate},
             {"mw_splitting_3m3_4m3_Hz", mw}});
}

void run_pump(const Context& ctx) {
  const double a = ctx.radius();
  const LightField probe = named_beam(ctx, "probe");
  const double s = ctx.cfg.number("pumping.saturation");
  const Vec3 axis = Vec3::UnitY();
  json sites = json::object();
  std::ostringstream csv;
  csv.precision(17);
  csv << "site,time_s";
  for (int m = -4; m <= 4; ++m) csv << ",p_m" << (m < 0 ? "m" : "p") << std::abs(m);
  csv << '\n';
  json top;
  for (const auto& [name, phi] : {std::pair<std::string, double>{"upper", 0.0}, {"lower", constants::pi}}) {
    const CVec3 e = field_at(probe, {a + ctx.cfg.number("probe.height"), phi, 0.0});
    const PolarizationFractions f = PolarizationFractions::from_field(e, axis);
    const Eigen::MatrixXd rates = pump_rates(ctx.data, f, s);
    const PopulationVector ss = pump_steady_state(rates);
    const double t_e = pumping_time(rates, PopulationVector::uniform());
    std::vector<double> pops(ss.ground.data(), ss.ground.data() + ss.ground.size());
    json site = {{"polarization_fractions", {{"sigma_plus", f.plus}, {"pi", f.pi}, {"sigma_minus", f.minus}}},
                 {"steady_state", pops},
                 {"pumping_time_1_e", t_e}};
    if (name == "upper") top = site;
    sites[name] = site;
    PopulationVector p = PopulationVector::uniform();
    const double dt = 5.0 * t_e / 100.0;
    for (int i = 0; i <= 100; ++i) {
      if (i > 0) p = pump_evolution(rates, p, dt);
      const Eigen::VectorXd g = p.ground;
      csv << name << ',' << i * dt;
      for (int k = 0; k < g.size(); ++k) csv << ',' << g(k);
      csv << '\n';
    }
    std::cout << name << " site: stretched population " << (name == "upper" ? ss.at(4) : ss.at(-4))
              << ", 1/e pumping time " << t_e << " s\n";
  }
  top["sites"] = sites;
  emit_json(ctx, "pump.json", top);
  emit_csv(ctx, "pump_evolution.csv", csv.str());
}

SpectrumModel spectrum_truth(const Context& ctx) {
  return {ctx.cfg.number("spectrum.od_plus"), ctx.cfg.number("spectrum.od_minus"),
          ctx.cfg.number("spectrum.delta_plus"), ctx.cfg.number("spectrum.delta_minus"),
          ctx.cfg.number("spectrum.gamma")};
}

json fit_json(const ParameterFit& fit) {
  const FitResult& r = fit.result;
  json values = json::object(), sigmas = json::object();
  const Eigen::VectorXd sig = r.sigmas();
  for (std::size_t i = 0; i < fit.names.size(); ++i) {
    values[fit.names[i]] = r.parameters(static_cast<Eigen::Index>(i));
    sigmas[fit.names[i]] = sig(static_cast<Eigen::Index>(i));
  }
  const Eigen::MatrixXd c = r.correlation();
  json corr = json::array();
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < c.cols(); ++j) row.push_back(c(i, j));
    corr.push_back(row);
  }
  return {{"names", fit.names}, {"values", values},        {"sigmas", sigmas},    {"correlation", corr},
          {"chi2", r.chi2()},   {"ndof", r.ndof},          {"converged", r.converged}, {"iterations", r.iterations}};
}

void run_spectrum(const Context& ctx, const std::string& action, const std::string& data_path) {
  if (action == "simulate") {
    const std::vector<double> grid =
        linear_grid(ctx.cfg.number("spectrum.detuning_min"), ctx.cfg.number("spectrum.detuning_max"),
                    static_cast<int>(ctx.cfg.integer("spectrum.points")));
    const SpectrumData data =
        simulate_spectrum(spectrum_truth(ctx), grid, ctx.cfg.number("spectrum.reference_counts"), ctx.seed());
    std::ostringstream csv;
    write_spectrum_csv(csv, data);
    emit_csv(ctx, "spectrum.csv", csv.str());
    return;
  }
  std::istringstream in(read_file(data_path.empty() ? (ctx.out / "spectrum.csv") : fs::path(data_path)));
  const SpectrumData data = read_spectrum_csv(in);
  const ParameterFit fit = fit_transmission(data, spectrum_truth(ctx));
  const RatioEstimate ratio = od_ratio(fit);
  json body = fit_json(fit);
  body["splitting_Hz"] = fit.value("delta_plus_Hz") - fit.value("delta_minus_Hz");
  body["od_ratio"] = {{"value", ratio.value}, {"sigma", ratio.sigma}};
  std::cout << "splitting " << body["splitting_Hz"].get<double>() / 1e6 << " MHz, gamma "
            << fit.value("gamma_Hz") / 1e6 << " MHz\n";
  emit_json(ctx, "spectrum_fit.json", body);
}

void run_mw(const Context& ctx, const std::string& action, const std::string& data_path) {
  const double tau = ctx.cfg.number("pulse.mw_duration");
  const int components = static_cast<int>(ctx.cfg.integer("mw.components"));
  if (action == "simulate") {
    const double c = ctx.cfg.number("mw.center"), half = 0.5 * ctx.cfg.number("mw.splitting");
    const double amp = ctx.cfg.number("mw.amplitude");
    const std::vector<MwLine> lines =
        components == 2 ? std::vector<MwLine>{{c - half, amp}, {c + half, amp}} : std::vector<MwLine>{{c, amp}};
    const std::vector<double> grid = linear_grid(ctx.cfg.number("mw.detuning_min"), ctx.cfg.number("mw.detuning_max"),
                                                 static_cast<int>(ctx.cfg.integer("mw.points")));
    std::ostringstream csv;
    write_mw_csv(csv, simulate_mw_spectrum(lines, tau, grid, ctx.cfg.number("mw.noise"), ctx.seed()));
    emit_csv(ctx, "mw_spectrum.csv", csv.str());
    return;
  }
  std::istringstream in(read_file(data_path.empty() ? (ctx.out / "mw_spectrum.csv") : fs::path(data_path)));
  const std::vector<MwPoint> data = read_mw_csv(in);
  MwFitOptions options;
  options.components = components;
  options.noise = ctx.cfg.number("mw.noise");
  const MwFit fit = fit_mw_spectrum(data, tau, options);
  json body = fit_json(fit.fit);
  json lines = json::array();
  for (const MwLine& l : fit.lines) lines.push_back({{"center_Hz", l.center}, {"amplitude", l.amplitude}});
  body["lines"] = lines;
  body["fwhm_Hz"] = fit.fwhm;
  if (components == 2) {
    body["splitting_Hz"] = fit.splitting;
    body["splitting_sigma_Hz"] = fit.splitting_sigma;
    std::cout << "splitting " << fit.splitting / 1e3 << " +- " << fit.splitting_sigma / 1e3 << " kHz\n";
  }
  emit_json(ctx, "mw_fit.json", body);
}

void run_tuneout(const Context& ctx) {
  const double lo = ctx.cfg.number("tuneout.search_min"), hi = ctx.cfg.number("tuneout.search_max");
  const double w = tune_out(ctx.data, lo, hi);
  std::cout << "tune-out wavelength " << w * 1e9 << " nm\n";
  emit_json(ctx, "tuneout.json",
            {{"wavelength_m", w},
             {"search_interval_m", {lo, hi}},
             {"scalar_polarizability_au", scalar_polarizability(ctx.data, w) / constants::atomic_unit_polarizability},
             {"vector_polarizability_F4_au", vector_polarizability(ctx.data, w, 4) / constants::atomic_unit_polarizability},
             {"vector_polarizability_F3_au", vector_polarizability(ctx.data, w, 3) / constants::atomic_unit_polarizability}});
}

void add_common(CLI::App* sub, Common& common) {
  sub->add_option("--config", common.config_path, "Run configuration file");
  sub->add_option("--out", common.out_dir, "Output directory");
  sub->add_option("--seed", common.seed, "Random seed (overrides run.seed)");
  sub->add_option("--set", common.overrides, "Override a key: section.key=value unit")->take_all();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nanofiber evanescent-field trap toolkit for cesium"};
  app.require_subcommand(1);
  Common common;

  auto* mode = app.add_subcommand("mode", "Solve the HE11 mode for every configured wavelength");
  add_common(mode, common);

  auto* fieldmap = app.add_subcommand("fieldmap", "Field, intensity and ellipticity maps on a polar grid");
  add_common(fieldmap, common);
  std::string beam = "probe";
  PolarGrid grid{0.0, 1.25e-6, 101, 72, 0.0};
  double r_max_nm = 1250.0, z_nm = 0.0;
  fieldmap->add_option("--beam", beam, "probe, tuneout, blue or red");
  fieldmap->add_option("--r-max-nm", r_max_nm, "Outer grid radius (nm)");
  fieldmap->add_option("--r-points", grid.r_points, "Radial samples");
  fieldmap->add_option("--phi-points", grid.phi_points, "Azimuthal samples");
  fieldmap->add_option("--z-nm", z_nm, "Axial position (nm)");

  auto* trap = app.add_subcommand("trap", "Trap minimum, frequencies and per-site fictitious fields");
  add_common(trap, common);
  bool with_tuneout = false;
  trap->add_flag("--with-tuneout", with_tuneout, "Include the tune-out manipulation field");

  auto* bfict = app.add_subcommand("bfict", "Per-site fictitious fields and predicted splittings");
  add_common(bfict, common);
  std::string scheme = "tuneout";
  std::optional<double> phi_b, imbalance;
  bfict->add_option("--scheme", scheme, "tuneout, tilt or imbalance")->check(CLI::IsMember({"tuneout", "tilt", "imbalance"}));
  bfict->add_option("--phi-b", phi_b, "Blue polarization tilt (deg), tilt scheme");
  bfict->add_option("--imbalance", imbalance, "Backward/forward red power ratio, imbalance scheme");

  auto* pump = app.add_subcommand("pump", "Optical pumping steady state and evolution at both sites");
  add_common(pump, common);

  std::string data_path;
  auto* spectrum = app.add_subcommand("spectrum", "Probe transmission spectra");
  spectrum->require_subcommand(1);
  auto* spectrum_sim = spectrum->add_subcommand("simulate", "Simulate a shot-noise spectrum");
  auto* spectrum_fit = spectrum->add_subcommand("fit", "Fit a transmission spectrum");
  add_common(spectrum_sim, common);
  add_common(spectrum_fit, common);
  spectrum_fit->add_option("--data", data_path, "Spectrum CSV (default <out>/spectrum.csv)");

  auto* mw = app.add_subcommand("mw", "Microwave spectra");
  mw->require_subcommand(1);
  auto* mw_sim = mw->add_subcommand("simulate", "Simulate a Fourier-limited MW spectrum");
  auto* mw_fit = mw->add_subcommand("fit", "Fit a MW spectrum");
  add_common(mw_sim, common);
  add_common(mw_fit, common);
  mw_fit->add_option("--data", data_path, "MW CSV (default <out>/mw_spectrum.csv)");

  auto* tuneout = app.add_subcommand("tuneout", "Search the scalar tune-out wavelength");
  add_common(tuneout, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_config;
  }

  try {
    const Context ctx = make_context(common);
    if (mode->parsed()) run_mode(ctx);
    if (fieldmap->parsed()) {
      grid.r_max = r_max_nm * 1e-9;
      grid.z = z_nm * 1e-9;
      run_fieldmap(ctx, beam, grid);
    }
    if (trap->parsed()) run_trap(ctx, with_tuneout);
    if (bfict->parsed()) run_bfict(ctx, scheme, phi_b, imbalance);
    if (pump->parsed()) run_pump(ctx);
    if (spectrum_sim->parsed()) run_spectrum(ctx, "simulate", "");
    if (spectrum_fit->parsed()) run_spectrum(ctx, "fit", data_path);
    if (mw_sim->parsed()) run_mw(ctx, "simulate", "");
    if (mw_fit->parsed()) run_mw(ctx, "fit", data_path);
    if (tuneout->parsed()) run_tuneout(ctx);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == Errc::config ? exit_config : exit_numeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_numeric;
  }
  return 0;
}

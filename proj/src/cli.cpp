#include "chipdress/cli.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <optional>

#include <CLI11.hpp>

#include "chipdress/dynamics.hpp"
#include "chipdress/error.hpp"
#include "chipdress/io.hpp"
#include "chipdress/log.hpp"
#include "chipdress/noise.hpp"
#include "chipdress/parallel.hpp"
#include "chipdress/potentials.hpp"
#include "chipdress/trapchar.hpp"
#include "chipdress/units.hpp"

namespace chipdress::cli {

namespace fs = std::filesystem;
namespace u = chipdress::units;
using ojson = nlohmann::ordered_json;

namespace {

struct Options {
  std::string config;
  std::string out = "out";
  std::string format = "csv";
  unsigned workers = 0;
  std::optional<double> P_mW, Delta_kHz, TR_ms;
};

struct Context {
  ExperimentConfig cfg;
  fs::path out;
  std::string format;
  unsigned workers;
  std::optional<double> TR_ms;
  io::Manifest manifest;

  void emit(const std::string& name, const io::Table& t) {
    const fs::path p = out / (name + (format == "json" ? ".json" : ".csv"));
    if (format == "json")
      io::write_json(p, io::to_json(t));
    else
      io::write_text(p, io::to_csv(t));
    manifest.outputs.push_back(p.string());
  }

  void emit(const std::string& name, const ojson& j) {
    const fs::path p = out / (name + ".json");
    io::write_json(p, io::round_numbers(j));
    manifest.outputs.push_back(p.string());
  }
};

double kHz_of(double energy, const PhysicalConstants& c) { return energy / c.planck() / u::kHz; }

// ------------------------------------------------------------ subcommands

struct FieldMapArgs {
  double x_min = -40, x_max = 20, z_min = 2, z_max = 80, y = 0;  // um
  int nx = 61, nz = 40;
};

void field_map(Context& ctx, const FieldMapArgs& a) {
  if (a.nx < 1 || a.nz < 1) throw ConfigError("field-map: nx and nz must be >= 1");
  const PotentialModel model(ctx.cfg);
  const double dx = a.nx > 1 ? (a.x_max - a.x_min) / (a.nx - 1) : 0.0;
  const double dz = a.nz > 1 ? (a.z_max - a.z_min) / (a.nz - 1) : 0.0;
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(a.nx * a.nz));
  parallel_for(rows.size(), ctx.workers, [&](std::size_t k) {
    const int i = static_cast<int>(k) % a.nx, j = static_cast<int>(k) / a.nx;
    const Vec3 r(a.x_min + i * dx, a.y, a.z_min + j * dz);
    const FieldSample f = model.fields(r * u::um);
    const double Bn = f.B.norm();
    const double par = Bn > 0.0 ? std::abs(f.B_mw.dot(f.B.cast<Complex>()) / Bn) : 0.0;
    rows[k] = {r.x(), r.y(), r.z(), f.B.x() / u::gauss, f.B.y() / u::gauss, f.B.z() / u::gauss, par / u::gauss};
  });
  io::Table t{{"x_um", "y_um", "z_um", "Bx_G", "By_G", "Bz_G", "Bmw_par_G"}, {}};
  for (auto& r : rows) t.add(std::move(r));
  ctx.emit("field_map", t);
}

void dressed_spectrum_cmd(Context& ctx, std::optional<Vec3> point_um) {
  const PotentialModel model(ctx.cfg);
  const Vec3 r = point_um ? Vec3(*point_um * u::um) : ctx.cfg.trap.r_min;
  const auto& c = ctx.cfg.constants;
  const RwaHamiltonian H = model.hamiltonian(r);
  const DressedSpectrum s = dressed_spectrum(H);
  ojson states = ojson::array();
  for (int k = 0; k < basis::size; ++k) {
    const int bare = s.label[static_cast<std::size_t>(k)];
    const double purity = std::norm(s.vectors(bare, k));
    states.push_back({{"label", to_string(basis::states[static_cast<std::size_t>(bare)])},
                      {"energy_kHz", kHz_of(s.energies(k), c)},
                      {"admixture", std::sqrt(std::max(0.0, 1.0 - purity))}});
  }
  const Complex a = admixture(s);
  ctx.emit("dressed_spectrum", ojson{{"point_um", {r.x() / u::um, r.y() / u::um, r.z() / u::um}},
                                     {"Omega_R_kHz", std::abs(H.rabi_at(-1, -1)) / u::two_pi / u::kHz},
                                     {"Delta_kHz", H.detuning_at(-1, -1) / u::two_pi / u::kHz},
                                     {"admixture_2m1", {{"re", a.real()}, {"im", a.imag()}, {"abs", std::abs(a)}}},
                                     {"ambiguous", s.ambiguous},
                                     {"states", states}});
}

struct SliceArgs {
  double x_min = -32, x_max = 8;  // um
  int n = 200;
};

// Four curves along x through r_min: V0, V1 in exact and perturbative form.
io::Table slice_table(const ExperimentConfig& cfg, const SliceArgs& a) {
  if (a.n < 2) throw ConfigError("potential-slice: need >= 2 points");
  const PotentialModel model(cfg);
  const auto& c = cfg.constants;
  const Vec3& rm = model.config().trap.r_min;
  const PotentialBreakdown at_min = model.breakdown(rm);
  const double ref = at_min.V_Z + at_min.common;
  const double step = (a.x_max - a.x_min) / (a.n - 1) * u::um;
  std::vector<PotentialBreakdown> b(static_cast<std::size_t>(a.n));
  // Carry labels along the line from one point to the next.
  {
    DressedSpectrum prev, cur;
    bool have = false;
    for (int i = 0; i < a.n; ++i) {
      const Vec3 r(a.x_min * u::um + i * step, rm.y(), rm.z());
      b[static_cast<std::size_t>(i)] = model.breakdown(r, have ? &prev : nullptr, &cur);
      prev = cur;
      have = true;
    }
  }
  io::Table t{{"x_um", "V0_kHz", "V1_kHz", "V0_pert_kHz", "V1_pert_kHz", "Vmw_exact_kHz", "Vmw_pert_kHz",
               "Omega_over_Delta"},
              {}};
  for (int i = 0; i < a.n; ++i) {
    const auto& p = b[static_cast<std::size_t>(i)];
    const double base = p.V_Z + p.common - ref;
    t.add({a.x_min + i * (a.x_max - a.x_min) / (a.n - 1), kHz_of(p.V0 - ref, c), kHz_of(p.V1 - ref, c),
           kHz_of(base + p.Vmw_pert, c), kHz_of(base + p.V1mw_pert, c), kHz_of(p.Vmw_exact, c),
           kHz_of(p.Vmw_pert, c), p.ratio});
  }
  return t;
}

struct ScanArgs {
  double P_max_mW = 200;
  int points = 30;
  std::vector<double> detunings_kHz{150, 300, 600};
};

io::Table split_table(const ExperimentConfig& cfg, const ScanArgs& a, unsigned workers) {
  if (a.points < 1 || !(a.P_max_mW > 0.0)) throw ConfigError("split-scan: need points >= 1 and P_max > 0");
  std::vector<double> powers, detunings;
  for (int i = 1; i <= a.points; ++i) powers.push_back(a.P_max_mW * u::mW * i / a.points);
  for (double d : a.detunings_kHz) detunings.push_back(u::angular_from_kHz(d));
  const auto scan = split_scan(cfg, powers, detunings, workers);
  io::Table t{{"Delta_kHz", "P_mW", "P_over_Delta_mW_per_kHz", "s_um"}, {}};
  for (const auto& p : scan) {
    const double D = u::kHz_from_angular(p.Delta);
    t.add({D, p.P / u::mW, p.P / u::mW / D, p.s / u::um});
  }
  return t;
}

void calibrate_cmd(Context& ctx) {
  const Calibration cal = calibrate(ctx.cfg);
  const ExperimentConfig resolved = apply_calibration(ctx.cfg, cal);
  const double I = resolved.microwave.I_ref;
  const double w1 = rabi_at_minimum(resolved, I), w2 = rabi_at_minimum(resolved, 2.0 * I);
  ctx.emit("calibration", ojson{{"feasible", cal.feasible},
                                {"gap_solved", cal.gap_solved},
                                {"ground_gap_um", cal.ground_gap / u::um},
                                {"P_ref_mW", cal.P_ref / u::mW},
                                {"I_ref_mA", cal.I_ref / u::mA},
                                {"I_effective_mA", cal.I_effective / u::mA},
                                {"Omega_ref_kHz", cal.Omega_ref / u::two_pi / u::kHz},
                                {"Omega_ideal_kHz", cal.Omega_ideal / u::two_pi / u::kHz},
                                {"Omega_configured_kHz", w1 / u::two_pi / u::kHz},
                                {"residual", cal.residual},
                                {"linearity_error", std::abs(w2 / (2.0 * w1) - 1.0)}});
}

void oscillation_cmd(Context& ctx, double T_ms, bool classical, const std::string& name) {
  const ExperimentConfig& cfg = ctx.cfg;
  io::Table t{{"t_ms", "x0_um", "x1_um"}, {}};
  if (classical) {
    const auto tr = com_trajectory(cfg, T_ms * u::ms);
    const std::size_t every = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(10e-6 / cfg.dynamics.dt)));
    for (std::size_t i = 0; i < tr.t.size(); i += every)
      t.add({tr.t[i] / u::ms, tr.x0[i] / u::um, tr.x1[i] / u::um});
  } else {
    SequenceSchedule s;
    s.events.push_back(PulseEvent{0.5 * std::numbers::pi, 0.0, 0.0});
    if (cfg.microwave_on()) s.events.push_back(MicrowaveEvent{true, cfg.dynamics.switch_time});
    s.events.push_back(HoldEvent{T_ms * u::ms, 0.0, 0.0});
    const auto res = run_sequence(cfg, s);
    for (const auto& p : res.trace) t.add({p.t / u::ms, p.x0 / u::um, p.x1 / u::um});
  }
  ctx.emit(name, t);
}

void ramsey_cmd(Context& ctx, const std::string& name) {
  io::Table t{{"TR_ms", "N0", "N1", "overlap", "contrast_measure"}, {}};
  if (ctx.TR_ms) {
    const RamseyResult r = ramsey_run(ctx.cfg, *ctx.TR_ms * u::ms);
    t.add({r.T_R / u::ms, r.N0, r.N1, r.overlap, r.contrast});
  } else {
    const auto res = ramsey_scan(ctx.cfg);
    for (const auto& r : res.measurements) t.add({r.T_R / u::ms, r.N0, r.N1, r.overlap, r.contrast});
  }
  ctx.emit(name, t);
}

void noise_cmd(Context& ctx) {
  const double pi = std::numbers::pi;
  const NoiseBudget b = budget(ctx.cfg, ctx.TR_ms ? *ctx.TR_ms * u::ms : 0.0, ctx.workers);
  ctx.emit("noise_budget", ojson{{"TR_ms", b.T_R / u::ms},
                                 {"dphi_dB_rad_per_G", b.dphi_dB * u::gauss},
                                 {"dphi_dP_rad_per_mW", b.dphi_dP * u::mW},
                                 {"dphi_dN_rad_per_atom", b.dphi_dN},
                                 {"dB_mG", b.dB / u::mG},
                                 {"dP_uW", b.dP / u::uW},
                                 {"N", b.N},
                                 {"dN", b.dN},
                                 {"phi_B_pi", b.phi_B / pi},
                                 {"phi_P_pi", b.phi_P / pi},
                                 {"phi_S_pi", b.phi_S / pi},
                                 {"phi_N_pi", b.phi_N / pi},
                                 {"total_pi", b.total / pi},
                                 {"observed_pi", b.observed / pi},
                                 {"observed_fraction", b.fraction}});
}

void reproduce(Context& ctx, const std::string& figure, unsigned workers) {
  ExperimentConfig& cfg = ctx.cfg;
  cfg.microwave.enabled = true;
  cfg.microwave.power = 0.120;
  if (figure == "3b") {
    ctx.emit("fig3b", split_table(cfg, ScanArgs{}, workers));
  } else if (figure == "3c") {
    cfg.microwave.detuning = u::angular_from_kHz(150.0);
    ctx.emit("fig3c", slice_table(cfg, SliceArgs{}));
  } else if (figure == "4b") {
    cfg.microwave.detuning = u::angular_from_kHz(600.0);
    oscillation_cmd(ctx, 10.0, false, "fig4b");
  } else if (figure == "5a") {
    cfg.microwave.detuning = u::angular_from_kHz(600.0);
    ctx.TR_ms.reset();
    ramsey_cmd(ctx, "fig5a");
  } else {
    throw ConfigError("reproduce-figure: unknown figure '" + figure + "'");
  }
}

ExperimentConfig load(const Options& o) {
  ExperimentConfig cfg = o.config.empty() ? load_config(bundled_config_path()) : load_config(o.config);
  if (o.P_mW) cfg.microwave.power = *o.P_mW * u::mW;
  if (o.Delta_kHz) cfg.microwave.detuning = u::angular_from_kHz(*o.Delta_kHz);
  cfg.validate();
  return cfg;
}

}  // namespace

int dispatch(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return dispatch(static_cast<int>(argv.size()), argv.data());
}

int dispatch(int argc, const char* const* argv) {
  CLI::App app{"chipdress: microwave dressed-state potentials on an atom chip"};
  app.require_subcommand(1);
  app.fallthrough();

  Options o;
  app.add_option("--config", o.config, "configuration file (JSON); default: bundled configuration");
  app.add_option("--out", o.out, "output directory")->capture_default_str();
  app.add_option("--format", o.format, "table format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  app.add_option("--workers", o.workers, "worker threads (0: all cores)")->capture_default_str();
  app.add_option("--P-mw-mW", o.P_mW, "microwave power override (mW)");
  app.add_option("--Delta-kHz", o.Delta_kHz, "detuning at the trap minimum override (kHz)");
  app.add_option("--TR-ms", o.TR_ms, "Ramsey time (ms)");

  FieldMapArgs fm;
  auto* c_field = app.add_subcommand("field-map", "static and microwave fields on an x-z plane");
  c_field->add_option("--x-min-um", fm.x_min)->capture_default_str();
  c_field->add_option("--x-max-um", fm.x_max)->capture_default_str();
  c_field->add_option("--z-min-um", fm.z_min)->capture_default_str();
  c_field->add_option("--z-max-um", fm.z_max)->capture_default_str();
  c_field->add_option("--y-um", fm.y)->capture_default_str();
  c_field->add_option("--nx", fm.nx)->capture_default_str();
  c_field->add_option("--nz", fm.nz)->capture_default_str();

  std::vector<double> point;
  auto* c_spec = app.add_subcommand("dressed-spectrum", "dressed energies and labels at a point (JSON)");
  c_spec->add_option("--point-um", point, "x y z (default: trap minimum)")->expected(3);

  SliceArgs sl;
  auto* c_slice = app.add_subcommand("potential-slice", "potentials along x through the trap minimum");
  c_slice->add_option("--x-min-um", sl.x_min)->capture_default_str();
  c_slice->add_option("--x-max-um", sl.x_max)->capture_default_str();
  c_slice->add_option("-n,--points", sl.n)->capture_default_str();

  ScanArgs sc;
  auto* c_scan = app.add_subcommand("split-scan", "splitting distance versus power and detuning");
  c_scan->add_option("--P-max-mW", sc.P_max_mW)->capture_default_str();
  c_scan->add_option("--points", sc.points)->capture_default_str();
  c_scan->add_option("--detunings-kHz", sc.detunings_kHz)->capture_default_str();

  auto* c_cal = app.add_subcommand("calibrate", "solve the microwave calibration (JSON)");

  double T_ms = 10.0;
  bool classical = false;
  auto* c_osc = app.add_subcommand("oscillation", "centre-of-mass motion after the microwave switch-on");
  c_osc->add_option("--T-ms", T_ms)->capture_default_str();
  c_osc->add_flag("--classical", classical, "classical trajectories instead of the mean-field run");

  auto* c_ramsey = app.add_subcommand("ramsey", "Ramsey populations (single T_R with --TR-ms, else a scan)");
  auto* c_noise = app.add_subcommand("noise-budget", "phase-noise budget (JSON)");

  std::string figure;
  auto* c_fig = app.add_subcommand("reproduce-figure", "figure presets: 3b, 3c, 4b, 5a");
  c_fig->add_option("figure", figure)->required()->check(CLI::IsMember({"3b", "3c", "4b", "5a"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : usage;
  }

  const auto start = std::chrono::steady_clock::now();
  try {
    Context ctx{load(o), o.out, o.format, o.workers == 0 ? default_workers() : o.workers, o.TR_ms, {}};
    const CLI::App* sub = app.get_subcommands().front();
    ctx.manifest.subcommand = sub->get_name();
    if (sub == c_field) field_map(ctx, fm);
    else if (sub == c_spec) dressed_spectrum_cmd(ctx, point.empty() ? std::nullopt
                                                                    : std::optional<Vec3>(Vec3(point[0], point[1], point[2])));
    else if (sub == c_slice) ctx.emit("potential_slice", slice_table(ctx.cfg, sl));
    else if (sub == c_scan) {
      if (o.Delta_kHz) sc.detunings_kHz = {*o.Delta_kHz};
      ctx.emit("split_scan", split_table(ctx.cfg, sc, ctx.workers));
    } else if (sub == c_cal) calibrate_cmd(ctx);
    else if (sub == c_osc) oscillation_cmd(ctx, T_ms, classical, "oscillation");
    else if (sub == c_ramsey) ramsey_cmd(ctx, "ramsey");
    else if (sub == c_noise) noise_cmd(ctx);
    else if (sub == c_fig) {
      ctx.manifest.subcommand += " " + figure;
      reproduce(ctx, figure, ctx.workers);
    }
    ctx.manifest.config_hash = io::config_hash(ctx.cfg);
    ctx.manifest.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const fs::path mpath = ctx.out / "manifest.json";
    ctx.manifest.outputs.push_back(mpath.string());
    io::write_json(mpath, io::to_json(ctx.manifest));
    for (const auto& p : ctx.manifest.outputs) std::cout << p << '\n';
    return ok;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return config_error;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return numerical_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return failure;
  }
}

}  // namespace chipdress::cli

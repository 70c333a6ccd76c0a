#include "chipdress/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "chipdress/error.hpp"
#include "chipdress/units.hpp"

namespace chipdress {

namespace u = units;
using nlohmann::json;

namespace {

constexpr double bohr = 5.29177210903e-11;

// Reads one JSON object section, remembering which keys were consumed so that
// misspelt keys are reported instead of silently ignored.
class Section {
 public:
  Section(const json& doc, std::string name) : name_(std::move(name)) {
    if (doc.contains(name_)) {
      if (!doc.at(name_).is_object()) throw ConfigError(name_ + ": expected an object");
      obj_ = &doc.at(name_);
    }
  }

  double number(const std::string& key, double fallback, double scale = 1.0) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_number()) throw ConfigError(where(key) + ": expected a number");
    return v->get<double>() * scale;
  }

  bool boolean(const std::string& key, bool fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_boolean()) throw ConfigError(where(key) + ": expected true/false");
    return v->get<bool>();
  }

  std::string text(const std::string& key, const std::string& fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_string()) throw ConfigError(where(key) + ": expected a string");
    return v->get<std::string>();
  }

  Vec3 vec3(const std::string& key, const Vec3& fallback, double scale = 1.0) {
    const json* v = find(key);
    if (!v) return fallback;
    return to_vec3(*v, where(key)) * scale;
  }

  std::optional<double> optional_number(const std::string& key, double scale = 1.0) {
    const json* v = find(key);
    if (!v || v->is_null()) return std::nullopt;
    if (!v->is_number()) throw ConfigError(where(key) + ": expected a number or null");
    return v->get<double>() * scale;
  }

  const json* raw(const std::string& key) { return find(key); }

  void check_unknown() const {
    if (!obj_) return;
    for (const auto& [key, value] : obj_->items())
      if (!seen_.count(key)) throw ConfigError(where(key) + ": unknown key");
  }

  std::string where(const std::string& key) const { return name_ + "." + key; }

  static Vec3 to_vec3(const json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 3)
      throw ConfigError(where + ": expected an array of 3 numbers");
    Vec3 out;
    for (int i = 0; i < 3; ++i) {
      if (!v[i].is_number()) throw ConfigError(where + ": expected an array of 3 numbers");
      out[i] = v[i].get<double>();
    }
    return out;
  }

 private:
  const json* find(const std::string& key) {
    seen_.insert(key);
    if (!obj_ || !obj_->contains(key)) return nullptr;
    return &obj_->at(key);
  }

  std::string name_;
  const json* obj_ = nullptr;
  std::set<std::string> seen_;
};

json vec_json(const Vec3& v, double scale) {
  return json::array({v.x() / scale, v.y() / scale, v.z() / scale});
}

void require(bool ok, const std::string& field, const std::string& bound) {
  if (!ok) throw ConfigError(field + " violates bound: " + bound);
}

}  // namespace

ExperimentConfig default_config() {
  ExperimentConfig cfg;
  cfg.microwave.detuning = u::angular_from_kHz(600.0);
  cfg.microwave.Omega_ref = u::angular_from_kHz(122.0);
  cfg.cpw.a1 = 0.45;
  cfg.cpw.a2 = 0.55;
  return cfg;
}

std::filesystem::path bundled_config_path() { return CHIPDRESS_DEFAULT_CONFIG; }

ExperimentConfig config_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config: top level must be an object");
  static const std::set<std::string> sections = {"constants", "static_trap", "cpw", "microwave",
                                                 "potential_terms", "dynamics", "ramsey", "noise",
                                                 "description"};
  for (const auto& [key, value] : doc.items())
    if (!sections.count(key)) throw ConfigError("config: unknown section '" + key + "'");

  ExperimentConfig cfg = default_config();

  {
    Section s(doc, "constants");
    auto& c = cfg.constants;
    c.mu_B = s.number("mu_B_J_per_T", c.mu_B);
    c.hbar = s.number("hbar_Js", c.hbar);
    c.mass = s.number("mass_kg", c.mass);
    c.g_J = s.number("g_J", c.g_J);
    c.g_I = s.number("g_I", c.g_I);
    c.omega_hfs = u::two_pi * s.number("f_hfs_GHz", c.omega_hfs / (u::two_pi * u::GHz), u::GHz);
    c.g_grav = s.number("g_grav_m_per_s2", c.g_grav);
    c.alpha0 = s.number("alpha0_Cm2_per_V", c.alpha0);
    c.C4 = s.number("C4_Jm4", c.C4);
    c.a00 = s.number("a00_nm", c.a00 / u::nm, u::nm);
    c.a11 = s.number("a11_nm", c.a11 / u::nm, u::nm);
    c.a01 = s.number("a01_nm", c.a01 / u::nm, u::nm);
    s.check_unknown();
  }
  {
    Section s(doc, "static_trap");
    auto& t = cfg.trap;
    const std::string mode = s.text("mode", "parametric");
    if (mode == "parametric")
      t.mode = TrapMode::parametric;
    else if (mode == "wires")
      t.mode = TrapMode::wires;
    else
      throw ConfigError("static_trap.mode: expected 'parametric' or 'wires'");
    t.B0 = s.number("B0_G", t.B0 / u::gauss, u::gauss);
    t.r_min = s.vec3("r_min_um", t.r_min / u::um, u::um);
    t.f_axial = s.number("f_axial_Hz", t.f_axial);
    t.f_radial = s.number("f_radial_Hz", t.f_radial);
    t.bias = s.vec3("bias_G", t.bias / u::gauss, u::gauss);
    if (const json* wires = s.raw("wires")) {
      if (!wires->is_array()) throw ConfigError("static_trap.wires: expected an array");
      t.wires.clear();
      for (std::size_t i = 0; i < wires->size(); ++i) {
        const json wrapped = {{"wire", (*wires)[i]}};
        Section w(wrapped, "wire");
        WireSegment seg;
        seg.start = w.vec3("start_um", seg.start / u::um, u::um);
        seg.end = w.vec3("end_um", seg.end / u::um, u::um);
        seg.width = w.number("width_um", seg.width / u::um, u::um);
        seg.height = w.number("height_um", seg.height / u::um, u::um);
        seg.current = w.number("current_mA", 0.0, u::mA);
        seg.normal = w.vec3("normal", seg.normal);
        w.check_unknown();
        t.wires.push_back(seg);
      }
    }
    s.check_unknown();
  }
  {
    Section s(doc, "cpw");
    auto& g = cfg.cpw;
    g.width = s.number("wire_width_um", g.width / u::um, u::um);
    g.height = s.number("wire_height_um", g.height / u::um, u::um);
    g.length = s.number("length_um", g.length / u::um, u::um);
    g.signal_x = s.number("signal_x_um", g.signal_x / u::um, u::um);
    g.ground_gap = s.number("ground_gap_um", g.ground_gap / u::um, u::um);
    if (const json* f = s.raw("ground_fraction")) {
      if (!f->is_array() || f->size() != 2 || !(*f)[0].is_number() || !(*f)[1].is_number())
        throw ConfigError("cpw.ground_fraction: expected [a1, a2]");
      g.a1 = (*f)[0].get<double>();
      g.a2 = (*f)[1].get<double>();
    }
    s.check_unknown();
  }
  {
    Section s(doc, "microwave");
    auto& m = cfg.microwave;
    m.enabled = s.boolean("enabled", m.enabled);
    m.power = s.number("P_mw_mW", m.power / u::mW, u::mW);
    m.detuning = u::angular_from_kHz(s.number("Delta_m_kHz", u::kHz_from_angular(m.detuning)));
    m.P_ref = s.number("P_ref_mW", m.P_ref / u::mW, u::mW);
    m.I_ref = s.number("I_ref_mA", m.I_ref / u::mA, u::mA);
    m.Omega_ref = u::angular_from_kHz(s.number("Omega_ref_kHz", u::kHz_from_angular(m.Omega_ref)));
    m.impedance = s.number("impedance_ohm", m.impedance);
    m.auto_calibrate = s.boolean("auto_calibrate", m.auto_calibrate);
    m.gap_min = s.number("gap_min_um", m.gap_min / u::um, u::um);
    m.gap_max = s.number("gap_max_um", m.gap_max / u::um, u::um);
    s.check_unknown();
  }
  {
    Section s(doc, "potential_terms");
    auto& p = cfg.terms;
    p.gravity = s.boolean("gravity", p.gravity);
    p.gravity_direction = s.vec3("gravity_direction", p.gravity_direction);
    p.electric = s.boolean("electric", p.electric);
    p.casimir_polder = s.boolean("casimir_polder", p.casimir_polder);
    p.cp_cutoff = s.number("cp_cutoff_um", p.cp_cutoff / u::um, u::um);
    const std::string z = s.text("zeeman", "linear");
    if (z == "linear")
      p.zeeman = ZeemanModel::linear;
    else if (z == "breit_rabi")
      p.zeeman = ZeemanModel::breit_rabi;
    else
      throw ConfigError("potential_terms.zeeman: expected 'linear' or 'breit_rabi'");
    s.check_unknown();
  }
  {
    Section s(doc, "dynamics");
    auto& d = cfg.dynamics;
    const double n = s.number("N_atoms", d.atom_number);
    if (n != std::floor(n)) throw ConfigError("dynamics.N_atoms: expected an integer");
    d.atom_number = static_cast<int>(n);
    d.x_min = s.number("x_min_um", d.x_min / u::um, u::um);
    d.x_max = s.number("x_max_um", d.x_max / u::um, u::um);
    d.dx = s.number("dx_um", d.dx / u::um, u::um);
    d.dt = s.number("dt_ms", d.dt / u::ms, u::ms);
    d.imag_dt = s.number("imag_dt_ms", d.imag_dt / u::ms, u::ms);
    d.profile_dx = s.number("profile_dx_um", d.profile_dx / u::um, u::um);
    d.switch_time = s.number("switch_time_ms", d.switch_time / u::ms, u::ms);
    const std::string p = s.text("profile", "valley");
    if (p == "valley")
      d.profile = ProfileMode::valley;
    else if (p == "line")
      d.profile = ProfileMode::line;
    else
      throw ConfigError("dynamics.profile: expected 'valley' or 'line'");
    s.check_unknown();
  }
  {
    Section s(doc, "ramsey");
    auto& r = cfg.ramsey;
    r.pi2_duration = s.number("pi2_duration_ms", r.pi2_duration / u::ms, u::ms);
    r.fringe_frequency = s.number("fringe_frequency_kHz", r.fringe_frequency / u::kHz, u::kHz);
    if (auto lo = s.optional_number("lo_detuning_kHz"))
      r.lo_detuning = u::angular_from_kHz(*lo);
    r.TR_max = s.number("TR_max_ms", r.TR_max / u::ms, u::ms);
    r.TR_step = s.number("TR_step_ms", r.TR_step / u::ms, u::ms);
    r.window = s.number("window_ms", r.window / u::ms, u::ms);
    s.check_unknown();
  }
  {
    Section s(doc, "noise");
    auto& n = cfg.noise;
    n.dB = s.number("dB_mG", n.dB / u::mG, u::mG);
    n.dP = s.number("dP_mW", n.dP / u::mW, u::mW);
    n.dN = s.number("dN", n.dN);
    n.dphi_dN = s.number("dphi_dN_rad", n.dphi_dN);
    n.TR = s.number("TR_ms", n.TR / u::ms, u::ms);
    if (auto obs = s.optional_number("observed_pi", std::numbers::pi)) n.observed = *obs;
    s.check_unknown();
  }

  cfg.validate();
  return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
  const auto& c = cfg.constants;
  const auto& t = cfg.trap;
  const auto& g = cfg.cpw;
  const auto& m = cfg.microwave;
  const auto& p = cfg.terms;
  const auto& d = cfg.dynamics;
  const auto& r = cfg.ramsey;
  const auto& n = cfg.noise;

  json wires = json::array();
  for (const auto& w : t.wires)
    wires.push_back({{"start_um", vec_json(w.start, u::um)},
                     {"end_um", vec_json(w.end, u::um)},
                     {"width_um", w.width / u::um},
                     {"height_um", w.height / u::um},
                     {"current_mA", w.current / u::mA},
                     {"normal", vec_json(w.normal, 1.0)}});

  json doc;
  doc["constants"] = {{"mu_B_J_per_T", c.mu_B},
                      {"hbar_Js", c.hbar},
                      {"mass_kg", c.mass},
                      {"g_J", c.g_J},
                      {"g_I", c.g_I},
                      {"f_hfs_GHz", c.omega_hfs / (u::two_pi * u::GHz)},
                      {"g_grav_m_per_s2", c.g_grav},
                      {"alpha0_Cm2_per_V", c.alpha0},
                      {"C4_Jm4", c.C4},
                      {"a00_nm", c.a00 / u::nm},
                      {"a11_nm", c.a11 / u::nm},
                      {"a01_nm", c.a01 / u::nm}};
  doc["static_trap"] = {{"mode", t.mode == TrapMode::parametric ? "parametric" : "wires"},
                        {"B0_G", t.B0 / u::gauss},
                        {"r_min_um", vec_json(t.r_min, u::um)},
                        {"f_axial_Hz", t.f_axial},
                        {"f_radial_Hz", t.f_radial},
                        {"bias_G", vec_json(t.bias, u::gauss)},
                        {"wires", wires}};
  doc["cpw"] = {{"wire_width_um", g.width / u::um},
                {"wire_height_um", g.height / u::um},
                {"length_um", g.length / u::um},
                {"signal_x_um", g.signal_x / u::um},
                {"ground_gap_um", g.ground_gap / u::um},
                {"ground_fraction", json::array({g.a1, g.a2})}};
  doc["microwave"] = {{"enabled", m.enabled},
                      {"P_mw_mW", m.power / u::mW},
                      {"Delta_m_kHz", u::kHz_from_angular(m.detuning)},
                      {"P_ref_mW", m.P_ref / u::mW},
                      {"I_ref_mA", m.I_ref / u::mA},
                      {"Omega_ref_kHz", u::kHz_from_angular(m.Omega_ref)},
                      {"impedance_ohm", m.impedance},
                      {"auto_calibrate", m.auto_calibrate},
                      {"gap_min_um", m.gap_min / u::um},
                      {"gap_max_um", m.gap_max / u::um}};
  doc["potential_terms"] = {{"gravity", p.gravity},
                            {"gravity_direction", vec_json(p.gravity_direction, 1.0)},
                            {"electric", p.electric},
                            {"casimir_polder", p.casimir_polder},
                            {"cp_cutoff_um", p.cp_cutoff / u::um},
                            {"zeeman", p.zeeman == ZeemanModel::linear ? "linear" : "breit_rabi"}};
  doc["dynamics"] = {{"N_atoms", d.atom_number},
                     {"x_min_um", d.x_min / u::um},
                     {"x_max_um", d.x_max / u::um},
                     {"dx_um", d.dx / u::um},
                     {"dt_ms", d.dt / u::ms},
                     {"imag_dt_ms", d.imag_dt / u::ms},
                     {"profile_dx_um", d.profile_dx / u::um},
                     {"switch_time_ms", d.switch_time / u::ms},
                     {"profile", d.profile == ProfileMode::valley ? "valley" : "line"}};
  doc["ramsey"] = {{"pi2_duration_ms", r.pi2_duration / u::ms},
                   {"fringe_frequency_kHz", r.fringe_frequency / u::kHz},
                   {"lo_detuning_kHz", r.lo_detuning ? json(u::kHz_from_angular(*r.lo_detuning))
                                                     : json(nullptr)},
                   {"TR_max_ms", r.TR_max / u::ms},
                   {"TR_step_ms", r.TR_step / u::ms},
                   {"window_ms", r.window / u::ms}};
  doc["noise"] = {{"dB_mG", n.dB / u::mG},
                  {"dP_mW", n.dP / u::mW},
                  {"dN", n.dN},
                  {"dphi_dN_rad", n.dphi_dN},
                  {"TR_ms", n.TR / u::ms},
                  {"observed_pi", n.observed > 0.0 ? json(n.observed / std::numbers::pi)
                                                   : json(nullptr)}};
  return doc;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config parse failure in '" + path.string() + "': " + e.what());
  }
  return config_from_json(doc);
}

void ExperimentConfig::validate() const {
  constants.validate();

  require(trap.B0 > 0.0, "static_trap.B0_G", "> 0");
  require(trap.f_axial > 0.0, "static_trap.f_axial_Hz", "> 0");
  require(trap.f_radial > 0.0, "static_trap.f_radial_Hz", "> 0");
  require(trap.r_min.z() > 0.0, "static_trap.r_min_um", "z above the chip surface (> 0)");
  if (trap.mode == TrapMode::wires)
    for (const auto& w : trap.wires) w.validate();

  cpw.validate();

  require(std::isfinite(microwave.power) && microwave.power >= 0.0, "microwave.P_mw_mW", ">= 0");
  if (microwave.enabled && microwave.power > 0.0 && microwave.detuning == 0.0)
    throw ConfigError("microwave.Delta_m_kHz: resonant drive unsupported (Delta_m = 0 with P_mw > 0)");
  require(microwave.P_ref > 0.0, "microwave.P_ref_mW", "> 0");
  require(microwave.I_ref > 0.0, "microwave.I_ref_mA", "> 0");
  require(microwave.Omega_ref > 0.0, "microwave.Omega_ref_kHz", "> 0");
  require(microwave.impedance > 0.0, "microwave.impedance_ohm", "> 0");
  require(microwave.gap_min > 0.0 && microwave.gap_max > microwave.gap_min, "microwave.gap_min_um/gap_max_um",
          "0 < gap_min < gap_max");

  require(terms.gravity_direction.norm() > 0.0, "potential_terms.gravity_direction", "non-zero");
  require(terms.cp_cutoff > 0.0, "potential_terms.cp_cutoff_um", "> 0");

  require(dynamics.atom_number >= 1, "dynamics.N_atoms", ">= 1");
  require(dynamics.dx > 0.0, "dynamics.dx_um", "> 0");
  require(dynamics.x_max - dynamics.x_min >= 2.0 * dynamics.dx, "dynamics.x_min_um/x_max_um",
          "at least two grid points");
  require(dynamics.dt > 0.0, "dynamics.dt_ms", "> 0");
  require(dynamics.imag_dt > 0.0, "dynamics.imag_dt_ms", "> 0");
  require(dynamics.profile_dx > 0.0, "dynamics.profile_dx_um", "> 0");
  require(dynamics.switch_time >= 0.0, "dynamics.switch_time_ms", ">= 0");

  require(ramsey.pi2_duration > 0.0, "ramsey.pi2_duration_ms", "> 0");
  require(ramsey.fringe_frequency >= 0.0, "ramsey.fringe_frequency_kHz", ">= 0");
  require(ramsey.TR_max >= 0.0, "ramsey.TR_max_ms", ">= 0");
  require(ramsey.TR_step > 0.0, "ramsey.TR_step_ms", "> 0");
  require(ramsey.window > 0.0, "ramsey.window_ms", "> 0");

  require(noise.dB >= 0.0, "noise.dB_mG", ">= 0");
  require(noise.dP >= 0.0, "noise.dP_mW", ">= 0");
  require(noise.dN >= 0.0, "noise.dN", ">= 0");
  require(noise.TR >= 0.0, "noise.TR_ms", ">= 0");
  require(noise.observed >= 0.0, "noise.observed_pi", ">= 0");
}

double resolve_drive_frequency(const PhysicalConstants& c, double detuning, double B_at_minimum) {
  if (!(B_at_minimum >= 0.0)) throw ConfigError("resolve_drive_frequency: field magnitude must be >= 0");
  return detuning + c.omega_hfs - c.mu_B * B_at_minimum / c.hbar;
}

double local_detuning(const PhysicalConstants& c, double omega, double B) {
  return omega - c.omega_hfs + c.mu_B * B / c.hbar;
}

}  // namespace chipdress

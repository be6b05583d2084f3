#include "pmspec/config.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace pmspec {

using nlohmann::json;

namespace {

void flatten(const json& node, const std::string& prefix, std::map<std::string, json>& out) {
  if (node.is_object()) {
    for (const auto& [key, value] : node.items()) flatten(value, prefix.empty() ? key : prefix + "." + key, out);
    return;
  }
  out[prefix] = node;
}

// Reads typed keys from a flattened document and collects every problem.
class Reader {
 public:
  explicit Reader(std::map<std::string, json> keys) : keys_(std::move(keys)) {}

  bool has(const std::string& key) const { return keys_.count(key) > 0; }

  template <typename T>
  std::optional<T> get(const std::string& key) {
    known_.insert(key);
    const auto it = keys_.find(key);
    if (it == keys_.end()) return std::nullopt;
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!it->second.is_number()) throw std::invalid_argument("expected a number");
      } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
        if (!it->second.is_number_integer()) throw std::invalid_argument("expected an integer");
      }
      return it->second.get<T>();
    } catch (const std::exception& e) {
      fail(key + ": " + e.what());
      return std::nullopt;
    }
  }

  template <typename T>
  void read(const std::string& key, T& target) {
    if (auto v = get<T>(key)) target = *v;
  }

  void exclusive(const std::string& a, const std::string& b) {
    if (has(a) && has(b)) fail(a + " and " + b + " are mutually exclusive");
  }

  void fail(std::string message) { errors_.push_back(std::move(message)); }

  void check_unknown() {
    for (const auto& [key, value] : keys_) {
      if (!known_.count(key)) fail("unknown key '" + key + "'");
    }
  }

  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::map<std::string, json> keys_;
  std::set<std::string> known_;
  std::vector<std::string> errors_;
};

template <typename Enum>
std::optional<Enum> parse_enum(Reader& r, const std::string& key, const std::map<std::string, Enum>& names) {
  const auto text = r.get<std::string>(key);
  if (!text) return std::nullopt;
  const auto it = names.find(*text);
  if (it == names.end()) {
    std::string allowed;
    for (const auto& [name, value] : names) allowed += (allowed.empty() ? "" : ", ") + name;
    r.fail(key + ": '" + *text + "' is not one of {" + allowed + "}");
    return std::nullopt;
  }
  return it->second;
}

const std::map<std::string, GridMethod> kMethods{{"direct", GridMethod::kDirect}, {"factorized", GridMethod::kFactorized}};
const std::map<std::string, DemodMode> kModes{{"exponential", DemodMode::kExponential},
                                              {"projection", DemodMode::kProjection}};
const std::map<std::string, PhaseClock> kClocks{{"lab_time", PhaseClock::kLabTime},
                                                {"pair_index", PhaseClock::kPairIndex}};
const std::map<std::string, Route> kRoutes{{"analytic", Route::kAnalytic}, {"both", Route::kBoth},
                                           {"numeric", Route::kNumeric}};
const std::map<std::string, SweepAxis> kAxes{{"E0", SweepAxis::kE0}, {"sigma", SweepAxis::kSigma},
                                             {"v_ee", SweepAxis::kVee}};

template <typename Enum>
std::string enum_name(const std::map<std::string, Enum>& names, Enum value) {
  for (const auto& [name, v] : names) {
    if (v == value) return name;
  }
  return "?";
}

}  // namespace

std::string to_string(Route r) { return enum_name(kRoutes, r); }
std::string to_string(SweepAxis a) { return enum_name(kAxes, a); }

void RunConfig::validate() const {
  system.validate();
  pulses.validate();
  propagation.validate();
  demod.validate();
  if (grid.count < 2 || !(grid.step > 0) || !(grid.window_sigma > 0)) {
    throw std::invalid_argument("grid: need count >= 2, step > 0, window_sigma > 0");
  }
  if (sweep) {
    if (sweep->values.empty()) throw std::invalid_argument("sweep: values must be nonempty");
    if (sweep->axis != SweepAxis::kVee) {
      for (double v : sweep->values) {
        if (!(v > 0)) throw std::invalid_argument("sweep: widths and field strengths must be positive");
      }
    }
    if (!(sweep->area > 0)) throw std::invalid_argument("sweep: area must be positive");
  }
}

RunConfig default_config() {
  RunConfig cfg;
  cfg.pulses.envelope = normalize_to_area(0.1, cfg.pulses.envelope);
  cfg.pulses.omega_L = cfg.system.particle.omega_eg() + 0.025;
  return cfg;
}

RunConfig config_from_json(const json& doc) {
  if (!doc.is_null() && !doc.is_object()) throw ConfigError("config: top level must be an object");
  std::map<std::string, json> flat;
  if (doc.is_object()) flatten(doc, "", flat);
  Reader r(std::move(flat));
  RunConfig cfg = default_config();

  // particles and couplings
  auto& p = cfg.system.particle;
  r.exclusive("eps_e", "omega_eg");
  r.exclusive("eps_f", "omega_fe");
  r.read("eps_g", p.eps_g);
  const double omega_eg = r.get<double>("omega_eg").value_or(1.5);
  const double omega_fe = r.get<double>("omega_fe").value_or(0.05);
  p.eps_e = r.get<double>("eps_e").value_or(p.eps_g + omega_eg);
  p.eps_f = r.get<double>("eps_f").value_or(p.eps_e + omega_fe);
  r.read("mu_e", p.mu_e);
  r.read("mu_f", p.mu_f);
  const auto geom_r = r.get<double>("geometry.r");
  const auto geom_theta = r.get<double>("geometry.theta");
  if (geom_r || geom_theta) {
    if (r.has("v_ee") || r.has("v_ff")) r.fail("geometry.* and v_ee/v_ff are mutually exclusive");
    try {
      cfg.system = DimerSystem::from_geometry(p, Geometry{geom_r.value_or(1.0), geom_theta.value_or(0.0)});
    } catch (const std::exception& e) {
      r.fail(std::string("geometry: ") + e.what());
    }
  }
  r.read("v_ee", cfg.system.v_ee);
  r.read("v_ff", cfg.system.v_ff);

  // pulses
  auto& pulses = cfg.pulses;
  if (const auto shape = r.get<std::string>("envelope.shape")) {
    if (*shape == "rectangular") pulses.envelope.shape = Rectangular{};
    else if (*shape != "gaussian") r.fail("envelope.shape: '" + *shape + "' is not one of {gaussian, rectangular}");
  }
  if (const auto w = r.get<double>("envelope.sigma_or_delta")) pulses.envelope = pulses.envelope.with_width(*w);
  r.exclusive("envelope.E0", "envelope.area");
  const auto area = r.get<double>("envelope.area");
  if (const auto e0 = r.get<double>("envelope.E0")) {
    pulses.envelope.e0 = *e0;
  } else {
    try {
      pulses.envelope = normalize_to_area(area.value_or(0.1), pulses.envelope);
    } catch (const std::exception& e) {
      r.fail(std::string("envelope.area: ") + e.what());
    }
  }
  r.exclusive("omega_L", "delta_eg");
  pulses.omega_L = p.omega_eg() - r.get<double>("delta_eg").value_or(-0.025);
  r.read("omega_L", pulses.omega_L);
  r.read("t1", pulses.t1);
  r.read("t21", pulses.t21);
  r.read("Omega1", pulses.omega_1);
  r.exclusive("Omega2", "Omega21");
  pulses.omega_2 = pulses.omega_1 + r.get<double>("Omega21").value_or(2.0 * std::numbers::pi * 1e-3);
  r.read("Omega2", pulses.omega_2);
  r.read("phi1_0", pulses.phi1_0);
  r.exclusive("phi2_0", "phi21_0");
  pulses.phi2_0 = pulses.phi1_0 + r.get<double>("phi21_0").value_or(0.0);
  r.read("phi2_0", pulses.phi2_0);
  r.read("T_rep", pulses.t_rep);
  r.read("M", pulses.pair_count);
  if (auto c = parse_enum(r, "phase_clock", kClocks)) pulses.clock = *c;
  if (const auto enabled = r.get<std::vector<bool>>("enabled")) {
    if (enabled->size() != 2) r.fail("enabled: expected two flags");
    else pulses.enabled = {(*enabled)[0], (*enabled)[1]};
  }

  // numerics
  auto& prop = cfg.propagation;
  r.read("propagation.dt", prop.dt);
  r.read("propagation.start_pad", prop.start_pad);
  r.read("propagation.end_pad", prop.end_pad);
  r.read("propagation.norm_tolerance", prop.norm_tolerance);
  r.read("propagation.phase_samples", prop.phase_samples);
  if (auto m = parse_enum(r, "propagation.method", kMethods)) prop.method = *m;
  r.read("propagation.workers", prop.workers);

  auto& demod = cfg.demod;
  r.read("demod.omega_M", demod.omega_M);
  r.read("demod.tau_LI", demod.tau_LI);
  if (auto m = parse_enum(r, "demod.mode", kModes)) demod.mode = *m;
  // a phase-locked reference tracks the optical phase offset unless set explicitly
  demod.phi21_ref = pulses.phi21_0();
  r.read("demod.phi21_ref", demod.phi21_ref);

  r.read("grid.count", cfg.grid.count);
  r.read("grid.step", cfg.grid.step);
  r.read("grid.window_sigma", cfg.grid.window_sigma);

  r.read("background.subtract", cfg.background.subtract);
  r.read("background.window_fwhm", cfg.background.settings.window_fwhm);
  r.read("background.exclusion_fwhm", cfg.background.settings.exclusion_fwhm);
  r.read("background.bridge_flank_fwhm", cfg.background.settings.bridge_flank_fwhm);
  r.read("background.bridge_degree", cfg.background.settings.bridge_degree);

  if (r.has("sweep.axis") || r.has("sweep.values")) {
    SweepSpec s;
    if (auto a = parse_enum(r, "sweep.axis", kAxes)) s.axis = *a;
    r.read("sweep.values", s.values);
    if (auto rt = parse_enum(r, "sweep.route", kRoutes)) s.route = *rt;
    r.read("sweep.ratio", s.ratio);
    r.read("sweep.area", s.area);
    cfg.sweep = s;
  } else {
    for (const char* k : {"sweep.route", "sweep.ratio", "sweep.area"}) {
      if (r.has(k)) r.fail(std::string(k) + " given without sweep.axis/sweep.values");
      r.get<json>(k);
    }
  }
  r.read("output_dir", cfg.output_dir);

  r.check_unknown();
  if (r.errors().empty()) {
    try {
      cfg.validate();
    } catch (const std::exception& e) {
      r.fail(e.what());
    }
  }
  if (!r.errors().empty()) {
    std::ostringstream os;
    os << "invalid configuration:";
    for (const auto& e : r.errors()) os << "\n  - " << e;
    throw ConfigError(os.str());
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) return config_from_json(json());
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  // a run manifest carries the resolved config under "config"
  if (doc.is_object() && doc.contains("config_hash") && doc.contains("config")) return config_from_json(doc["config"]);
  return config_from_json(doc);
}

json to_json(const RunConfig& cfg) {
  const auto& p = cfg.system.particle;
  const auto& pulses = cfg.pulses;
  json j;
  j["eps_g"] = p.eps_g;
  j["eps_e"] = p.eps_e;
  j["eps_f"] = p.eps_f;
  j["mu_e"] = p.mu_e;
  j["mu_f"] = p.mu_f;
  j["v_ee"] = cfg.system.v_ee;
  j["v_ff"] = cfg.system.v_ff;
  j["envelope"] = {{"shape", pulses.envelope.is_gaussian() ? "gaussian" : "rectangular"},
                   {"sigma_or_delta", pulses.envelope.width()},
                   {"E0", pulses.envelope.e0}};
  j["omega_L"] = pulses.omega_L;
  j["t1"] = pulses.t1;
  j["t21"] = pulses.t21;
  j["Omega1"] = pulses.omega_1;
  j["Omega2"] = pulses.omega_2;
  j["phi1_0"] = pulses.phi1_0;
  j["phi2_0"] = pulses.phi2_0;
  j["T_rep"] = pulses.t_rep;
  j["M"] = pulses.pair_count;
  j["phase_clock"] = enum_name(kClocks, pulses.clock);
  j["enabled"] = {pulses.enabled[0], pulses.enabled[1]};
  const auto& prop = cfg.propagation;
  j["propagation"] = {{"dt", prop.dt},
                      {"start_pad", prop.start_pad},
                      {"end_pad", prop.end_pad},
                      {"norm_tolerance", prop.norm_tolerance},
                      {"phase_samples", prop.phase_samples},
                      {"method", enum_name(kMethods, prop.method)},
                      {"workers", prop.workers}};
  j["demod"] = {{"omega_M", cfg.demod.omega_M},
                {"tau_LI", cfg.demod.tau_LI},
                {"mode", enum_name(kModes, cfg.demod.mode)},
                {"phi21_ref", cfg.demod.phi21_ref}};
  j["grid"] = {{"count", cfg.grid.count}, {"step", cfg.grid.step}, {"window_sigma", cfg.grid.window_sigma}};
  j["background"] = {{"subtract", cfg.background.subtract},
                     {"window_fwhm", cfg.background.settings.window_fwhm},
                     {"exclusion_fwhm", cfg.background.settings.exclusion_fwhm},
                     {"bridge_flank_fwhm", cfg.background.settings.bridge_flank_fwhm},
                     {"bridge_degree", cfg.background.settings.bridge_degree}};
  if (cfg.sweep) {
    j["sweep"] = {{"axis", to_string(cfg.sweep->axis)},
                  {"values", cfg.sweep->values},
                  {"route", to_string(cfg.sweep->route)},
                  {"ratio", cfg.sweep->ratio},
                  {"area", cfg.sweep->area}};
  }
  j["output_dir"] = cfg.output_dir;
  return j;
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256: digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

std::string config_hash(const RunConfig& cfg) {
  json j = to_json(cfg);
  j.erase("output_dir");
  j["propagation"].erase("workers");
  return sha256_hex(j.dump());
}

}  // namespace pmspec

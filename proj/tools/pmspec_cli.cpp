#include "pmspec/config.hpp"
#include "pmspec/io.hpp"
#include "pmspec/sweep.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace pmspec;

namespace {

struct Options {
  std::string config;
  std::string out;
  unsigned workers{0};
  bool full_grid{false};
  std::string route;
  std::string kappa{"both"};
};

bool wants(const Options& o, int kappa) { return o.kappa == "both" || o.kappa == std::to_string(kappa); }

RunConfig resolve(const Options& o) {
  RunConfig cfg = o.config.empty() ? default_config() : load_config(o.config);
  if (!o.out.empty()) cfg.output_dir = o.out;
  if (o.workers > 0) cfg.propagation.workers = o.workers;
  if (o.full_grid) cfg.grid = GridSpec::full();
  if (!o.route.empty()) {
    if (!cfg.sweep) cfg.sweep = SweepSpec{};
    cfg.sweep->route = o.route == "numeric" ? Route::kNumeric : o.route == "analytic" ? Route::kAnalytic : Route::kBoth;
  }
  cfg.validate();
  return cfg;
}

// Output files are recorded relative to the output directory.
class Emitter {
 public:
  explicit Emitter(const RunConfig& cfg) : dir_(cfg.output_dir) { fs::create_directories(dir_); }
  fs::path operator()(const std::string& name) {
    files_.push_back(name);
    return dir_ / name;
  }
  void manifest(const RunConfig& cfg, const std::string& command) {
    write_manifest(dir_ / "manifest.json", cfg, command, files_);
  }
  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
};

void report_warnings(const SpectraResult& r) {
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
}

std::vector<PeakRow> selected(const std::vector<PeakRow>& rows, const Options& o) {
  std::vector<PeakRow> out;
  for (const auto& r : rows) {
    if (wants(o, r.kappa)) out.push_back(r);
  }
  return out;
}

SignalGrid cached_grid(const RunConfig& cfg, bool& hit) {
  const fs::path cache = fs::path(cfg.output_dir) / "cache" / (config_hash(cfg) + ".grid");
  if (auto g = load_grid_cache(cache)) {
    hit = true;
    return *g;
  }
  hit = false;
  SignalGrid g = compute_signal_grid(cfg.system, cfg.pulses, cfg.propagation, cfg.grid.axis());
  save_grid_cache(cache, g);
  return g;
}

NumericResult numeric_with_cache(const RunConfig& cfg) {
  bool hit = false;
  const SignalGrid grid = cached_grid(cfg, hit);
  std::cerr << (hit ? "grid cache hit\n" : "grid computed\n");
  return numeric_spectra(cfg, &grid);
}

int run_simulate(const Options& o) {
  const RunConfig cfg = resolve(o);
  const NumericResult res = numeric_with_cache(cfg);
  report_warnings(res);
  Emitter out(cfg);
  write_grid_csv(out("grid.csv"), res.grid);
  for (int k = 1; k <= 2; ++k) {
    if (!wants(o, k)) continue;
    const std::string s = std::to_string(k);
    write_demod_csv(out("demod_k" + s + ".csv"), res.demodulated[k - 1]);
    write_spectrum_csv(out("spectrum_k" + s + ".csv"), res.spectra[k - 1]);
  }
  write_peak_csv(out("peaks.csv"), selected(res.peaks, o));
  out.manifest(cfg, "simulate");
  return 0;
}

int run_analytic(const Options& o) {
  const RunConfig cfg = resolve(o);
  const SpectraResult res = analytic_spectra(cfg);
  report_warnings(res);
  const auto signals = analytic_signals(cfg);
  Emitter out(cfg);
  for (int k = 1; k <= 2; ++k) {
    if (!wants(o, k)) continue;
    const std::string s = std::to_string(k);
    const ComplexSpectrum& total = res.spectra[k - 1];
    std::vector<std::pair<std::string, ComplexSpectrum>> parts;
    for (const auto& term : signals[k - 1].terms) {
      ComplexSpectrum c = total;
      c.values = analytic_term_spectrum(term, cfg.grid.window_sigma, total.omega);
      parts.emplace_back(term.label, std::move(c));
    }
    parts.emplace_back("total", analytic_spectrum(signals[k - 1], cfg.grid.window_sigma, total.omega));
    write_component_csv(out("analytic_components_k" + s + ".csv"), parts);
    write_spectrum_csv(out("analytic_spectrum_k" + s + ".csv"), total);
  }
  write_peak_csv(out("peaks_analytic.csv"), selected(res.peaks, o));
  out.manifest(cfg, "analytic");
  return 0;
}

int run_sweep_cmd(const Options& o) {
  const RunConfig cfg = resolve(o);
  if (!cfg.sweep || cfg.sweep->values.empty()) throw ConfigError("sweep: config has no sweep.values");
  const auto rows = run_sweep(cfg, *cfg.sweep);
  Emitter out(cfg);
  write_peak_csv(out("sweep_peaks.csv"), selected(rows, o));
  out.manifest(cfg, "sweep");
  return 0;
}

int run_compare(const Options& o) {
  const RunConfig cfg = resolve(o);
  const NumericResult num = numeric_with_cache(cfg);
  const SpectraResult ana = analytic_spectra(cfg);
  report_warnings(num);
  report_warnings(ana);
  Emitter out(cfg);
  const fs::path path = out("compare.csv");
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
  std::fputs("label,kappa,omega,numeric,analytic,rel_deviation\n", f);
  std::printf("%-6s %12s %14s %14s %10s\n", "peak", "omega", "numeric", "analytic", "rel.dev");
  for (const auto& p : predicted_peaks(cfg.system, cfg.demod.omega_M)) {
    if (!wants(o, p.kappa)) continue;
    double n = NAN, a = NAN;
    for (const auto& r : num.peaks) {
      if (r.label == p.label) n = r.height();
    }
    for (const auto& r : ana.peaks) {
      if (r.label == p.label) a = r.height();
    }
    const double dev = std::abs(n - a) / std::abs(a);
    std::fprintf(f, "%s,%d,%.17g,%.17g,%.17g,%.17g\n", p.label.c_str(), p.kappa, p.omega, n, a, dev);
    std::printf("%-6s %12.6f %14.6e %14.6e %10.4f\n", p.label.c_str(), p.omega, n, a, dev);
  }
  std::fclose(f);
  out.manifest(cfg, "compare");
  return 0;
}

void structured_error(const char* kind, const std::string& message) {
  nlohmann::json e{{"error", kind}, {"message", message}};
  std::cerr << e.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phase-modulated two-dimensional spectroscopy of coupled dimers"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  Options o;
  struct Sub {
    const char* name;
    const char* help;
    int (*run)(const Options&);
  };
  const Sub subs[] = {{"simulate", "propagate the grid and write numeric spectra", run_simulate},
                      {"analytic", "write perturbative spectra and their components", run_analytic},
                      {"sweep", "run the configured parameter sweep into a peak table", run_sweep_cmd},
                      {"compare", "tabulate numeric against analytic peak heights", run_compare}};
  for (const auto& s : subs) {
    auto* sub = app.add_subcommand(s.name, s.help);
    sub->add_option("--config", o.config, "JSON config or run manifest")->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--workers", o.workers, "worker threads (results do not depend on it)")
        ->check(CLI::PositiveNumber);
    sub->add_flag("--full-grid", o.full_grid, "4500 x 0.5 t21 grid with window 500");
    sub->add_option("--route", o.route, "sweep route")->check(CLI::IsMember({"numeric", "analytic", "both"}));
    sub->add_option("--kappa", o.kappa, "harmonics to emit")->check(CLI::IsMember({"1", "2", "both"}));
  }
  CLI11_PARSE(app, argc, argv);

  try {
    for (const auto& s : subs) {
      if (app.got_subcommand(s.name)) return s.run(o);
    }
  } catch (const ConfigError& e) {
    structured_error("config", e.what());
    return 2;
  } catch (const std::exception& e) {
    structured_error("runtime", e.what());
    return 1;
  }
  return 1;
}

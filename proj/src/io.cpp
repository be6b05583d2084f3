#include "pmspec/io.hpp"

#include "pmspec/sweep.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <memory>
#include <stdexcept>

namespace pmspec {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

File open_for_write(const std::filesystem::path& path, const char* mode = "w") {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  File f(std::fopen(path.c_str(), mode));
  if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
  return f;
}

constexpr char kCacheMagic[8] = {'P', 'M', 'S', 'G', 'R', 'I', 'D', '1'};

}  // namespace

void write_grid_csv(const std::filesystem::path& path, const SignalGrid& grid) {
  auto f = open_for_write(path);
  std::fputs("t21\\tau", f.get());
  for (double t : grid.tau) std::fprintf(f.get(), ",%.17g", t);
  std::fputc('\n', f.get());
  for (std::size_t r = 0; r < grid.t21.size(); ++r) {
    std::fprintf(f.get(), "%.17g", grid.t21[r]);
    for (Eigen::Index c = 0; c < grid.values.cols(); ++c) {
      std::fprintf(f.get(), ",%.17g", grid.values(static_cast<Eigen::Index>(r), c));
    }
    std::fputc('\n', f.get());
  }
}

void write_spectrum_csv(const std::filesystem::path& path, const ComplexSpectrum& spec) {
  auto f = open_for_write(path);
  std::fputs("omega,re,im\n", f.get());
  for (std::size_t i = 0; i < spec.omega.size(); ++i) {
    std::fprintf(f.get(), "%.17g,%.17g,%.17g\n", spec.omega[i], spec.values[i].real(), spec.values[i].imag());
  }
}

void write_component_csv(const std::filesystem::path& path,
                         const std::vector<std::pair<std::string, ComplexSpectrum>>& parts) {
  auto f = open_for_write(path);
  std::fputs("component,omega,re,im\n", f.get());
  for (const auto& [label, spec] : parts) {
    for (std::size_t i = 0; i < spec.omega.size(); ++i) {
      std::fprintf(f.get(), "%s,%.17g,%.17g,%.17g\n", label.c_str(), spec.omega[i], spec.values[i].real(),
                   spec.values[i].imag());
    }
  }
}

void write_demod_csv(const std::filesystem::path& path, const DemodSignal& signal) {
  auto f = open_for_write(path);
  std::fputs("t21,re,im\n", f.get());
  for (std::size_t i = 0; i < signal.t21.size(); ++i) {
    std::fprintf(f.get(), "%.17g,%.17g,%.17g\n", signal.t21[i], signal.values[i].real(), signal.values[i].imag());
  }
}

void write_peak_csv(const std::filesystem::path& path, const std::vector<PeakRow>& rows) {
  auto f = open_for_write(path);
  std::fputs("sweep_value,label,omega_peak,re,im,route\n", f.get());
  for (const auto& row : rows) {
    std::fprintf(f.get(), "%.17g,%s,%.17g,%.17g,%.17g,%s\n", row.sweep_value, row.label.c_str(), row.omega,
                 row.value.real(), row.value.imag(), to_string(row.route).c_str());
  }
}

void save_grid_cache(const std::filesystem::path& path, const SignalGrid& grid) {
  auto f = open_for_write(path, "wb");
  const std::uint64_t rows = grid.t21.size(), cols = grid.tau.size();
  std::fwrite(kCacheMagic, 1, sizeof kCacheMagic, f.get());
  std::fwrite(&rows, sizeof rows, 1, f.get());
  std::fwrite(&cols, sizeof cols, 1, f.get());
  std::fwrite(grid.t21.data(), sizeof(double), rows, f.get());
  std::fwrite(grid.tau.data(), sizeof(double), cols, f.get());
  std::fwrite(grid.values.data(), sizeof(double), rows * cols, f.get());
  if (std::ferror(f.get())) throw std::runtime_error("failed writing grid cache '" + path.string() + "'");
}

std::optional<SignalGrid> load_grid_cache(const std::filesystem::path& path) {
  File f(std::fopen(path.c_str(), "rb"));
  if (!f) return std::nullopt;
  char magic[sizeof kCacheMagic];
  std::uint64_t rows = 0, cols = 0;
  if (std::fread(magic, 1, sizeof magic, f.get()) != sizeof magic ||
      !std::equal(magic, magic + sizeof magic, kCacheMagic) || std::fread(&rows, sizeof rows, 1, f.get()) != 1 ||
      std::fread(&cols, sizeof cols, 1, f.get()) != 1 || rows > (1u << 24) || cols > (1u << 24)) {
    return std::nullopt;
  }
  SignalGrid g;
  g.t21.resize(rows);
  g.tau.resize(cols);
  g.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  if (std::fread(g.t21.data(), sizeof(double), rows, f.get()) != rows ||
      std::fread(g.tau.data(), sizeof(double), cols, f.get()) != cols ||
      std::fread(g.values.data(), sizeof(double), rows * cols, f.get()) != rows * cols) {
    return std::nullopt;
  }
  return g;
}

void write_manifest(const std::filesystem::path& path, const RunConfig& cfg, const std::string& command,
                    const std::vector<std::string>& files) {
  nlohmann::json m;
  m["version"] = kVersion;
  m["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
               std::to_string(EIGEN_MINOR_VERSION);
  m["command"] = command;
  m["config_hash"] = config_hash(cfg);
  m["config"] = to_json(cfg);
  m["files"] = files;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << m.dump(2) << '\n';
}

}  // namespace pmspec

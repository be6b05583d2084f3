// io.hpp - CSV emitters, binary grid cache and run manifest

#pragma once

#include "pmspec/config.hpp"
#include "pmspec/demod.hpp"
#include "pmspec/propagator.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace pmspec {

struct PeakRow;

/// Header row "t21\tau" followed by the tau_m values; one row per t21.
void write_grid_csv(const std::filesystem::path& path, const SignalGrid& grid);

/// Columns omega, re, im.
void write_spectrum_csv(const std::filesystem::path& path, const ComplexSpectrum& spec);

/// Columns component, omega, re, im.
void write_component_csv(const std::filesystem::path& path,
                         const std::vector<std::pair<std::string, ComplexSpectrum>>& parts);

/// Columns t21, re, im of a demodulated signal.
void write_demod_csv(const std::filesystem::path& path, const DemodSignal& signal);

/// Columns sweep_value, label, omega_peak, re, im, route.
void write_peak_csv(const std::filesystem::path& path, const std::vector<PeakRow>& rows);

/// Raw little-endian dump of the grid axes and values.
void save_grid_cache(const std::filesystem::path& path, const SignalGrid& grid);
std::optional<SignalGrid> load_grid_cache(const std::filesystem::path& path);

/// Manifest with version, config hash, the resolved config and the emitted files.
void write_manifest(const std::filesystem::path& path, const RunConfig& cfg, const std::string& command,
                    const std::vector<std::string>& files);

}  // namespace pmspec

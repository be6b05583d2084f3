// config.hpp - run configuration: JSON loading with defaults, validation,
// canonical serialisation and content hash

#pragma once

#include "pmspec/demod.hpp"
#include "pmspec/model.hpp"
#include "pmspec/propagator.hpp"
#include "pmspec/pulses.hpp"

#include "json.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pmspec {

inline constexpr const char* kVersion = "1.0.0";

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Route { kNumeric, kAnalytic, kBoth };
enum class SweepAxis { kVee, kSigma, kE0 };

struct GridSpec {
  std::size_t count{1024};
  double step{0.5};
  double window_sigma{120.0};

  static GridSpec full() { return {4500, 0.5, 500.0}; }
  std::vector<double> axis() const { return uniform_axis(0.0, step, count); }
};

struct BackgroundSpec {
  bool subtract{true};
  BackgroundSettings settings{};
};

struct SweepSpec {
  SweepAxis axis{SweepAxis::kVee};
  std::vector<double> values;
  Route route{Route::kBoth};
  double ratio{1.974};  // v_ff / v_ee on the coupling axis
  double area{0.1};     // pulse area held fixed on the width axis
};

struct RunConfig {
  DimerSystem system{};
  PulseTrainConfig pulses{};
  PropagationSettings propagation{};
  DemodSettings demod{};
  GridSpec grid{};
  BackgroundSpec background{};
  std::optional<SweepSpec> sweep;
  std::string output_dir{"out"};

  void validate() const;
};

/// Reference parameter set: pulse area 0.1 at sigma = 10.4, delta_eg = -0.025.
RunConfig default_config();

/// Accepts nested objects or dotted keys. Missing keys take defaults; unknown,
/// contradictory or invalid keys are all reported in one ConfigError.
RunConfig config_from_json(const nlohmann::json& doc);
/// Also accepts a run manifest and reads the config embedded in it.
RunConfig load_config(const std::string& path);

/// Fully resolved configuration that config_from_json maps back to itself.
nlohmann::json to_json(const RunConfig& cfg);

/// SHA-256 over the canonical JSON of everything that determines results
/// (the output directory and worker count are excluded).
std::string config_hash(const RunConfig& cfg);
std::string sha256_hex(const std::string& data);

std::string to_string(Route r);
std::string to_string(SweepAxis a);

}  // namespace pmspec

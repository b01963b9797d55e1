#pragma once

#include "covertsim/channels.hpp"
#include "covertsim/design_robust.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace covertsim {

enum class Scheme { perfect, robust_d01, robust_d10, mrt_baseline, nonrobust };

const char* to_string(Scheme s);
Scheme scheme_from_string(const std::string& name);

enum class MotionKind { circling, erratic };
enum class CsiModel { freespace, composite };

// Thrown on malformed configuration, carrying the offending key path.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// The single source of truth for a run.  Powers are entered in dBm and
// converted to watts once at parse time; everything else is SI.
struct ScenarioConfig {
  int schema_version = 1;
  std::uint64_t seed = 1;
  int runs = 100;

  Vec3 radar_position{0.0, 0.0, 30.0};
  Vec3 bs_position{1200.0, 50.0, 10.0};
  Vec3 user_position{1000.0, 100.0, 0.0};
  ArrayGeometry arrays;

  double carrier_hz = 6e9;
  double bandwidth_hz = 10e6;
  double radar_power_dbm = 40.0;
  double bs_power_dbm = 30.0;
  double noise_user_dbm = -90.0;
  double noise_radar_dbm = -90.0;
  double noise_adversary_dbm = -90.0;
  double matched_filter_gain = 1000.0;
  double rician_k = 10.0;

  MotionKind motion = MotionKind::circling;
  double speed_mps = 30.0;
  double slot_duration_s = 0.2;
  double period_s = 20.0;
  Vec3 initial_position{950.0, 300.0, 400.0};
  double initial_heading_rad = 1.5707963267948966;

  // negative a_i mean "calibrate from the scenario geometry at parse time"
  double a1 = -1.0, a2 = -1.0, a3 = -1.0, a4 = -1.0;
  double accel_sigma = 7.0;
  double reg_epsilon = 1e-6;
  double mse_max = 10.0;
  double init_pos_sigma = 10.0;
  double init_vel_sigma = 5.0;
  // tracking-only slots before covert transmission begins (the radar is
  // already running in detection mode when the BS starts)
  int warmup_slots = 10;

  CsiModel csi = CsiModel::freespace;
  double o_aw = 0.45, o_rw = 0.45;
  double freespace_min_altitude = 100.0;

  double epsilon = 0.05;
  CovertDirection direction = CovertDirection::d01;

  double l_threshold = 1e-4;
  int dinkelbach_max_iterations = 20;
  int randomization_count = 100;
  double solver_tol = 1e-8;
  double robust_solver_tol = 2e-6;

  std::vector<Scheme> schemes{Scheme::perfect, Scheme::mrt_baseline};
  bool isac = false;

  // derived SI quantities
  double radar_power_w() const;
  double bs_power_w() const;
  double noise_user_w() const;
  double noise_radar_w() const;
  double noise_adversary_w() const;
  int slots() const;

  MeasurementNoiseModel noise_model() const;

  void validate() const;  // throws ConfigError with a key path
};

// Table-I defaults with the measurement-noise constants resolved.
ScenarioConfig default_scenario();

// Parse from JSON text / file; unknown keys are rejected with their paths,
// defaults fill missing keys, and the a_i calibration is resolved.
ScenarioConfig parse_scenario_text(const std::string& json_text);
ScenarioConfig parse_scenario_file(const std::string& path);

// Canonical serialization; parse(emit(cfg)) emits byte-identical text.
std::string scenario_to_json(const ScenarioConfig& cfg);

double dbm_to_watt(double dbm);

}  // namespace covertsim

#include "covertsim/scenario.hpp"

#include "covertsim/tracking.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace covertsim {

using json = nlohmann::ordered_json;

const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::perfect: return "perfect";
    case Scheme::robust_d01: return "robust_d01";
    case Scheme::robust_d10: return "robust_d10";
    case Scheme::mrt_baseline: return "mrt_baseline";
    case Scheme::nonrobust: return "nonrobust";
  }
  return "unknown";
}

Scheme scheme_from_string(const std::string& name) {
  if (name == "perfect") return Scheme::perfect;
  if (name == "robust_d01") return Scheme::robust_d01;
  if (name == "robust_d10") return Scheme::robust_d10;
  if (name == "mrt_baseline") return Scheme::mrt_baseline;
  if (name == "nonrobust") return Scheme::nonrobust;
  throw ConfigError("unknown scheme name: " + name);
}

double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double ScenarioConfig::radar_power_w() const { return dbm_to_watt(radar_power_dbm); }
double ScenarioConfig::bs_power_w() const { return dbm_to_watt(bs_power_dbm); }
double ScenarioConfig::noise_user_w() const { return dbm_to_watt(noise_user_dbm); }
double ScenarioConfig::noise_radar_w() const { return dbm_to_watt(noise_radar_dbm); }
double ScenarioConfig::noise_adversary_w() const { return dbm_to_watt(noise_adversary_dbm); }

int ScenarioConfig::slots() const {
  return static_cast<int>(std::llround(period_s / slot_duration_s));
}

MeasurementNoiseModel ScenarioConfig::noise_model() const {
  MeasurementNoiseModel m;
  m.a1 = a1;
  m.a2 = a2;
  m.a3 = a3;
  m.a4 = a4;
  m.reg_epsilon = reg_epsilon;
  return m;
}

namespace {

// Measurement accuracy targets anchored at the mid-scenario beamformed echo
// SNR: range sigma 1 m, radial speed sigma 0.5 m/s, angle sigma 0.05 deg.
void calibrate_noise_constants(ScenarioConfig& cfg) {
  const Vec3 mid(0.5 * (cfg.bs_position.x() + cfg.user_position.x()),
                 0.5 * (cfg.bs_position.y() + cfg.user_position.y()),
                 cfg.initial_position.z());
  const double d = (mid - cfg.radar_position).norm();
  const double rho0 = rho0_reference(cfg.carrier_hz);
  const double gamma_mid = rho0 * rho0 / std::pow(d, 4) * cfg.matched_filter_gain *
                           cfg.radar_power_w() * cfg.arrays.radar_antennas() /
                           cfg.noise_radar_w();
  constexpr double c = 299792458.0;
  const double sigma_range = 1.0, sigma_speed = 0.5;
  const double sigma_angle = 0.02 * M_PI / 180.0;
  if (cfg.a1 < 0.0) cfg.a1 = std::pow(2.0 * sigma_range / c, 2) * gamma_mid;
  if (cfg.a2 < 0.0) cfg.a2 = sigma_speed * sigma_speed * gamma_mid;
  if (cfg.a3 < 0.0) cfg.a3 = sigma_angle * sigma_angle * gamma_mid;
  if (cfg.a4 < 0.0) cfg.a4 = sigma_angle * sigma_angle * gamma_mid;
}

void expect_keys(const json& j, const std::string& path,
                 const std::set<std::string>& allowed) {
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!allowed.count(key))
      throw ConfigError("unknown key: " + (path.empty() ? key : path + "." + key));
  }
}

double get_num(const json& j, const std::string& path, const std::string& key, double dflt) {
  if (!j.contains(key)) return dflt;
  if (!j[key].is_number()) throw ConfigError("expected number at " + path + "." + key);
  return j[key].get<double>();
}

double require_positive(double v, const std::string& keypath) {
  if (!(v > 0.0)) throw ConfigError("value must be positive at " + keypath);
  return v;
}

Vec3 get_vec3(const json& j, const std::string& path, const std::string& key,
              const Vec3& dflt) {
  if (!j.contains(key)) return dflt;
  const json& a = j[key];
  if (!a.is_array() || a.size() != 3) throw ConfigError("expected [x, y, z] at " + path + "." + key);
  Vec3 v;
  for (int i = 0; i < 3; ++i) {
    if (!a[i].is_number()) throw ConfigError("expected number at " + path + "." + key);
    v(i) = a[i].get<double>();
  }
  return v;
}

}  // namespace

void ScenarioConfig::validate() const {
  if (schema_version != 1) throw ConfigError("unsupported schema_version");
  if (runs < 1) throw ConfigError("value must be >= 1 at runs");
  if (arrays.bs_antennas < 1) throw ConfigError("value must be >= 1 at arrays.bs_antennas");
  if (arrays.radar_horizontal < 1 || arrays.radar_vertical < 1)
    throw ConfigError("radar array sizes must be >= 1 at arrays");
  if (!(arrays.spacing > 0.0)) throw ConfigError("value must be positive at arrays.antenna_spacing");
  require_positive(carrier_hz, "rf.carrier_ghz");
  require_positive(bandwidth_hz, "rf.bandwidth_mhz");
  require_positive(radar_power_w(), "rf.radar_power_dbm");
  require_positive(bs_power_w(), "rf.bs_power_dbm");
  if (rician_k < 0.0) throw ConfigError("value must be >= 0 at rf.rician_k");
  require_positive(matched_filter_gain, "rf.matched_filter_gain");
  require_positive(speed_mps, "motion.speed_mps");
  require_positive(slot_duration_s, "motion.slot_duration_s");
  require_positive(period_s, "motion.period_s");
  const double ratio = period_s / slot_duration_s;
  if (std::abs(ratio - std::llround(ratio)) > 1e-9)
    throw ConfigError("motion.period_s must be an integer multiple of motion.slot_duration_s");
  require_positive(a1, "tracking.a1");
  require_positive(a2, "tracking.a2");
  require_positive(a3, "tracking.a3");
  require_positive(a4, "tracking.a4");
  if (accel_sigma < 0.0) throw ConfigError("value must be >= 0 at tracking.accel_sigma");
  require_positive(mse_max, "tracking.mse_max");
  if (warmup_slots < 0) throw ConfigError("value must be >= 0 at tracking.warmup_slots");
  if (reg_epsilon < 0.0) throw ConfigError("value must be >= 0 at tracking.reg_epsilon");
  if (o_aw < 0.0 || o_rw < 0.0) throw ConfigError("uncertainty radii must be >= 0 at csi");
  if (epsilon < 0.0 || epsilon > 1.0)
    throw ConfigError("value must be in [0, 1] at covertness.epsilon");
  require_positive(l_threshold, "dinkelbach.l_threshold");
  if (dinkelbach_max_iterations < 1)
    throw ConfigError("value must be >= 1 at dinkelbach.max_iterations");
  if (randomization_count < 1)
    throw ConfigError("value must be >= 1 at dinkelbach.randomization_count");
  if (solver_tol < 1e-10 || solver_tol > 1e-4)
    throw ConfigError("value must be in [1e-10, 1e-4] at solver.tolerance");
  if (robust_solver_tol < 1e-10 || robust_solver_tol > 1e-4)
    throw ConfigError("value must be in [1e-10, 1e-4] at solver.robust_tolerance");
  if (schemes.empty()) throw ConfigError("schemes must not be empty");
  if (csi == CsiModel::freespace && initial_position.z() < freespace_min_altitude)
    throw ConfigError(
        "free-space CSI requires motion.initial_position altitude >= "
        "csi.freespace_min_altitude");
}

ScenarioConfig default_scenario() {
  ScenarioConfig cfg;
  calibrate_noise_constants(cfg);
  cfg.validate();
  return cfg;
}

ScenarioConfig parse_scenario_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text.empty() ? "{}" : text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("configuration root must be an object");

  expect_keys(j, "", {"schema_version", "seed", "runs", "geometry", "arrays", "rf", "motion",
                      "tracking", "csi", "covertness", "dinkelbach", "solver", "schemes",
                      "isac"});

  ScenarioConfig cfg;
  if (j.contains("schema_version")) cfg.schema_version = j["schema_version"].get<int>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("runs")) cfg.runs = j["runs"].get<int>();

  if (j.contains("geometry")) {
    const json& g = j["geometry"];
    expect_keys(g, "geometry", {"radar_position", "bs_position", "user_position"});
    cfg.radar_position = get_vec3(g, "geometry", "radar_position", cfg.radar_position);
    cfg.bs_position = get_vec3(g, "geometry", "bs_position", cfg.bs_position);
    cfg.user_position = get_vec3(g, "geometry", "user_position", cfg.user_position);
  }
  if (j.contains("arrays")) {
    const json& a = j["arrays"];
    expect_keys(a, "arrays",
                {"bs_antennas", "radar_horizontal", "radar_vertical", "antenna_spacing"});
    cfg.arrays.bs_antennas =
        static_cast<int>(get_num(a, "arrays", "bs_antennas", cfg.arrays.bs_antennas));
    cfg.arrays.radar_horizontal = static_cast<int>(
        get_num(a, "arrays", "radar_horizontal", cfg.arrays.radar_horizontal));
    cfg.arrays.radar_vertical = static_cast<int>(
        get_num(a, "arrays", "radar_vertical", cfg.arrays.radar_vertical));
    cfg.arrays.spacing = get_num(a, "arrays", "antenna_spacing", cfg.arrays.spacing);
  }
  if (j.contains("rf")) {
    const json& r = j["rf"];
    expect_keys(r, "rf",
                {"carrier_ghz", "bandwidth_mhz", "radar_power_dbm", "bs_power_dbm",
                 "noise_user_dbm", "noise_radar_dbm", "noise_adversary_dbm",
                 "matched_filter_gain", "rician_k"});
    cfg.carrier_hz = get_num(r, "rf", "carrier_ghz", cfg.carrier_hz / 1e9) * 1e9;
    cfg.bandwidth_hz = get_num(r, "rf", "bandwidth_mhz", cfg.bandwidth_hz / 1e6) * 1e6;
    cfg.radar_power_dbm = get_num(r, "rf", "radar_power_dbm", cfg.radar_power_dbm);
    cfg.bs_power_dbm = get_num(r, "rf", "bs_power_dbm", cfg.bs_power_dbm);
    cfg.noise_user_dbm = get_num(r, "rf", "noise_user_dbm", cfg.noise_user_dbm);
    cfg.noise_radar_dbm = get_num(r, "rf", "noise_radar_dbm", cfg.noise_radar_dbm);
    cfg.noise_adversary_dbm = get_num(r, "rf", "noise_adversary_dbm", cfg.noise_adversary_dbm);
    cfg.matched_filter_gain = get_num(r, "rf", "matched_filter_gain", cfg.matched_filter_gain);
    cfg.rician_k = get_num(r, "rf", "rician_k", cfg.rician_k);
  }
  if (j.contains("motion")) {
    const json& m = j["motion"];
    expect_keys(m, "motion",
                {"model", "speed_mps", "slot_duration_s", "period_s", "initial_position",
                 "initial_heading_rad"});
    if (m.contains("model")) {
      const std::string kind = m["model"].get<std::string>();
      if (kind == "circling") cfg.motion = MotionKind::circling;
      else if (kind == "erratic") cfg.motion = MotionKind::erratic;
      else throw ConfigError("unknown value at motion.model: " + kind);
    }
    cfg.speed_mps = get_num(m, "motion", "speed_mps", cfg.speed_mps);
    cfg.slot_duration_s = get_num(m, "motion", "slot_duration_s", cfg.slot_duration_s);
    cfg.period_s = get_num(m, "motion", "period_s", cfg.period_s);
    cfg.initial_position = get_vec3(m, "motion", "initial_position", cfg.initial_position);
    cfg.initial_heading_rad = get_num(m, "motion", "initial_heading_rad", cfg.initial_heading_rad);
  }
  if (j.contains("tracking")) {
    const json& t = j["tracking"];
    expect_keys(t, "tracking",
                {"a1", "a2", "a3", "a4", "accel_sigma", "reg_epsilon", "mse_max",
                 "init_pos_sigma", "init_vel_sigma", "warmup_slots"});
    cfg.a1 = get_num(t, "tracking", "a1", cfg.a1);
    cfg.a2 = get_num(t, "tracking", "a2", cfg.a2);
    cfg.a3 = get_num(t, "tracking", "a3", cfg.a3);
    cfg.a4 = get_num(t, "tracking", "a4", cfg.a4);
    cfg.accel_sigma = get_num(t, "tracking", "accel_sigma", cfg.accel_sigma);
    cfg.reg_epsilon = get_num(t, "tracking", "reg_epsilon", cfg.reg_epsilon);
    cfg.mse_max = get_num(t, "tracking", "mse_max", cfg.mse_max);
    cfg.init_pos_sigma = get_num(t, "tracking", "init_pos_sigma", cfg.init_pos_sigma);
    cfg.init_vel_sigma = get_num(t, "tracking", "init_vel_sigma", cfg.init_vel_sigma);
    cfg.warmup_slots =
        static_cast<int>(get_num(t, "tracking", "warmup_slots", cfg.warmup_slots));
  }
  if (j.contains("csi")) {
    const json& c = j["csi"];
    expect_keys(c, "csi", {"model", "o_aw", "o_rw", "freespace_min_altitude"});
    if (c.contains("model")) {
      const std::string kind = c["model"].get<std::string>();
      if (kind == "freespace") cfg.csi = CsiModel::freespace;
      else if (kind == "composite") cfg.csi = CsiModel::composite;
      else throw ConfigError("unknown value at csi.model: " + kind);
    }
    cfg.o_aw = get_num(c, "csi", "o_aw", cfg.o_aw);
    cfg.o_rw = get_num(c, "csi", "o_rw", cfg.o_rw);
    cfg.freespace_min_altitude =
        get_num(c, "csi", "freespace_min_altitude", cfg.freespace_min_altitude);
  }
  if (j.contains("covertness")) {
    const json& c = j["covertness"];
    expect_keys(c, "covertness", {"epsilon", "direction"});
    cfg.epsilon = get_num(c, "covertness", "epsilon", cfg.epsilon);
    if (c.contains("direction")) {
      const std::string d = c["direction"].get<std::string>();
      if (d == "d01") cfg.direction = CovertDirection::d01;
      else if (d == "d10") cfg.direction = CovertDirection::d10;
      else throw ConfigError("unknown value at covertness.direction: " + d);
    }
  }
  if (j.contains("dinkelbach")) {
    const json& d = j["dinkelbach"];
    expect_keys(d, "dinkelbach", {"l_threshold", "max_iterations", "randomization_count"});
    cfg.l_threshold = get_num(d, "dinkelbach", "l_threshold", cfg.l_threshold);
    cfg.dinkelbach_max_iterations = static_cast<int>(
        get_num(d, "dinkelbach", "max_iterations", cfg.dinkelbach_max_iterations));
    cfg.randomization_count = static_cast<int>(
        get_num(d, "dinkelbach", "randomization_count", cfg.randomization_count));
  }
  if (j.contains("solver")) {
    const json& s = j["solver"];
    expect_keys(s, "solver", {"tolerance", "robust_tolerance"});
    cfg.solver_tol = get_num(s, "solver", "tolerance", cfg.solver_tol);
    cfg.robust_solver_tol = get_num(s, "solver", "robust_tolerance", cfg.robust_solver_tol);
  }
  if (j.contains("schemes")) {
    if (!j["schemes"].is_array()) throw ConfigError("schemes must be an array of names");
    cfg.schemes.clear();
    for (const auto& s : j["schemes"]) cfg.schemes.push_back(scheme_from_string(s.get<std::string>()));
  }
  if (j.contains("isac")) cfg.isac = j["isac"].get<bool>();

  calibrate_noise_constants(cfg);
  cfg.validate();
  return cfg;
}

ScenarioConfig parse_scenario_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open configuration file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_scenario_text(ss.str());
}

std::string scenario_to_json(const ScenarioConfig& cfg) {
  json j;
  j["schema_version"] = cfg.schema_version;
  j["seed"] = cfg.seed;
  j["runs"] = cfg.runs;
  j["geometry"] = {{"radar_position", {cfg.radar_position.x(), cfg.radar_position.y(),
                                       cfg.radar_position.z()}},
                   {"bs_position", {cfg.bs_position.x(), cfg.bs_position.y(), cfg.bs_position.z()}},
                   {"user_position", {cfg.user_position.x(), cfg.user_position.y(),
                                      cfg.user_position.z()}}};
  j["arrays"] = {{"bs_antennas", cfg.arrays.bs_antennas},
                 {"radar_horizontal", cfg.arrays.radar_horizontal},
                 {"radar_vertical", cfg.arrays.radar_vertical},
                 {"antenna_spacing", cfg.arrays.spacing}};
  j["rf"] = {{"carrier_ghz", cfg.carrier_hz / 1e9},
             {"bandwidth_mhz", cfg.bandwidth_hz / 1e6},
             {"radar_power_dbm", cfg.radar_power_dbm},
             {"bs_power_dbm", cfg.bs_power_dbm},
             {"noise_user_dbm", cfg.noise_user_dbm},
             {"noise_radar_dbm", cfg.noise_radar_dbm},
             {"noise_adversary_dbm", cfg.noise_adversary_dbm},
             {"matched_filter_gain", cfg.matched_filter_gain},
             {"rician_k", cfg.rician_k}};
  j["motion"] = {{"model", cfg.motion == MotionKind::circling ? "circling" : "erratic"},
                 {"speed_mps", cfg.speed_mps},
                 {"slot_duration_s", cfg.slot_duration_s},
                 {"period_s", cfg.period_s},
                 {"initial_position", {cfg.initial_position.x(), cfg.initial_position.y(),
                                       cfg.initial_position.z()}},
                 {"initial_heading_rad", cfg.initial_heading_rad}};
  j["tracking"] = {{"a1", cfg.a1},
                   {"a2", cfg.a2},
                   {"a3", cfg.a3},
                   {"a4", cfg.a4},
                   {"accel_sigma", cfg.accel_sigma},
                   {"reg_epsilon", cfg.reg_epsilon},
                   {"mse_max", cfg.mse_max},
                   {"init_pos_sigma", cfg.init_pos_sigma},
                   {"init_vel_sigma", cfg.init_vel_sigma},
                   {"warmup_slots", cfg.warmup_slots}};
  j["csi"] = {{"model", cfg.csi == CsiModel::freespace ? "freespace" : "composite"},
              {"o_aw", cfg.o_aw},
              {"o_rw", cfg.o_rw},
              {"freespace_min_altitude", cfg.freespace_min_altitude}};
  j["covertness"] = {{"epsilon", cfg.epsilon},
                     {"direction", cfg.direction == CovertDirection::d01 ? "d01" : "d10"}};
  j["dinkelbach"] = {{"l_threshold", cfg.l_threshold},
                     {"max_iterations", cfg.dinkelbach_max_iterations},
                     {"randomization_count", cfg.randomization_count}};
  j["solver"] = {{"tolerance", cfg.solver_tol}, {"robust_tolerance", cfg.robust_solver_tol}};
  json sch = json::array();
  for (Scheme s : cfg.schemes) sch.push_back(to_string(s));
  j["schemes"] = sch;
  j["isac"] = cfg.isac;
  return j.dump(2) + "\n";
}

}  // namespace covertsim

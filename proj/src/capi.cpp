#include "covertsim.h"

#include "covertsim/results_io.hpp"
#include "covertsim/scenario.hpp"
#include "covertsim/sim.hpp"
#include "covertsim/solver_check.hpp"

#include <json.hpp>

#include <cstring>
#include <new>
#include <string>

using namespace covertsim;
using json = nlohmann::ordered_json;

struct covertsim_scenario {
  ScenarioConfig cfg;
};

namespace {

void put_error(char* err, size_t err_len, const std::string& msg) {
  if (!err || err_len == 0) return;
  std::snprintf(err, err_len, "%s", msg.c_str());
}

char* dup_string(const std::string& s) {
  char* out = new (std::nothrow) char[s.size() + 1];
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

json summary_json_of(const AggregateResult& agg) {
  json out = json::array();
  for (const auto& sa : agg.schemes) {
    json row;
    row["scheme"] = to_string(sa.scheme);
    row["runs"] = sa.runs;
    row["slots"] = sa.slots;
    row["mean_mse"] = sa.mean(&SlotRecord::mse);
    row["mean_rate"] = sa.mean(&SlotRecord::rate);
    row["mean_xi"] = sa.mean(&SlotRecord::xi);
    row["mean_d01"] = sa.mean(&SlotRecord::d01);
    row["mean_power"] = sa.mean(&SlotRecord::bs_power);
    out.push_back(row);
  }
  return out;
}

covertsim_status run_study(const covertsim_scenario* sc, const char* out_dir,
                           const char* format, char** summary_json, char* err, size_t err_len,
                           bool track_only) {
  if (!sc) {
    put_error(err, err_len, "null scenario handle");
    return COVERTSIM_E_ARGUMENT;
  }
  try {
    ScenarioConfig cfg = sc->cfg;
    if (track_only) cfg.schemes = {Scheme::perfect};
    const AggregateResult agg = monte_carlo(cfg);
    if (out_dir != nullptr) {
      const std::string fmt = format ? format : "csv";
      emit_results(agg, fmt, out_dir);
    }
    if (summary_json) *summary_json = dup_string(summary_json_of(agg).dump(2) + "\n");
    return COVERTSIM_OK;
  } catch (const ConfigError& e) {
    put_error(err, err_len, e.what());
    return COVERTSIM_E_CONFIG;
  } catch (const std::invalid_argument& e) {
    put_error(err, err_len, e.what());
    return COVERTSIM_E_ARGUMENT;
  } catch (const std::exception& e) {
    put_error(err, err_len, e.what());
    return COVERTSIM_E_IO;
  }
}

covertsim_status run_single_design(const covertsim_scenario* sc, Scheme scheme,
                                   char** report_json, char* err, size_t err_len) {
  if (!sc) {
    put_error(err, err_len, "null scenario handle");
    return COVERTSIM_E_ARGUMENT;
  }
  try {
    ScenarioConfig cfg = sc->cfg;
    cfg.period_s = cfg.slot_duration_s;  // single design slot
    RandomStream master(cfg.seed);
    const EpisodeResult ep = run_episode(cfg, scheme, master.substream(0));
    const SlotRecord& r = ep.slots.at(0);

    json rep;
    rep["scheme"] = to_string(scheme);
    rep["feasible"] = r.design_feasible;
    rep["mse_precheck_feasible"] = r.mse_feasible;
    rep["lambda0"] = r.lambda0;
    rep["lambda1"] = r.lambda1;
    rep["d01"] = r.d01;
    rep["d10"] = r.d10;
    rep["p_fa"] = r.p_fa;
    rep["p_md"] = r.p_md;
    rep["xi"] = r.xi;
    rep["rate"] = r.rate;
    rep["bs_power"] = r.bs_power;
    rep["posterior_mse"] = r.mse;
    if (scheme == Scheme::robust_d01 || scheme == Scheme::robust_d10 ||
        scheme == Scheme::nonrobust) {
      rep["dinkelbach_updates"] = r.dinkelbach_updates;
      rep["rank_ratio"] = r.rank_ratio;
      rep["used_randomization"] = r.used_randomization;
      rep["l_history"] = r.l_history;
    }
    if (report_json) *report_json = dup_string(rep.dump(2) + "\n");
    return r.design_feasible ? COVERTSIM_OK : COVERTSIM_E_INFEASIBLE;
  } catch (const ConfigError& e) {
    put_error(err, err_len, e.what());
    return COVERTSIM_E_CONFIG;
  } catch (const std::exception& e) {
    put_error(err, err_len, e.what());
    return COVERTSIM_E_SOLVER;
  }
}

}  // namespace

extern "C" {

const char* covertsim_version(void) { return "covertsim 1.0.0"; }

covertsim_status covertsim_scenario_default(covertsim_scenario** out) {
  if (!out) return COVERTSIM_E_ARGUMENT;
  try {
    *out = new covertsim_scenario{default_scenario()};
    return COVERTSIM_OK;
  } catch (...) {
    return COVERTSIM_E_CONFIG;
  }
}

covertsim_status covertsim_scenario_from_json(const char* json_text, covertsim_scenario** out,
                                              char* err, size_t err_len) {
  if (!out || !json_text) {
    put_error(err, err_len, "null argument");
    return COVERTSIM_E_ARGUMENT;
  }
  try {
    *out = new covertsim_scenario{parse_scenario_text(json_text)};
    return COVERTSIM_OK;
  } catch (const std::exception& e) {
    put_error(err, err_len, e.what());
    *out = nullptr;
    return COVERTSIM_E_CONFIG;
  }
}

covertsim_status covertsim_scenario_from_file(const char* path, covertsim_scenario** out,
                                              char* err, size_t err_len) {
  if (!out || !path) {
    put_error(err, err_len, "null argument");
    return COVERTSIM_E_ARGUMENT;
  }
  try {
    *out = new covertsim_scenario{parse_scenario_file(path)};
    return COVERTSIM_OK;
  } catch (const std::exception& e) {
    put_error(err, err_len, e.what());
    *out = nullptr;
    return COVERTSIM_E_CONFIG;
  }
}

void covertsim_scenario_free(covertsim_scenario* sc) { delete sc; }

covertsim_status covertsim_scenario_to_json(const covertsim_scenario* sc, char** out_text) {
  if (!sc || !out_text) return COVERTSIM_E_ARGUMENT;
  try {
    *out_text = dup_string(scenario_to_json(sc->cfg));
    return *out_text ? COVERTSIM_OK : COVERTSIM_E_IO;
  } catch (...) {
    return COVERTSIM_E_CONFIG;
  }
}

covertsim_status covertsim_scenario_set(covertsim_scenario* sc, const char* key_path,
                                        const char* json_value, char* err, size_t err_len) {
  if (!sc || !key_path || !json_value) {
    put_error(err, err_len, "null argument");
    return COVERTSIM_E_ARGUMENT;
  }
  try {
    json doc = json::parse(scenario_to_json(sc->cfg));
    json value = json::parse(json_value);

    json* node = &doc;
    std::string path(key_path);
    size_t pos = 0;
    while (true) {
      const size_t dot = path.find('.', pos);
      const std::string key = path.substr(pos, dot == std::string::npos ? dot : dot - pos);
      if (dot == std::string::npos) {
        (*node)[key] = value;
        break;
      }
      node = &(*node)[key];
      pos = dot + 1;
    }
    sc->cfg = parse_scenario_text(doc.dump());
    return COVERTSIM_OK;
  } catch (const std::exception& e) {
    put_error(err, err_len, e.what());
    return COVERTSIM_E_CONFIG;
  }
}

covertsim_status covertsim_run_track(const covertsim_scenario* sc, const char* out_dir,
                                     const char* format, char** summary_json, char* err,
                                     size_t err_len) {
  return run_study(sc, out_dir, format, summary_json, err, err_len, true);
}

covertsim_status covertsim_run_montecarlo(const covertsim_scenario* sc, const char* out_dir,
                                          const char* format, char** summary_json, char* err,
                                          size_t err_len) {
  return run_study(sc, out_dir, format, summary_json, err, err_len, false);
}

covertsim_status covertsim_run_design_perfect(const covertsim_scenario* sc,
                                              char** report_json, char* err, size_t err_len) {
  return run_single_design(sc, Scheme::perfect, report_json, err, err_len);
}

covertsim_status covertsim_run_design_robust(const covertsim_scenario* sc,
                                             char** report_json, char* err, size_t err_len) {
  if (!sc) {
    put_error(err, err_len, "null scenario handle");
    return COVERTSIM_E_ARGUMENT;
  }
  const Scheme scheme =
      sc->cfg.direction == CovertDirection::d10 ? Scheme::robust_d10 : Scheme::robust_d01;
  return run_single_design(sc, scheme, report_json, err, err_len);
}

covertsim_status covertsim_solver_selfcheck(int programs, uint64_t seed, char** report_json,
                                            char* err, size_t err_len) {
  if (programs < 1) {
    put_error(err, err_len, "programs must be >= 1");
    return COVERTSIM_E_ARGUMENT;
  }
  try {
    const SelfCheckResult r = run_solver_selfcheck(programs, seed);
    json rep;
    rep["programs"] = r.programs;
    rep["passed"] = r.passed;
    rep["max_objective_rel_err"] = r.max_obj_rel_err;
    rep["max_kkt_residual"] = r.max_kkt_residual;
    rep["worst_ms"] = r.worst_ms;
    rep["total_ms"] = r.total_ms;
    rep["failures"] = r.failures;
    if (report_json) *report_json = dup_string(rep.dump(2) + "\n");
    return r.ok() ? COVERTSIM_OK : COVERTSIM_E_SOLVER;
  } catch (const std::exception& e) {
    put_error(err, err_len, e.what());
    return COVERTSIM_E_SOLVER;
  }
}

void covertsim_string_free(char* text) { delete[] text; }

}  // extern "C"

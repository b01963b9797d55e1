// Experiment driver over the covertsim shared-library C API.

#include <covertsim.h>

#include <CLI11.hpp>

#include <cstdio>
#include <memory>
#include <string>
#include <vector>

namespace {

struct ScenarioHandle {
  covertsim_scenario* sc = nullptr;
  ~ScenarioHandle() { covertsim_scenario_free(sc); }
};

struct OwnedString {
  char* text = nullptr;
  ~OwnedString() { covertsim_string_free(text); }
};

int load_scenario(const std::string& config_path, ScenarioHandle& h) {
  char err[512] = {0};
  covertsim_status st;
  if (config_path.empty()) {
    st = covertsim_scenario_default(&h.sc);
  } else {
    st = covertsim_scenario_from_file(config_path.c_str(), &h.sc, err, sizeof err);
  }
  if (st != COVERTSIM_OK) std::fprintf(stderr, "error: %s\n", err[0] ? err : "bad scenario");
  return st;
}

int apply_sets(ScenarioHandle& h, const std::vector<std::string>& sets) {
  for (const auto& kv : sets) {
    const size_t eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "error: --set expects key.path=json, got '%s'\n", kv.c_str());
      return COVERTSIM_E_CONFIG;
    }
    char err[512] = {0};
    const covertsim_status st = covertsim_scenario_set(
        h.sc, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str(), err, sizeof err);
    if (st != COVERTSIM_OK) {
      std::fprintf(stderr, "error: %s\n", err);
      return st;
    }
  }
  return COVERTSIM_OK;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sensing-assisted covert communication workbench"};
  app.require_subcommand(1);

  std::string config_path, out_dir, format = "csv";
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::vector<std::string> sets;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "scenario configuration file (JSON)");
    cmd->add_option("--out", out_dir, "output directory for result files");
    cmd->add_option("--format", format, "output format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--seed", seed, "master seed override")->each([&](const std::string&) {
      seed_given = true;
    });
    cmd->add_option("--set", sets, "override a config key, e.g. covertness.epsilon=0.1");
  };

  auto* track = app.add_subcommand("track", "tracking study: per-slot MSE over runs");
  add_common(track);
  auto* dperf = app.add_subcommand("design-perfect", "one perfect-CSI design slot");
  add_common(dperf);
  auto* drob = app.add_subcommand("design-robust", "one robust design slot");
  add_common(drob);
  double eps = -1.0, o_radius = -1.0;
  std::string direction;
  drob->add_option("--eps", eps, "covertness threshold epsilon");
  drob->add_option("--o", o_radius, "normalized uncertainty radius for both links");
  drob->add_option("--direction", direction, "divergence direction: d01 or d10")
      ->check(CLI::IsMember({"d01", "d10"}));
  auto* mc = app.add_subcommand("montecarlo", "full Monte-Carlo study");
  add_common(mc);
  int runs = -1;
  mc->add_option("--runs", runs, "number of Monte-Carlo runs");
  auto* check = app.add_subcommand("solve-check", "conic solver self-tests");
  int programs = 200;
  std::uint64_t check_seed = 2024;
  check->add_option("--programs", programs, "number of random planted programs");
  check->add_option("--seed", check_seed, "generator seed");

  CLI11_PARSE(app, argc, argv);

  if (check->parsed()) {
    OwnedString report;
    char err[512] = {0};
    const covertsim_status st =
        covertsim_solver_selfcheck(programs, check_seed, &report.text, err, sizeof err);
    if (report.text) std::fputs(report.text, stdout);
    if (st != COVERTSIM_OK && err[0]) std::fprintf(stderr, "error: %s\n", err);
    return st;
  }

  ScenarioHandle h;
  if (int st = load_scenario(config_path, h); st != COVERTSIM_OK) return st;
  if (seed_given) {
    char err[512] = {0};
    if (covertsim_scenario_set(h.sc, "seed", std::to_string(seed).c_str(), err, sizeof err) !=
        COVERTSIM_OK) {
      std::fprintf(stderr, "error: %s\n", err);
      return COVERTSIM_E_CONFIG;
    }
  }
  if (int st = apply_sets(h, sets); st != COVERTSIM_OK) return st;
  if (mc->parsed() && runs > 0) {
    char err[512] = {0};
    if (covertsim_scenario_set(h.sc, "runs", std::to_string(runs).c_str(), err, sizeof err) !=
        COVERTSIM_OK) {
      std::fprintf(stderr, "error: %s\n", err);
      return COVERTSIM_E_CONFIG;
    }
  }
  if (drob->parsed()) {
    char err[512] = {0};
    if (eps >= 0.0 &&
        covertsim_scenario_set(h.sc, "covertness.epsilon", std::to_string(eps).c_str(), err,
                               sizeof err) != COVERTSIM_OK) {
      std::fprintf(stderr, "error: %s\n", err);
      return COVERTSIM_E_CONFIG;
    }
    if (o_radius >= 0.0) {
      const std::string v = std::to_string(o_radius);
      if (covertsim_scenario_set(h.sc, "csi.o_aw", v.c_str(), err, sizeof err) !=
              COVERTSIM_OK ||
          covertsim_scenario_set(h.sc, "csi.o_rw", v.c_str(), err, sizeof err) !=
              COVERTSIM_OK) {
        std::fprintf(stderr, "error: %s\n", err);
        return COVERTSIM_E_CONFIG;
      }
    }
    if (!direction.empty()) {
      const std::string v = "\"" + direction + "\"";
      if (covertsim_scenario_set(h.sc, "covertness.direction", v.c_str(), err, sizeof err) !=
          COVERTSIM_OK) {
        std::fprintf(stderr, "error: %s\n", err);
        return COVERTSIM_E_CONFIG;
      }
    }
  }

  char err[512] = {0};
  OwnedString out;
  covertsim_status st = COVERTSIM_OK;
  const char* dir = out_dir.empty() ? nullptr : out_dir.c_str();
  if (track->parsed()) {
    st = covertsim_run_track(h.sc, dir, format.c_str(), &out.text, err, sizeof err);
  } else if (mc->parsed()) {
    st = covertsim_run_montecarlo(h.sc, dir, format.c_str(), &out.text, err, sizeof err);
  } else if (dperf->parsed()) {
    st = covertsim_run_design_perfect(h.sc, &out.text, err, sizeof err);
  } else if (drob->parsed()) {
    st = covertsim_run_design_robust(h.sc, &out.text, err, sizeof err);
  }

  if (out.text) std::fputs(out.text, stdout);
  if (st != COVERTSIM_OK && err[0]) std::fprintf(stderr, "error: %s\n", err);
  return st;
}

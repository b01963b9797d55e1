#include "covertsim/results_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace covertsim {

using json = nlohmann::ordered_json;

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

namespace {

double rounded(double v) { return std::strtod(format_number(v).c_str(), nullptr); }

struct Metric {
  const char* name;
  double SlotRecord::* field;
};

constexpr Metric kMetrics[] = {
    {"mse", &SlotRecord::mse},   {"d01", &SlotRecord::d01},   {"d10", &SlotRecord::d10},
    {"pfa", &SlotRecord::p_fa},  {"pmd", &SlotRecord::p_md},  {"xi", &SlotRecord::xi},
    {"rate", &SlotRecord::rate}, {"power", &SlotRecord::bs_power},
};

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write output file: " + path);
  f << text;
  if (!f) throw std::runtime_error("write failed: " + path);
}

std::string table_csv(const SchemeAggregate& sa) {
  std::string out = "slot,mse,d01,d10,pfa,pmd,xi,rate,power\n";
  for (const auto& r : sa.slot_means) {
    out += std::to_string(r.slot);
    for (const auto& m : kMetrics) {
      out += ",";
      out += format_number(r.*m.field);
    }
    out += "\n";
  }
  return out;
}

json table_json(const SchemeAggregate& sa) {
  json rows = json::array();
  for (const auto& r : sa.slot_means) {
    json row;
    row["slot"] = r.slot;
    for (const auto& m : kMetrics) row[m.name] = rounded(r.*m.field);
    rows.push_back(row);
  }
  return rows;
}

std::string cdf_csv(std::vector<double> samples) {
  std::sort(samples.begin(), samples.end());
  std::string out = "value,probability\n";
  const double n = static_cast<double>(samples.size());
  for (size_t i = 0; i < samples.size(); ++i) {
    out += format_number(samples[i]);
    out += ",";
    out += format_number(static_cast<double>(i + 1) / n);
    out += "\n";
  }
  return out;
}

json cdf_json(std::vector<double> samples) {
  std::sort(samples.begin(), samples.end());
  json rows = json::array();
  const double n = static_cast<double>(samples.size());
  for (size_t i = 0; i < samples.size(); ++i) {
    json row;
    row["value"] = rounded(samples[i]);
    row["probability"] = rounded(static_cast<double>(i + 1) / n);
    rows.push_back(row);
  }
  return rows;
}

struct SummaryRow {
  std::string scheme;
  int runs, slots;
  double mean_mse, mean_d01, mean_d10, mean_pfa, mean_pmd, mean_xi, mean_rate, mean_power;
  double feasible_fraction, mse_precheck_fraction, rank1_fraction, randomization_fraction;
  double mean_dinkelbach_updates;
};

SummaryRow summarize(const SchemeAggregate& sa) {
  SummaryRow s{};
  s.scheme = to_string(sa.scheme);
  s.runs = sa.runs;
  s.slots = sa.slots;
  s.mean_mse = sa.mean(&SlotRecord::mse);
  s.mean_d01 = sa.mean(&SlotRecord::d01);
  s.mean_d10 = sa.mean(&SlotRecord::d10);
  s.mean_pfa = sa.mean(&SlotRecord::p_fa);
  s.mean_pmd = sa.mean(&SlotRecord::p_md);
  s.mean_xi = sa.mean(&SlotRecord::xi);
  s.mean_rate = sa.mean(&SlotRecord::rate);
  s.mean_power = sa.mean(&SlotRecord::bs_power);
  double feas = 0, pre = 0, rank1 = 0, rand = 0, dink = 0;
  for (const auto& r : sa.records) {
    feas += r.design_feasible ? 1.0 : 0.0;
    pre += r.mse_feasible ? 1.0 : 0.0;
    rank1 += (r.rank_ratio <= 1e-6) ? 1.0 : 0.0;
    rand += r.used_randomization ? 1.0 : 0.0;
    dink += r.dinkelbach_updates;
  }
  const double n = std::max<size_t>(sa.records.size(), 1);
  s.feasible_fraction = feas / n;
  s.mse_precheck_fraction = pre / n;
  s.rank1_fraction = rank1 / n;
  s.randomization_fraction = rand / n;
  s.mean_dinkelbach_updates = dink / n;
  return s;
}

}  // namespace

EmittedFiles emit_results(const AggregateResult& agg, const std::string& format,
                          const std::string& dir) {
  if (format != "csv" && format != "json")
    throw std::invalid_argument("format must be csv or json");
  std::filesystem::create_directories(dir);

  EmittedFiles out;
  auto emit = [&](const std::string& name, const std::string& text) {
    const std::string path = dir + "/" + name;
    write_file(path, text);
    out.paths.push_back(path);
  };

  for (const auto& sa : agg.schemes) {
    const std::string scheme = to_string(sa.scheme);
    if (format == "csv") {
      emit("metrics_" + scheme + ".csv", table_csv(sa));
    } else {
      emit("metrics_" + scheme + ".json", table_json(sa).dump(2) + "\n");
    }
    for (const auto& m : kMetrics) {
      const std::string base = std::string("cdf_") + m.name + "_" + scheme;
      if (format == "csv") {
        emit(base + ".csv", cdf_csv(sa.samples(m.field)));
      } else {
        emit(base + ".json", cdf_json(sa.samples(m.field)).dump(2) + "\n");
      }
    }
  }

  // summary across schemes
  if (format == "csv") {
    std::string text =
        "scheme,runs,slots,mean_mse,mean_d01,mean_d10,mean_pfa,mean_pmd,mean_xi,mean_rate,"
        "mean_power,feasible_fraction,mse_precheck_fraction,rank1_fraction,"
        "randomization_fraction,mean_dinkelbach_updates\n";
    for (const auto& sa : agg.schemes) {
      const SummaryRow s = summarize(sa);
      text += s.scheme;
      text += "," + std::to_string(s.runs) + "," + std::to_string(s.slots);
      for (double v : {s.mean_mse, s.mean_d01, s.mean_d10, s.mean_pfa, s.mean_pmd, s.mean_xi,
                       s.mean_rate, s.mean_power, s.feasible_fraction, s.mse_precheck_fraction,
                       s.rank1_fraction, s.randomization_fraction, s.mean_dinkelbach_updates})
        text += "," + format_number(v);
      text += "\n";
    }
    emit("summary.csv", text);
  } else {
    json rows = json::array();
    for (const auto& sa : agg.schemes) {
      const SummaryRow s = summarize(sa);
      json row;
      row["scheme"] = s.scheme;
      row["runs"] = s.runs;
      row["slots"] = s.slots;
      row["mean_mse"] = rounded(s.mean_mse);
      row["mean_d01"] = rounded(s.mean_d01);
      row["mean_d10"] = rounded(s.mean_d10);
      row["mean_pfa"] = rounded(s.mean_pfa);
      row["mean_pmd"] = rounded(s.mean_pmd);
      row["mean_xi"] = rounded(s.mean_xi);
      row["mean_rate"] = rounded(s.mean_rate);
      row["mean_power"] = rounded(s.mean_power);
      row["feasible_fraction"] = rounded(s.feasible_fraction);
      row["mse_precheck_fraction"] = rounded(s.mse_precheck_fraction);
      row["rank1_fraction"] = rounded(s.rank1_fraction);
      row["randomization_fraction"] = rounded(s.randomization_fraction);
      row["mean_dinkelbach_updates"] = rounded(s.mean_dinkelbach_updates);
      rows.push_back(row);
    }
    emit("summary.json", rows.dump(2) + "\n");
  }
  return out;
}

}  // namespace covertsim

#include "canon/report_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace canon {

namespace {

nlohmann::json number_array(const std::vector<double>& v) {
  nlohmann::json a = nlohmann::json::array();
  for (double x : v) a.push_back(json_number(x));
  return a;
}

std::string join_row(const std::vector<std::string>& cells) {
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ",";
    line += cells[i];
  }
  line += "\n";
  return line;
}

}  // namespace

nlohmann::json json_number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "NaN";
  return v > 0.0 ? "Infinity" : "-Infinity";
}

std::string csv_float(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string render_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

std::string render_csv(
    const std::vector<std::pair<std::string, std::string>>& preamble,
    const CsvTable& table) {
  std::string out;
  for (const auto& [k, v] : preamble) out += "# " + k + "=" + v + "\n";
  out += join_row(table.header);
  for (const auto& r : table.rows) out += join_row(r);
  return out;
}

std::vector<std::pair<std::string, std::string>> preamble_of(
    const nlohmann::json& config) {
  std::vector<std::pair<std::string, std::string>> out;
  for (auto it = config.begin(); it != config.end(); ++it) {
    const auto& v = it.value();
    out.emplace_back(it.key(),
                     v.is_string() ? v.get<std::string>() : v.dump());
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream ofs(path, std::ios::binary | std::ios::trunc);
  if (!ofs) fail(ErrorKind::IoError, "cannot open '" + path + "' for writing");
  ofs << text;
  ofs.flush();
  if (!ofs) fail(ErrorKind::IoError, "write to '" + path + "' failed");
}

nlohmann::json to_json(const ConditionalLaw& law) {
  nlohmann::json j;
  j["kind"] = law.kind == CondKind::Continuous ? "continuous" : "discrete";
  j["window"] = {{"h", json_number(law.window.h)},
                 {"delta", json_number(law.window.delta)}};
  j["method"] = law.method;
  j["mass_in_window"] = json_number(law.mass_in_window);
  if (law.n > 0) {
    j["n"] = law.n;
    j["beta_n"] = json_number(law.beta_n);
    j["mu_n"] = json_number(law.mu_n);
    j["scheme"] = law.scheme_name;
  }
  if (law.mc)
    j["mc"] = {{"samples", law.mc->samples},
               {"accepted", law.mc->accepted},
               {"seed", law.mc->seed}};
  if (law.kind == CondKind::Continuous) {
    j["edges"] = number_array(law.edges);
    j["mass"] = number_array(law.mass);
    if (!law.mass_se.empty()) j["mass_se"] = number_array(law.mass_se);
  } else {
    j["k"] = law.k;
    j["pos"] = number_array(law.pos);
    j["pk"] = number_array(law.pk);
    if (!law.pk_se.empty()) j["pk_se"] = number_array(law.pk_se);
  }
  j["mean"] = json_number(law.mean());
  j["variance"] = json_number(law.variance());
  return j;
}

CsvTable csv_table(const ConditionalLaw& law) {
  CsvTable t;
  const bool mc = law.mc.has_value();
  if (law.kind == CondKind::Continuous) {
    t.header = {"x", "density"};
    if (mc) t.header.push_back("stderr");
    for (std::size_t i = 0; i < law.mass.size(); ++i) {
      const double w = law.edges[i + 1] - law.edges[i];
      const double mid = 0.5 * (law.edges[i] + law.edges[i + 1]);
      std::vector<std::string> row = {csv_float(mid),
                                      csv_float(law.mass[i] / w)};
      if (mc) row.push_back(csv_float(law.mass_se[i] / w));
      t.rows.push_back(std::move(row));
    }
  } else {
    t.header = {"k", "x", "pmf"};
    if (mc) t.header.push_back("stderr");
    for (std::size_t i = 0; i < law.pk.size(); ++i) {
      std::vector<std::string> row = {std::to_string(law.k[i]),
                                      csv_float(law.pos[i]),
                                      csv_float(law.pk[i])};
      if (mc) row.push_back(csv_float(law.pk_se[i]));
      t.rows.push_back(std::move(row));
    }
  }
  return t;
}

nlohmann::json to_json(const ConvergenceReport& rep) {
  nlohmann::json j;
  j["name"] = rep.name;
  j["verdict"] = rep.verdict;
  j["fitted_slope"] = json_number(rep.fitted_slope);
  j["slope_stderr"] = json_number(rep.slope_stderr);
  j["r2"] = json_number(rep.r2);
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : rep.rows)
    rows.push_back({{"n", r.n},
                    {"metric", r.metric},
                    {"value", json_number(r.value)}});
  j["rows"] = rows;
  nlohmann::json summary;
  for (const auto& [k, v] : rep.summary) summary[k] = json_number(v);
  j["summary"] = summary.is_null() ? nlohmann::json::object() : summary;
  j["notes"] = rep.notes;
  nlohmann::json params;
  for (const auto& [k, v] : rep.spec.params) params[k] = json_number(v);
  j["spec"] = {{"name", rep.spec.name},
               {"n_grid", rep.spec.n_grid},
               {"seed", rep.spec.seed},
               {"params", params.is_null() ? nlohmann::json::object() : params},
               {"text", rep.spec.text}};
  return j;
}

CsvTable csv_table(const ConvergenceReport& rep) {
  CsvTable t;
  t.header = {"n", "metric", "value"};
  for (const auto& r : rep.rows)
    t.rows.push_back({std::to_string(r.n), r.metric, csv_float(r.value)});
  return t;
}

std::vector<std::pair<std::string, std::string>> report_preamble(
    const ConvergenceReport& rep) {
  std::vector<std::pair<std::string, std::string>> out;
  out.emplace_back("name", rep.name);
  out.emplace_back("verdict", rep.verdict);
  out.emplace_back("fitted_slope", csv_float(rep.fitted_slope));
  out.emplace_back("slope_stderr", csv_float(rep.slope_stderr));
  out.emplace_back("r2", csv_float(rep.r2));
  for (const auto& [k, v] : rep.summary)
    out.emplace_back("summary." + k, csv_float(v));
  for (std::size_t i = 0; i < rep.notes.size(); ++i)
    out.emplace_back("note." + std::to_string(i), rep.notes[i]);
  return out;
}

RateTable tabulate(const RateFunction& rf, double y_lo, double y_hi,
                   int points) {
  if (points < 2)
    fail(ErrorKind::BadConfig, "rate table needs at least 2 points");
  if (!(y_hi > y_lo))
    fail(ErrorKind::BadConfig, "rate table needs y_hi > y_lo");
  RateTable t;
  t.mean = rf.mean;
  t.variance = rf.variance;
  t.domain = rf.domain;
  for (int i = 0; i < points; ++i) {
    const double y = y_lo + (y_hi - y_lo) * i / double(points - 1);
    t.y.push_back(y);
    t.phi.push_back(rf.phi(y));
    t.dphi.push_back(rf.dphi(y));
    t.d2phi.push_back(rf.d2phi(y));
  }
  return t;
}

nlohmann::json to_json(const RateTable& t) {
  nlohmann::json j;
  j["mean"] = json_number(t.mean);
  j["variance"] = json_number(t.variance);
  j["domain"] = {{"lo", json_number(t.domain.first)},
                 {"hi", json_number(t.domain.second)}};
  j["y"] = number_array(t.y);
  j["phi"] = number_array(t.phi);
  j["dphi"] = number_array(t.dphi);
  j["d2phi"] = number_array(t.d2phi);
  return j;
}

CsvTable csv_table(const RateTable& t) {
  CsvTable tab;
  tab.header = {"y", "phi", "dphi", "d2phi"};
  for (std::size_t i = 0; i < t.y.size(); ++i)
    tab.rows.push_back({csv_float(t.y[i]), csv_float(t.phi[i]),
                        csv_float(t.dphi[i]), csv_float(t.d2phi[i])});
  return tab;
}

}  // namespace canon

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "canon/conditioning.hpp"
#include "canon/distribution.hpp"
#include "canon/divergence.hpp"
#include "canon/interval.hpp"
#include "canon/ldp.hpp"
#include "canon/scaling.hpp"
#include "canon/tilting.hpp"

namespace canon {

struct ExperimentSpec {
  std::string name;
  std::vector<int> n_grid;
  std::uint64_t seed = 1;
  std::map<std::string, double> params;
  std::map<std::string, std::string> text;

  double param(const std::string& key, double fallback) const;
  std::string text_param(const std::string& key,
                         const std::string& fallback) const;
  void validate() const;  // n_grid strictly increasing, length >= 4
};

struct MetricRow {
  int n = 0;
  std::string metric;
  double value = 0.0;
};

struct ConvergenceReport {
  std::string name;
  std::vector<MetricRow> rows;
  double fitted_slope = 0.0;
  double slope_stderr = 0.0;
  double r2 = 0.0;
  std::string verdict;  // "pass" or "fail"
  std::vector<std::string> notes;
  std::map<std::string, double> summary;
  ExperimentSpec spec;

  std::vector<std::pair<double, double>> metric_series(
      const std::string& metric) const;
};

struct FitResult {
  double slope = 0.0;
  double stderr_ = 0.0;
  double r2 = 0.0;
};

// Ordinary least squares of log(value) against log(x).
FitResult fit_loglog(const std::vector<std::pair<double, double>>& pts);

// Product-normal phase space with quadratic energies: subsystem dimension k,
// bath dimension m, energies scaled by beta = 1/m so the bath energy
// concentrates near 1.
struct PhaseSpaceModel {
  int k = 2;
  int m = 8;

  double beta() const { return 1.0 / double(m); }
  double e1(const std::vector<double>& u) const;
  double e2(const std::vector<double>& w) const;
  double energy(const std::vector<double>& v) const;  // e1 + e2, exact split
  ContPtr subsystem_energy() const;  // law of beta * |U|^2, U ~ N(0,I_k)
  ContPtr bath_energy() const;       // law of beta * |W|^2, W ~ N(0,I_m)
  double epsilon() const;            // E[X^2]^{1/2} of the subsystem energy
};

ConvergenceReport exp_poisson_rate(const ExperimentSpec& spec);
ConvergenceReport exp_gauss_temperature(const ExperimentSpec& spec);
ConvergenceReport exp_ldp_temperature(const ExperimentSpec& spec);
ConvergenceReport exp_gibbs_phase(const ExperimentSpec& spec);
ConvergenceReport exp_heatbath_invariance(const ExperimentSpec& spec);
ConvergenceReport exp_clt_error(const ExperimentSpec& spec);

ConvergenceReport run_experiment(const ExperimentSpec& spec);
const std::vector<std::string>& experiment_names();

}  // namespace canon

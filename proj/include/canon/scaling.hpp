#pragma once

#include <functional>
#include <string>

#include "canon/distribution.hpp"
#include "canon/errors.hpp"
#include "canon/interval.hpp"

namespace canon {

// Centering/scaling pair (mu_n, beta_n) mapping a sum H_n to the observation
// scale beta_n * (H_n - mu_n).  The conditioning window at stage n is
// E_n = mu_n + I / beta_n, i.e. [mu_n + h/beta_n, mu_n + (h+delta)/beta_n].
struct ScalingScheme {
  std::function<double(int)> beta;
  std::function<double(int)> mu;
  std::string name;

  double beta_at(int n) const;
  double mu_at(int n) const;
  Interval condition_window(int n, const Interval& I) const;

  // beta_n = 1/sqrt(n), mu_n = n*mean: the central-limit scale.
  static ScalingScheme gaussian(double mean_per_summand);
  // beta_n = 1/n, mu_n = 0: the large-deviation scale.
  static ScalingScheme large_deviation();
  // beta_n = 1, mu_n = 0.
  static ScalingScheme identity();
};

// Law of beta_n * (V - mu_n).
ContPtr standardize(const ContPtr& d, const ScalingScheme& s, int n);
DiscPtr standardize(const DiscPtr& d, const ScalingScheme& s, int n);

}  // namespace canon

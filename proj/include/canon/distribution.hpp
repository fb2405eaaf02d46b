#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "canon/errors.hpp"
#include "canon/interval.hpp"
#include "canon/rng.hpp"

namespace canon {

// Continuous law.  All values are immutable after construction; every method
// is const and safe to call concurrently.
class ContinuousDist {
 public:
  virtual ~ContinuousDist() = default;

  virtual double density(double x) const = 0;
  virtual double cdf(double x) const = 0;
  virtual bool has_density() const { return true; }
  // Atom mass at a point (0 for genuinely continuous laws; the degenerate
  // point-mass bath overrides).
  virtual double atom(double) const { return 0.0; }

  virtual double support_lower() const = 0;
  virtual double support_upper() const = 0;

  // Effective quadrature range: outside it the density is below 1e-16 of its
  // peak.  truncated_mass reports the probability discarded by that cut.
  virtual double trunc_lower() const = 0;
  virtual double trunc_upper() const = 0;
  virtual double truncated_mass() const;

  // Raw moment E[X^k], k in [0,4].
  virtual double moment(int k) const;
  double mean() const { return moment(1); }
  double variance() const;

  virtual double sample(RngStream& rng) const;  // default: cdf inversion

  // log E[e^{lambda X}] and its first two derivatives (tilted mean and
  // variance).  Defaults integrate numerically over the effective range;
  // families override with closed forms.
  virtual double log_mgf(double lambda) const;
  virtual double tilted_mean(double lambda) const;
  virtual double tilted_variance(double lambda) const;
  // Open finiteness domain of the MGF.
  virtual std::pair<double, double> mgf_domain() const;

  // Closed-form law proportional to density(x) * e^{-lambda x}, when the
  // family is closed under exponential reweighting; nullptr otherwise.
  virtual std::shared_ptr<const ContinuousDist> tilted_family(double) const {
    return nullptr;
  }

  virtual std::string family() const { return "generic"; }
  virtual std::string describe() const = 0;
};

using ContPtr = std::shared_ptr<const ContinuousDist>;

// Discrete law on a lattice of positions origin + spacing*k (irregular
// supports override position()).  Index-space support runs from kmin() and is
// enumerable up to kmax(), the truncation index for infinite supports.
class DiscreteDist {
 public:
  virtual ~DiscreteDist() = default;

  virtual double pmf(std::int64_t k) const = 0;
  virtual double cdf_index(std::int64_t k) const;  // P(K <= k)
  virtual std::int64_t kmin() const = 0;
  virtual std::int64_t kmax() const = 0;
  virtual double truncated_mass() const;
  bool in_support(std::int64_t k) const { return pmf(k) > 0.0; }

  virtual bool lattice() const { return true; }
  virtual double origin() const { return 0.0; }
  virtual double spacing() const { return 1.0; }
  virtual double position(std::int64_t k) const {
    return origin() + spacing() * k;
  }

  virtual double moment(int k) const;  // value-space raw moment
  double mean() const { return moment(1); }
  double variance() const;

  virtual std::int64_t sample_index(RngStream& rng) const;
  double sample(RngStream& rng) const { return position(sample_index(rng)); }

  virtual double log_mgf(double lambda) const;  // value space
  virtual double tilted_mean(double lambda) const;
  virtual double tilted_variance(double lambda) const;
  virtual std::pair<double, double> mgf_domain() const;

  // Closed-form law proportional to pmf(k) * e^{-lambda position(k)}, or
  // nullptr when no family closure applies.
  virtual std::shared_ptr<const DiscreteDist> tilted_family(double) const {
    return nullptr;
  }

  virtual std::string family() const { return "generic"; }
  virtual std::string describe() const = 0;
};

using DiscPtr = std::shared_ptr<const DiscreteDist>;

// Built-in families.
ContPtr make_uniform(double a, double b);
ContPtr make_exponential(double rate);
ContPtr make_gamma(double shape, double rate);
ContPtr make_normal(double mu, double sigma2);
ContPtr make_half_normal(double sigma);
// Density proportional to e^{slope*y} restricted to [a, b]; the constructed
// heat-bath law whose interval probabilities have exact exponential form.
ContPtr make_exp_window(double slope, double a, double b);
ContPtr make_point_mass(double c);
// Piecewise-polynomial density through (x, p) samples; p is renormalized and
// the factor is retrievable via tabulated_renorm_factor.
ContPtr make_tabulated_density(std::vector<double> xs, std::vector<double> ps,
                               bool cubic = false);
double tabulated_renorm_factor(const ContinuousDist& d);
// Two-column CSV with header "x,p".
ContPtr load_table_csv(const std::string& path);

DiscPtr make_poisson(double mean);
DiscPtr make_binomial(std::int64_t n, double p);
// pmf on lattice positions origin + spacing*k, k = 0..masses.size()-1;
// masses are renormalized.
DiscPtr make_tabulated_pmf(std::vector<double> masses, double origin = 0.0,
                           double spacing = 1.0);

// Affine images a.k.a. standardized laws: value = scale*base + shift.
ContPtr affine_of(ContPtr base, double scale, double shift);
DiscPtr affine_of(DiscPtr base, double scale, double shift);

// P(V in I), closed interval.
double interval_prob(const ContinuousDist& d, const Interval& I);
double interval_prob(const DiscreteDist& d, const Interval& I);

// d/dy log P(V in [y, y+delta]) at y = I.h: the exact density ratio
// (f(h+delta)-f(h))/P(V in I) when a density exists, otherwise a central
// finite difference of log interval_prob with step min(delta,1e-4)*1e-2.
double log_interval_prob_slope(const ContinuousDist& d, const Interval& I);

// Law of the sum of m i.i.d. copies; closed-form family results where they
// exist, numeric convolution (m <= 64) otherwise.
ContPtr sum_law(const ContPtr& d, int m);
DiscPtr sum_law(const DiscPtr& d, int m);

// Deterministic sampling: count draws from the stream seeded with seed.
std::vector<double> sample(const ContinuousDist& d, std::size_t count,
                           std::uint64_t seed);
std::vector<double> sample(const DiscreteDist& d, std::size_t count,
                           std::uint64_t seed);

// Monotone cdf inversion on the effective range.
double quantile(const ContinuousDist& d, double p);
std::int64_t quantile_index(const DiscreteDist& d, double p);

// Shared helpers.
double normal_cdf(double z);            // standard normal
double normal_density(double z);

}  // namespace canon

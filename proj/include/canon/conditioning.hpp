#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "canon/distribution.hpp"
#include "canon/interval.hpp"
#include "canon/scaling.hpp"
#include "canon/tilting.hpp"

namespace canon {

enum class CondKind { Continuous, Discrete };

struct McMeta {
  std::uint64_t samples = 0;
  std::uint64_t accepted = 0;
  std::uint64_t seed = 0;
};

// Law of X given X+Y in a window. Exact laws carry a normalized density
// callable plus an adaptive cell grid; Monte Carlo laws carry the histogram.
struct ConditionalLaw {
  CondKind kind = CondKind::Continuous;
  Interval window{0.0, 1.0};
  std::string method;  // "bayes-exact" or "mc-rejection"
  double mass_in_window = 0.0;

  // continuous representation
  std::function<double(double)> dens;  // absent for mc-rejection
  std::vector<double> edges;           // cell edges, size cells()+1
  std::vector<double> mass;            // per-cell probability, sums to 1
  std::vector<double> mass_se;         // per-cell standard error (mc only)

  // discrete representation, indices k.front()..k.back() contiguous
  std::vector<std::int64_t> k;
  std::vector<double> pk;
  std::vector<double> pk_se;  // mc only
  std::vector<double> pos;    // value-space positions of k

  std::optional<McMeta> mc;
  int n = 0;  // finite-n provenance, 0 when not applicable
  double beta_n = 0.0, mu_n = 0.0;
  std::string scheme_name;

  std::size_t cells() const { return mass.size(); }
  double density(double x) const;
  double pmf_at(std::int64_t kk) const;
  double cdf(double x) const;
  double total_mass() const;
  double mean() const;
  double variance() const;
};

using BathGivenX = std::function<double(double, const Interval&)>;
using JointSampler = std::function<std::pair<double, double>(RngStream&)>;

ConditionalLaw condition_exact(const ContPtr& x, const ContPtr& y,
                               const Interval& I);
ConditionalLaw condition_exact(const DiscPtr& x, const DiscPtr& y,
                               const Interval& I);

ConditionalLaw condition_exact_dependent(const ContPtr& x,
                                         const BathGivenX& bath_given_x,
                                         const Interval& I);

ConditionalLaw condition_mc(const ContPtr& x, const ContPtr& y,
                            const Interval& I, std::uint64_t samples,
                            std::uint64_t seed);
ConditionalLaw condition_mc(const ContPtr& x_marginal,
                            const JointSampler& joint, const Interval& I,
                            std::uint64_t samples, std::uint64_t seed);
ConditionalLaw condition_mc(const DiscPtr& x, const DiscPtr& y,
                            const Interval& I, std::uint64_t samples,
                            std::uint64_t seed);

ConditionalLaw finite_n_conditional(const ContPtr& x,
                                    const std::function<ContPtr(int)>& bath_family,
                                    const ScalingScheme& scheme,
                                    const Interval& I, int n);
ConditionalLaw finite_n_conditional(const DiscPtr& x,
                                    const std::function<DiscPtr(int)>& bath_family,
                                    const ScalingScheme& scheme,
                                    const Interval& I, int n);

ContPtr canonical_approx(const ContPtr& x, const TiltParam& p);
DiscPtr canonical_approx(const DiscPtr& x, const TiltParam& p);
ContPtr canonical_approx(const ContPtr& x, const TiltField& f);
DiscPtr canonical_approx(const DiscPtr& x, const TiltField& f);

// Thread cap honoring CANON_TILT_THREADS, at least 1.
unsigned worker_count(unsigned tasks);

}  // namespace canon

#pragma once

#include "canon/conditioning.hpp"
#include "canon/distribution.hpp"

namespace canon {

// Distances between a pair of laws. Infinite KL is carried as +inf so
// sweeps can report failures instead of aborting.
struct DivergenceReport {
  double kl = 0.0;
  double tv = 0.0;
  bool has_sup = false;
  double sup_dist = 0.0;
  double pinsker_bound = 0.0;  // sqrt(kl/2)
  double scale = 1.0;
  double scaled_kl = 0.0;
};

double kl(const ContinuousDist& p, const ContinuousDist& q);
double kl(const DiscreteDist& p, const DiscreteDist& q);
double kl(const ConditionalLaw& p, const ContinuousDist& q);
double kl(const ContinuousDist& p, const ConditionalLaw& q);
double kl(const ConditionalLaw& p, const DiscreteDist& q);
double kl(const DiscreteDist& p, const ConditionalLaw& q);
double kl(const ConditionalLaw& p, const ConditionalLaw& q);

double total_variation(const ContinuousDist& p, const ContinuousDist& q);
double total_variation(const DiscreteDist& p, const DiscreteDist& q);
double total_variation(const ConditionalLaw& p, const ContinuousDist& q);
double total_variation(const ContinuousDist& p, const ConditionalLaw& q);
double total_variation(const ConditionalLaw& p, const DiscreteDist& q);
double total_variation(const DiscreteDist& p, const ConditionalLaw& q);
double total_variation(const ConditionalLaw& p, const ConditionalLaw& q);

double sup_distance(const DiscreteDist& p, const DiscreteDist& q);
double sup_distance(const ConditionalLaw& p, const DiscreteDist& q);
double sup_distance(const DiscreteDist& p, const ConditionalLaw& q);
double sup_distance(const ConditionalLaw& p, const ConditionalLaw& q);

DivergenceReport scaled_divergence(const ContinuousDist& p,
                                   const ContinuousDist& q, double scale);
DivergenceReport scaled_divergence(const DiscreteDist& p,
                                   const DiscreteDist& q, double scale);
DivergenceReport scaled_divergence(const ConditionalLaw& p,
                                   const ContinuousDist& q, double scale);
DivergenceReport scaled_divergence(const ContinuousDist& p,
                                   const ConditionalLaw& q, double scale);
DivergenceReport scaled_divergence(const ConditionalLaw& p,
                                   const DiscreteDist& q, double scale);
DivergenceReport scaled_divergence(const DiscreteDist& p,
                                   const ConditionalLaw& q, double scale);
DivergenceReport scaled_divergence(const ConditionalLaw& p,
                                   const ConditionalLaw& q, double scale);

}  // namespace canon

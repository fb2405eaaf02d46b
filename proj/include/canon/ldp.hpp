#pragma once

#include <functional>
#include <utility>

#include "canon/distribution.hpp"
#include "canon/interval.hpp"
#include "canon/tilting.hpp"

namespace canon {

// Cramér machinery for one summand law: A(lambda), its Legendre conjugate
// phi(y) = sup_lambda [y*lambda - A(lambda)], and derivative evaluators.
// phi returns +inf outside the open domain (a boundary supremum, not an
// error). dphi(y) is the maximizing lambda.
struct RateFunction {
  std::function<double(double)> logmgf;  // A
  std::function<double(double)> aprime;  // A'
  std::function<double(double)> phi;
  std::function<double(double)> dphi;
  std::function<double(double)> d2phi;
  double mean = 0.0;
  double variance = 0.0;
  std::pair<double, double> domain{0.0, 0.0};         // open (y-, y+)
  std::pair<double, double> lambda_domain{0.0, 0.0};  // open MGF domain
};

struct MaxEntSolution {
  double lambda = 0.0;           // weight convention e^{+lambda x}
  double constraint_mean = 0.0;  // alpha
  double c_lambda = 1.0;         // normalizer of e^{lambda x} f(x)
  double residual = 0.0;
};

struct ReciprocityResidual {
  double r1 = 0.0;  // |A'(phi'(y)) - y|
  double r2 = 0.0;  // |phi'(A'(lambda)) - lambda| at lambda = phi'(y)
};

double log_mgf(const ContinuousDist& d, double lambda);
double log_mgf(const DiscreteDist& d, double lambda);

RateFunction rate_function(const ContPtr& d);
RateFunction rate_function(const DiscPtr& d);

// User-supplied rate function (e.g. an exactly linear phi); only the fields
// passed here are populated.
RateFunction rate_function_from(std::function<double(double)> phi,
                                std::function<double(double)> dphi,
                                double mean,
                                std::pair<double, double> domain);

ReciprocityResidual reciprocity_check(const RateFunction& rf, double y);

TiltParam ldp_tilt_param(const RateFunction& rf, const Interval& I);

MaxEntSolution maxent_lambda(const ContPtr& d, double alpha);
MaxEntSolution maxent_lambda(const DiscPtr& d, double alpha);

double maxent_ldp_equivalence(const ContPtr& d, const Interval& I);
double maxent_ldp_equivalence(const DiscPtr& d, const Interval& I);

}  // namespace canon

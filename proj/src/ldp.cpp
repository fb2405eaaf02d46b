#include "canon/ldp.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace canon {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

template <class D>
void check_domain(const D& d, double lambda) {
  auto [lo, hi] = d.mgf_domain();
  if (!(lambda > lo) || !(lambda < hi))
    fail(ErrorKind::DivergentMGF,
         "lambda=" + std::to_string(lambda) +
             " outside the finiteness domain (" + std::to_string(lo) + ", " +
             std::to_string(hi) + ") of " + d.describe());
}

// Solves A'(lambda) = y for the strictly increasing tilted-mean map.
// Returns NaN when y cannot be bracketed inside the open domain (y at or
// beyond the reachable hull), which callers map to a +inf supremum.
template <class D>
double solve_aprime(const D& d, double y) {
  auto [lo, hi] = d.mgf_domain();
  double mean = d.tilted_mean(0.0);
  double tol = 1e-12 * std::max(1.0, std::abs(y));
  if (std::abs(y - mean) <= tol) return 0.0;
  bool up = y > mean;
  double a = 0.0, b = kNan, cand = 0.0;
  double bound = up ? hi : lo;
  for (int j = 0; j < 200; ++j) {
    // Double away from zero so the bracket stays within a factor of two of
    // the root; creep up on a finite domain edge instead of jumping there,
    // since the edge may be astronomically far away.
    double next = up ? std::max(1.0, 2.0 * cand + 1.0)
                     : std::min(-1.0, 2.0 * cand - 1.0);
    if (std::isfinite(bound) && (up ? next >= bound : next <= bound))
      next = bound - 0.5 * (bound - cand);
    cand = next;
    double fc = d.tilted_mean(cand);
    if (!std::isfinite(fc) || (up ? fc >= y : fc <= y)) {
      b = cand;
      break;
    }
    a = cand;
  }
  if (!std::isfinite(b)) return kNan;
  double nlo = std::min(a, b), nhi = std::max(a, b);
  double x = 0.5 * (nlo + nhi);
  for (int it = 0; it < 64; ++it) {
    double f = d.tilted_mean(x) - y;
    if (std::isfinite(f)) {
      if (std::abs(f) <= tol) return x;
      if (f > 0.0)
        nhi = x;
      else
        nlo = x;
      double fp = d.tilted_variance(x);
      double xn = fp > 0.0 ? x - f / fp : kNan;
      if (!std::isfinite(xn) || !(xn > nlo) || !(xn < nhi))
        xn = 0.5 * (nlo + nhi);
      x = xn;
    } else {
      // stepped into numeric overflow territory; retreat toward zero
      nhi = up ? x : nhi;
      nlo = up ? nlo : x;
      x = 0.5 * (nlo + nhi);
    }
  }
  return x;
}

template <class D>
RateFunction build_rate_function(std::shared_ptr<const D> d,
                                 std::pair<double, double> hull) {
  auto [llo, lhi] = d->mgf_domain();
  if (!(llo < 0.0) || !(lhi > 0.0))
    fail(ErrorKind::DivergentMGF,
         "MGF of " + d->describe() + " is not finite around 0");
  RateFunction rf;
  rf.mean = d->mean();
  rf.variance = d->variance();
  rf.domain = hull;
  rf.lambda_domain = {llo, lhi};
  rf.logmgf = [d](double lam) { return canon::log_mgf(*d, lam); };
  rf.aprime = [d](double lam) {
    check_domain(*d, lam);
    return d->tilted_mean(lam);
  };
  auto hull_lo = hull.first, hull_hi = hull.second;
  rf.phi = [d, hull_lo, hull_hi](double y) {
    if (!(y > hull_lo) || !(y < hull_hi)) return kInf;
    double lam = solve_aprime(*d, y);
    if (!std::isfinite(lam)) return kInf;
    double v = y * lam - d->log_mgf(lam);
    if (v < 0.0 && v > -1e-10) v = 0.0;
    return v;
  };
  rf.dphi = [d, hull_lo, hull_hi](double y) {
    if (!(y > hull_lo) || !(y < hull_hi)) return kNan;
    return solve_aprime(*d, y);
  };
  rf.d2phi = [d, hull_lo, hull_hi](double y) {
    if (!(y > hull_lo) || !(y < hull_hi)) return kNan;
    double lam = solve_aprime(*d, y);
    if (!std::isfinite(lam)) return kNan;
    double av = d->tilted_variance(lam);
    return av > 0.0 ? 1.0 / av : kInf;
  };
  return rf;
}

template <class D>
MaxEntSolution solve_maxent(std::shared_ptr<const D> d, double alpha,
                            std::pair<double, double> hull) {
  if (!(alpha > hull.first) || !(alpha < hull.second))
    fail(ErrorKind::InfeasibleMean,
         "constraint mean " + std::to_string(alpha) +
             " outside the support hull (" + std::to_string(hull.first) +
             ", " + std::to_string(hull.second) + ") of " + d->describe());
  double lam = solve_aprime(*d, alpha);
  if (!std::isfinite(lam))
    fail(ErrorKind::InfeasibleMean,
         "constraint mean " + std::to_string(alpha) +
             " is not attained by any finite tilt of " + d->describe());
  MaxEntSolution s;
  s.lambda = lam;
  s.constraint_mean = alpha;
  s.c_lambda = std::exp(d->log_mgf(lam));
  s.residual = std::abs(d->tilted_mean(lam) - alpha);
  return s;
}

double pick_ystar(const RateFunction& rf, const Interval& I) {
  if (!(I.left() > rf.domain.first) || !(I.right() < rf.domain.second))
    fail(ErrorKind::BadConfig,
         "window " + I.describe() + " is not inside the rate domain (" +
             std::to_string(rf.domain.first) + ", " +
             std::to_string(rf.domain.second) + ")");
  // strict interior means are rejected; a mean on the boundary degenerates
  // to lambda = 0
  if (rf.mean > I.left() && rf.mean < I.right())
    fail(ErrorKind::MeanInsideWindow,
         "mean " + std::to_string(rf.mean) + " lies inside " + I.describe());
  return rf.mean <= I.left() ? I.left() : I.right();
}

}  // namespace

double log_mgf(const ContinuousDist& d, double lambda) {
  check_domain(d, lambda);
  return d.log_mgf(lambda);
}

double log_mgf(const DiscreteDist& d, double lambda) {
  check_domain(d, lambda);
  return d.log_mgf(lambda);
}

RateFunction rate_function(const ContPtr& d) {
  if (!d) fail(ErrorKind::BadConfig, "rate_function needs a law");
  return build_rate_function<ContinuousDist>(
      d, {d->support_lower(), d->support_upper()});
}

RateFunction rate_function(const DiscPtr& d) {
  if (!d) fail(ErrorKind::BadConfig, "rate_function needs a law");
  return build_rate_function<DiscreteDist>(
      d, {d->position(d->kmin()), d->position(d->kmax())});
}

RateFunction rate_function_from(std::function<double(double)> phi,
                                std::function<double(double)> dphi,
                                double mean,
                                std::pair<double, double> domain) {
  RateFunction rf;
  rf.phi = std::move(phi);
  rf.dphi = std::move(dphi);
  rf.mean = mean;
  rf.domain = domain;
  return rf;
}

ReciprocityResidual reciprocity_check(const RateFunction& rf, double y) {
  if (!rf.dphi || !rf.aprime)
    fail(ErrorKind::BadConfig, "rate function lacks derivative evaluators");
  double lam = rf.dphi(y);
  double yback = rf.aprime(lam);
  ReciprocityResidual r;
  r.r1 = std::abs(yback - y);
  r.r2 = std::abs(rf.dphi(yback) - lam);
  return r;
}

TiltParam ldp_tilt_param(const RateFunction& rf, const Interval& I) {
  if (!rf.dphi)
    fail(ErrorKind::BadConfig, "rate function lacks a derivative evaluator");
  double ystar = pick_ystar(rf, I);
  double lam = -rf.dphi(ystar);
  if (!std::isfinite(lam))
    fail(ErrorKind::BadConfig,
         "rate derivative not finite at y*=" + std::to_string(ystar));
  TiltParam p;
  p.lambda = lam;
  p.provenance = TiltRoute::RateFunction;
  p.window = I;
  p.scale = 1.0;
  p.note = "ystar=" + std::to_string(ystar);
  return p;
}

MaxEntSolution maxent_lambda(const ContPtr& d, double alpha) {
  if (!d) fail(ErrorKind::BadConfig, "maxent_lambda needs a law");
  return solve_maxent<ContinuousDist>(
      d, alpha, {d->support_lower(), d->support_upper()});
}

MaxEntSolution maxent_lambda(const DiscPtr& d, double alpha) {
  if (!d) fail(ErrorKind::BadConfig, "maxent_lambda needs a law");
  return solve_maxent<DiscreteDist>(
      d, alpha, {d->position(d->kmin()), d->position(d->kmax())});
}

double maxent_ldp_equivalence(const ContPtr& d, const Interval& I) {
  RateFunction rf = rate_function(d);
  TiltParam tp = ldp_tilt_param(rf, I);
  MaxEntSolution me = maxent_lambda(d, pick_ystar(rf, I));
  return std::abs(me.lambda + tp.lambda);
}

double maxent_ldp_equivalence(const DiscPtr& d, const Interval& I) {
  RateFunction rf = rate_function(d);
  TiltParam tp = ldp_tilt_param(rf, I);
  MaxEntSolution me = maxent_lambda(d, pick_ystar(rf, I));
  return std::abs(me.lambda + tp.lambda);
}

}  // namespace canon

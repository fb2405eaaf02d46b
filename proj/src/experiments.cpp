#include "canon/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>
#include <type_traits>

namespace canon {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

const char* verdict_of(bool ok) { return ok ? "pass" : "fail"; }

// 1/lambda, with the zero-tilt case reported as infinite temperature.
double temperature_of(double lambda) {
  return lambda == 0.0 ? std::numeric_limits<double>::infinity()
                       : 1.0 / lambda;
}

// Runs fn(grid[i], per-index seed) across the worker pool.  Results land in
// grid order; the lowest-index failure is rethrown.
template <class F>
auto sweep(const std::vector<int>& grid, std::uint64_t seed, F&& fn) {
  using R = std::invoke_result_t<F&, int, std::uint64_t>;
  std::vector<R> out(grid.size());
  std::vector<std::exception_ptr> errs(grid.size());
  const unsigned workers = worker_count(static_cast<unsigned>(grid.size()));
  std::atomic<std::size_t> next{0};
  auto body = [&] {
    for (std::size_t i = next++; i < grid.size(); i = next++) {
      try {
        out[i] = fn(grid[i], derive_seed(seed, static_cast<std::uint64_t>(i)));
      } catch (...) {
        errs[i] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    body();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
  return out;
}

double sum_sq(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

}  // namespace

double ExperimentSpec::param(const std::string& key, double fallback) const {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

std::string ExperimentSpec::text_param(const std::string& key,
                                       const std::string& fallback) const {
  auto it = text.find(key);
  return it == text.end() ? fallback : it->second;
}

void ExperimentSpec::validate() const {
  if (n_grid.size() < 4)
    fail(ErrorKind::BadConfig, "experiment grid needs at least 4 points, got " +
                                   std::to_string(n_grid.size()));
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] < 1)
      fail(ErrorKind::BadConfig,
           "grid entries must be >= 1, got " + std::to_string(n_grid[i]));
    if (i > 0 && n_grid[i] <= n_grid[i - 1])
      fail(ErrorKind::BadConfig, "grid must be strictly increasing");
  }
}

std::vector<std::pair<double, double>> ConvergenceReport::metric_series(
    const std::string& metric) const {
  std::vector<std::pair<double, double>> out;
  for (const auto& r : rows)
    if (r.metric == metric) out.emplace_back(double(r.n), r.value);
  return out;
}

FitResult fit_loglog(const std::vector<std::pair<double, double>>& pts) {
  if (pts.size() < 4)
    fail(ErrorKind::BadConfig, "log-log fit needs at least 4 points, got " +
                                   std::to_string(pts.size()));
  std::vector<double> xs, ys;
  xs.reserve(pts.size());
  ys.reserve(pts.size());
  for (const auto& [x, v] : pts) {
    if (!std::isfinite(x) || !std::isfinite(v) || !(x > 0.0) || !(v > 0.0))
      fail(ErrorKind::NonPositiveValue,
           "log-log fit needs positive finite points, got (" + fmt(x) + ", " +
               fmt(v) + ")");
    xs.push_back(std::log(x));
    ys.push_back(std::log(v));
  }
  const double n = double(xs.size());
  double xbar = 0.0, ybar = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    xbar += xs[i];
    ybar += ys[i];
  }
  xbar /= n;
  ybar /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - xbar) * (xs[i] - xbar);
    sxy += (xs[i] - xbar) * (ys[i] - ybar);
  }
  if (!(sxx > 0.0))
    fail(ErrorKind::BadConfig, "log-log fit needs distinct x values");
  FitResult r;
  r.slope = sxy / sxx;
  const double intercept = ybar - r.slope * xbar;
  double ssres = 0.0, sstot = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - (intercept + r.slope * xs[i]);
    ssres += e * e;
    sstot += (ys[i] - ybar) * (ys[i] - ybar);
  }
  r.stderr_ = xs.size() > 2 ? std::sqrt(ssres / (n - 2.0) / sxx) : 0.0;
  // a constant series is fit exactly by its own level, so report a clean 1
  r.r2 = sstot > 1e-300 ? 1.0 - ssres / sstot : 1.0;
  return r;
}

double PhaseSpaceModel::e1(const std::vector<double>& u) const {
  if (static_cast<int>(u.size()) != k)
    fail(ErrorKind::BadConfig,
         "subsystem coordinate has dimension " + std::to_string(u.size()) +
             ", expected " + std::to_string(k));
  return beta() * sum_sq(u);
}

double PhaseSpaceModel::e2(const std::vector<double>& w) const {
  if (static_cast<int>(w.size()) != m)
    fail(ErrorKind::BadConfig,
         "bath coordinate has dimension " + std::to_string(w.size()) +
             ", expected " + std::to_string(m));
  return beta() * sum_sq(w);
}

double PhaseSpaceModel::energy(const std::vector<double>& v) const {
  if (static_cast<int>(v.size()) != k + m)
    fail(ErrorKind::BadConfig,
         "full coordinate has dimension " + std::to_string(v.size()) +
             ", expected " + std::to_string(k + m));
  return beta() * sum_sq(v);
}

ContPtr PhaseSpaceModel::subsystem_energy() const {
  if (k < 1 || m < 1) fail(ErrorKind::BadConfig, "dimensions must be >= 1");
  // beta * chi^2(k)
  return make_gamma(0.5 * k, 0.5 * m);
}

ContPtr PhaseSpaceModel::bath_energy() const {
  if (k < 1 || m < 1) fail(ErrorKind::BadConfig, "dimensions must be >= 1");
  return make_gamma(0.5 * m, 0.5 * m);
}

double PhaseSpaceModel::epsilon() const {
  return std::sqrt(double(k) * (double(k) + 2.0)) / double(m);
}

ConvergenceReport exp_poisson_rate(const ExperimentSpec& spec_in) {
  ExperimentSpec spec = spec_in;
  if (spec.name.empty()) spec.name = "exp_poisson_rate";
  if (spec.n_grid.empty()) spec.n_grid = {64, 256, 1024, 4096};
  spec.validate();
  const double lambda = spec.param("lambda", 1.0);
  const double mu = spec.param("bath_mean", 1.0);
  const double slope_lo = spec.param("slope_lo", -0.65);
  const double slope_hi = spec.param("slope_hi", -0.35);
  if (!(lambda > 0.0) || !(mu > 0.0))
    fail(ErrorKind::BadConfig, "poisson means must be positive");
  const Interval I(spec.param("h", -1.0), spec.param("delta", 0.2));
  if (!(I.right() <= 0.0))
    fail(ErrorKind::HypothesisViolated,
         "window " + I.describe() + " must sit at or below the bath mean");

  // limiting fluctuation law of the standardized bath sum
  const double sigma2 = mu;
  const ContPtr fluct = make_normal(0.0, sigma2);
  const double psi = log_interval_prob_slope(*fluct, I);
  const double ratio = 2.0 * I.delta / sigma2;
  if (!(ratio < psi))
    fail(ErrorKind::HypothesisViolated, "2*delta/sigma^2 = " + fmt(ratio) +
                                            " must stay below the slope " +
                                            fmt(psi));

  const ScalingScheme scheme = ScalingScheme::gaussian(mu);
  const DiscPtr x = make_poisson(lambda);
  const auto bath_family = [mu](int m) { return make_poisson((m + 1) * mu); };

  struct Point {
    double sup = 0.0, klv = 0.0, bn = 0.0;
  };
  const auto points = sweep(spec.n_grid, spec.seed, [&](int n, std::uint64_t) {
    const ConditionalLaw cond =
        finite_n_conditional(x, bath_family, scheme, I, n);
    const TiltParam p = bath_slope_param(*fluct, I, scheme.beta_at(n));
    const DiscPtr can = canonical_approx(x, p);
    Point pt;
    pt.sup = sup_distance(cond, *can);
    pt.klv = scaled_divergence(cond, *can, 1.0).kl;
    pt.bn = tilt_normalizer(*can);
    return pt;
  });

  ConvergenceReport rep;
  rep.name = spec.name;
  rep.spec = spec;
  std::vector<double> sups;
  for (std::size_t i = 0; i < spec.n_grid.size(); ++i) {
    const int n = spec.n_grid[i];
    rep.rows.push_back({n, "sup_dist", points[i].sup});
    rep.rows.push_back({n, "kl", points[i].klv});
    rep.rows.push_back({n, "normalizer", points[i].bn});
    sups.push_back(points[i].sup);
  }
  const FitResult fit = fit_loglog(rep.metric_series("sup_dist"));
  rep.fitted_slope = fit.slope;
  rep.slope_stderr = fit.stderr_;
  rep.r2 = fit.r2;
  rep.verdict =
      verdict_of(strictly_decreasing(sups) && fit.slope >= slope_lo &&
                 fit.slope <= slope_hi);
  const double lam_last =
      psi * scheme.beta_at(spec.n_grid.back());
  rep.summary = {{"psi", psi},
                 {"hypothesis_ratio", ratio},
                 {"slope_lo", slope_lo},
                 {"slope_hi", slope_hi},
                 {"temperature_at_largest_n", temperature_of(lam_last)}};
  rep.notes = {
      "per-summand exponent is psi * beta_n with psi the interval-probability "
      "slope of the limiting bath fluctuation law",
      "sup_dist compares the exact conditional pmf with the tilted pmf, both "
      "normalized over the conditional's index range"};
  return rep;
}

ConvergenceReport exp_gauss_temperature(const ExperimentSpec& spec_in) {
  ExperimentSpec spec = spec_in;
  if (spec.name.empty()) spec.name = "exp_gauss_temperature";
  if (spec.n_grid.empty()) spec.n_grid = {25, 100, 400, 1600};
  spec.validate();
  const double rate = spec.param("rate", 1.0);
  if (!(rate > 0.0)) fail(ErrorKind::BadConfig, "rate must be positive");
  const Interval I(spec.param("h", -1.0), spec.param("delta", 0.5));
  const Interval I0(spec.param("zabell_h", -0.25),
                    spec.param("zabell_delta", 0.5));
  const double fac_hi = spec.param("psi_factor_hi", 1.25);
  const double fac_lo = spec.param("psi_factor_lo", 0.75);
  const int dominate_from = int(spec.param("dominate_from", 100));

  const double mean = 1.0 / rate;
  const double sigma2 = 1.0 / (rate * rate);
  const ContPtr x = make_exponential(rate);
  const ContPtr fluct = make_normal(0.0, sigma2);
  const double psi = log_interval_prob_slope(*fluct, I);
  const ScalingScheme scheme = ScalingScheme::gaussian(mean);
  const auto bath_family = [rate](int m) {
    return m == 0 ? make_point_mass(0.0) : make_gamma(double(m), rate);
  };

  struct Point {
    double correct = 0.0, hi = 0.0, lo = 0.0, zab = 0.0;
  };
  const auto points = sweep(spec.n_grid, spec.seed, [&](int n, std::uint64_t) {
    const ConditionalLaw cond =
        finite_n_conditional(x, bath_family, scheme, I, n);
    const double beta = scheme.beta_at(n);
    auto scaled_kl_for = [&](double fac) {
      const ContPtr can = tilt(x, psi * fac * beta);
      return scaled_divergence(*can, cond, double(n)).scaled_kl;
    };
    Point pt;
    pt.correct = scaled_kl_for(1.0);
    pt.hi = scaled_kl_for(fac_hi);
    pt.lo = scaled_kl_for(fac_lo);
    const ConditionalLaw cond0 =
        finite_n_conditional(x, bath_family, scheme, I0, n);
    pt.zab = kl(*x, cond0);
    return pt;
  });

  ConvergenceReport rep;
  rep.name = spec.name;
  rep.spec = spec;
  std::vector<double> correct, hi;
  for (std::size_t i = 0; i < spec.n_grid.size(); ++i) {
    const int n = spec.n_grid[i];
    rep.rows.push_back({n, "n_kl_correct", points[i].correct});
    rep.rows.push_back({n, "n_kl_hi", points[i].hi});
    rep.rows.push_back({n, "n_kl_lo", points[i].lo});
    rep.rows.push_back({n, "kl_zabell", points[i].zab});
    correct.push_back(points[i].correct);
    hi.push_back(points[i].hi);
  }
  const FitResult fit = fit_loglog(rep.metric_series("n_kl_correct"));
  rep.fitted_slope = fit.slope;
  rep.slope_stderr = fit.stderr_;
  rep.r2 = fit.r2;
  bool dominated = true;
  for (std::size_t i = 0; i < spec.n_grid.size(); ++i)
    if (spec.n_grid[i] >= dominate_from && !(hi[i] > correct[i]))
      dominated = false;
  // both mistuned curves must clear the correct one at the largest n
  const double dom_factor = spec.param("dominate_factor", 2.0);
  const bool final_gap =
      hi.back() > dom_factor * correct.back() &&
      points.back().lo > dom_factor * correct.back();
  rep.verdict =
      verdict_of(strictly_decreasing(correct) && dominated && final_gap);
  const double lam_last = psi * scheme.beta_at(spec.n_grid.back());
  rep.summary = {{"psi", psi},
                 {"mean", mean},
                 {"sigma2", sigma2},
                 {"dominate_from", double(dominate_from)},
                 {"dominate_factor", dom_factor},
                 {"temperature_at_largest_n", temperature_of(lam_last)}};
  rep.notes = {
      "the asymptotic remainder conditions are not computable at fixed n; the "
      "run validates the conclusions instead: n * KL(canonical, conditional) "
      "decays for the matched slope and a mistuned slope strictly dominates "
      "from n >= " +
          std::to_string(dominate_from) + " on",
      "kl_zabell tracks KL(marginal, conditional) for a window containing the "
      "fluctuation mean, where no tilt is needed"};
  return rep;
}

ConvergenceReport exp_ldp_temperature(const ExperimentSpec& spec_in) {
  ExperimentSpec spec = spec_in;
  if (spec.name.empty()) spec.name = "exp_ldp_temperature";
  if (spec.n_grid.empty()) spec.n_grid = {25, 50, 100, 200};
  spec.validate();
  const double rate = spec.param("rate", 1.0);
  if (!(rate > 0.0)) fail(ErrorKind::BadConfig, "rate must be positive");
  const Interval I(spec.param("h", 0.4), spec.param("delta", 0.1));
  const double mis_factor = spec.param("mis_factor", 0.5);
  const double tol_final = spec.param("tol_final", 1e-2);
  const double ratio_min = spec.param("ratio_min", 5.0);

  const ContPtr x = make_exponential(rate);
  const RateFunction rf = rate_function(x);
  const TiltParam tp = ldp_tilt_param(rf, I);
  const double equiv = maxent_ldp_equivalence(x, I);
  const ContPtr can_correct = canonical_approx(x, tp);
  const ContPtr can_mis = tilt(x, tp.lambda * mis_factor);
  const ScalingScheme scheme = ScalingScheme::large_deviation();
  const auto bath_family = [rate](int m) {
    return m == 0 ? make_point_mass(0.0) : make_gamma(double(m), rate);
  };

  struct Point {
    double correct = 0.0, mis = 0.0;
  };
  const auto points = sweep(spec.n_grid, spec.seed, [&](int n, std::uint64_t) {
    const ConditionalLaw cond =
        finite_n_conditional(x, bath_family, scheme, I, n);
    Point pt;
    pt.correct = scaled_divergence(*can_correct, cond, 1.0).kl;
    pt.mis = scaled_divergence(*can_mis, cond, 1.0).kl;
    return pt;
  });

  ConvergenceReport rep;
  rep.name = spec.name;
  rep.spec = spec;
  std::vector<double> correct, mis;
  for (std::size_t i = 0; i < spec.n_grid.size(); ++i) {
    const int n = spec.n_grid[i];
    rep.rows.push_back({n, "kl_correct", points[i].correct});
    rep.rows.push_back({n, "kl_mis", points[i].mis});
    correct.push_back(points[i].correct);
    mis.push_back(points[i].mis);
  }
  const FitResult fit = fit_loglog(rep.metric_series("kl_correct"));
  rep.fitted_slope = fit.slope;
  rep.slope_stderr = fit.stderr_;
  rep.r2 = fit.r2;
  const bool ok = strictly_decreasing(correct) && correct.back() < tol_final &&
                  mis.back() >= ratio_min * correct.back();
  rep.verdict = verdict_of(ok);
  const double ystar = x->mean() <= I.left() ? I.left() : I.right();
  rep.summary = {{"lambda", tp.lambda},
                 {"temperature", temperature_of(tp.lambda)},
                 {"ystar", ystar},
                 {"equivalence_residual", equiv},
                 {"final_ratio", mis.back() / correct.back()},
                 {"tol_final", tol_final}};
  rep.notes = {
      "validates the large-deviation conclusion directly: KL to the "
      "rate-function tilt falls below tol_final while the mistuned "
      "temperature stalls",
      "the max-entropy route agrees with the rate-function route up to "
      "equivalence_residual"};
  return rep;
}

ConvergenceReport exp_gibbs_phase(const ExperimentSpec& spec_in) {
  ExperimentSpec spec = spec_in;
  if (spec.name.empty()) spec.name = "exp_gibbs_phase";
  if (spec.n_grid.empty()) spec.n_grid = {8, 16, 32, 64};
  spec.validate();
  const int k = int(spec.param("k", 2.0));
  if (k < 1) fail(ErrorKind::BadConfig, "subsystem dimension must be >= 1");
  const Interval I(spec.param("h", 0.55), spec.param("delta", 0.10));
  const int sets = int(spec.param("sets", 50.0));
  if (sets < 2) fail(ErrorKind::BadConfig, "need at least 2 probe sets");
  const double set_lo = spec.param("set_lo", 0.02);
  const double set_hi = spec.param("set_hi", 0.98);
  const double slope_min = spec.param("slope_min", 0.8);
  const double prior_alpha = spec.param("prior_alpha", 0.5);
  const double prior_delta = spec.param("prior_delta", 1e-3);
  const int prior_m = int(spec.param("prior_m", 16.0));
  const double prior_tol = spec.param("prior_tol", 1e-3);

  struct Point {
    double err = 0.0, eps = 0.0, psi = 0.0, klv = 0.0;
  };
  const auto points = sweep(spec.n_grid, spec.seed, [&](int m, std::uint64_t) {
    const PhaseSpaceModel model{k, m};
    const ContPtr xs = model.subsystem_energy();
    const ContPtr bath = model.bath_energy();
    Point pt;
    pt.psi = log_interval_prob_slope(*bath, I);
    pt.eps = model.epsilon();
    const ConditionalLaw cond = condition_exact(xs, bath, I);
    const ContPtr can = tilt(xs, pt.psi);
    for (int j = 0; j < sets; ++j) {
      const double pj = set_lo + (set_hi - set_lo) * j / double(sets - 1);
      const double qj = quantile(*xs, pj);
      pt.err = std::max(pt.err, std::abs(cond.cdf(qj) - can->cdf(qj)));
    }
    pt.klv = scaled_divergence(cond, *can, 1.0).kl;
    return pt;
  });

  // prior irrelevance: retilting both subsystem and bath by the same
  // exponent must land on the same canonical law, up to the window width
  const PhaseSpaceModel pm{k, prior_m};
  const ContPtr xp = pm.subsystem_energy();
  const ContPtr bp = pm.bath_energy();
  const Interval Ip(I.h, prior_delta);
  const ContPtr can_a = tilt(xp, log_interval_prob_slope(*bp, Ip));
  const ContPtr xb = tilt(xp, prior_alpha);
  const ContPtr bb = tilt(bp, prior_alpha);
  const ContPtr can_b = tilt(xb, log_interval_prob_slope(*bb, Ip));
  double prior_sup = 0.0;
  const double scan_hi = std::max(can_a->trunc_upper(), can_b->trunc_upper());
  for (int i = 0; i <= 2000; ++i) {
    const double t = scan_hi * i / 2000.0;
    prior_sup =
        std::max(prior_sup, std::abs(can_a->density(t) - can_b->density(t)));
  }

  ConvergenceReport rep;
  rep.name = spec.name;
  rep.spec = spec;
  std::vector<double> errs;
  std::vector<std::pair<double, double>> eps_err;
  for (std::size_t i = 0; i < spec.n_grid.size(); ++i) {
    const int m = spec.n_grid[i];
    rep.rows.push_back({m, "sup_sets", points[i].err});
    rep.rows.push_back({m, "epsilon", points[i].eps});
    rep.rows.push_back({m, "psi", points[i].psi});
    rep.rows.push_back({m, "kl", points[i].klv});
    errs.push_back(points[i].err);
    eps_err.emplace_back(points[i].eps, points[i].err);
  }
  const FitResult fit = fit_loglog(eps_err);
  rep.fitted_slope = fit.slope;
  rep.slope_stderr = fit.stderr_;
  rep.r2 = fit.r2;
  const bool ok = strictly_decreasing(errs) && fit.slope >= slope_min &&
                  prior_sup < prior_tol;
  rep.verdict = verdict_of(ok);
  rep.summary = {{"prior_sup_diff", prior_sup},
                 {"slope_min", slope_min},
                 {"k", double(k)},
                 {"prior_alpha", prior_alpha}};
  rep.notes = {
      "sup_sets is the largest cdf gap between the exact conditional energy "
      "law and its tilted approximation over lower-set probes; the fit reads "
      "its order in epsilon = E[X^2]^{1/2}",
      "prior_sup_diff probes prior irrelevance: retilting subsystem and bath "
      "together leaves the canonical law unchanged up to the window width"};
  return rep;
}

ConvergenceReport exp_heatbath_invariance(const ExperimentSpec& spec_in) {
  ExperimentSpec spec = spec_in;
  if (spec.name.empty()) spec.name = "exp_heatbath_invariance";
  if (spec.n_grid.empty()) {
    spec.n_grid.resize(20);
    std::iota(spec.n_grid.begin(), spec.n_grid.end(), 1);
  }
  spec.validate();
  const double slope0 = spec.param("slope", 2.0);
  const double h0 = spec.param("h", -1.0);
  const double d0 = spec.param("delta", 1.0);
  const double dp = spec.param("window_delta", 0.1);
  const double ch = spec.param("contrast_h", -2.0);
  const double cd = spec.param("contrast_delta", 1.0);
  const double lh = spec.param("ldp_h", 0.4);
  const double lspan = spec.param("ldp_span", 0.2);
  const double ldp_dp = spec.param("ldp_delta", 0.02);
  const double lin_dphi = spec.param("linear_dphi", -2.0);
  const double lin_mean = spec.param("linear_mean", 5.0);
  const double flat_tol = spec.param("flat_tol", 1e-8);
  const double contrast_min = spec.param("contrast_min", 0.1);
  const double lin_tol = spec.param("linear_tol", 1e-10);
  const double cramer_min = spec.param("cramer_min", 0.05);
  if (!(dp > 0.0) || !(dp < d0) || !(dp < cd) || !(ldp_dp > 0.0) ||
      !(ldp_dp < lspan))
    fail(ErrorKind::BadConfig, "probe windows must fit inside their spans");

  const ContPtr bath_exp = make_exp_window(slope0, h0, h0 + d0);
  const ContPtr bath_norm = make_normal(0.0, 1.0);
  const RateFunction rf_lin = rate_function_from(
      [lin_dphi, lin_mean](double y) { return lin_dphi * (y - lin_mean); },
      [lin_dphi](double) { return lin_dphi; }, lin_mean,
      {spec.param("linear_dom_lo", 0.0), spec.param("linear_dom_hi", 10.0)});
  const RateFunction rf_exp =
      rate_function(make_exponential(spec.param("cramer_rate", 1.0)));

  RngStream r_exp(derive_seed(spec.seed, 0));
  RngStream r_norm(derive_seed(spec.seed, 1));
  RngStream r_ldp(derive_seed(spec.seed, 2));

  ConvergenceReport rep;
  rep.name = spec.name;
  rep.spec = spec;
  std::vector<double> pe, pn, vl, vc;
  for (std::size_t i = 0; i < spec.n_grid.size(); ++i) {
    const int id = spec.n_grid[i];
    const double a = r_exp.uniform(h0, h0 + d0 - dp);
    pe.push_back(log_interval_prob_slope(*bath_exp, Interval(a, dp)));
    const double b = r_norm.uniform(ch, ch + cd - dp);
    pn.push_back(log_interval_prob_slope(*bath_norm, Interval(b, dp)));
    const double c = r_ldp.uniform(lh, lh + lspan - ldp_dp);
    vl.push_back(ldp_tilt_param(rf_lin, Interval(c, ldp_dp)).lambda);
    vc.push_back(ldp_tilt_param(rf_exp, Interval(c, ldp_dp)).lambda);
    rep.rows.push_back({id, "psi_expform", pe.back()});
    rep.rows.push_back({id, "psi_normal", pn.back()});
    rep.rows.push_back({id, "varphi_linear", vl.back()});
    rep.rows.push_back({id, "varphi_cramer", vc.back()});
  }
  auto spread = [](const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi - *lo;
  };
  const double s_exp = spread(pe);
  const double s_norm = spread(pn);
  const double s_lin = spread(vl);
  const double s_cramer = spread(vc);

  const FitResult fit = fit_loglog(rep.metric_series("psi_expform"));
  rep.fitted_slope = fit.slope;
  rep.slope_stderr = fit.stderr_;
  rep.r2 = fit.r2;
  const bool ok = s_exp < flat_tol && s_norm > contrast_min &&
                  s_lin < lin_tol && s_cramer > cramer_min;
  rep.verdict = verdict_of(ok);
  rep.summary = {{"spread_exp_form", s_exp},
                 {"spread_normal", s_norm},
                 {"spread_linear_phi", s_lin},
                 {"spread_cramer", s_cramer}};
  rep.notes = {
      "a bath with exponential-form interval probabilities yields one "
      "window-independent slope; the curved normal bath must move",
      "a linear rate function yields one window-independent temperature; the "
      "curved exponential rate function must move"};
  return rep;
}

ConvergenceReport exp_clt_error(const ExperimentSpec& spec_in) {
  ExperimentSpec spec = spec_in;
  if (spec.name.empty()) spec.name = "exp_clt_error";
  if (spec.n_grid.empty()) spec.n_grid = {16, 64, 256, 1024};
  spec.validate();
  const std::string family = spec.text_param("family", "exponential");
  const int zpts = int(spec.param("z_points", 200.0));
  const double zmax = spec.param("z_max", 6.0);
  if (zpts < 2 || !(zmax > 0.0))
    fail(ErrorKind::BadConfig, "need z_points >= 2 and z_max > 0");

  double mu1 = 0.0, sd1 = 0.0;
  if (family == "exponential") {
    const double rate = spec.param("rate", 1.0);
    if (!(rate > 0.0)) fail(ErrorKind::BadConfig, "rate must be positive");
    mu1 = 1.0 / rate;
    sd1 = 1.0 / rate;
  } else if (family == "poisson") {
    const double lam = spec.param("lambda", 1.0);
    if (!(lam > 0.0)) fail(ErrorKind::BadConfig, "lambda must be positive");
    mu1 = lam;
    sd1 = std::sqrt(lam);
  } else if (family == "normal") {
    mu1 = spec.param("mu", 0.0);
    sd1 = std::sqrt(spec.param("sigma2", 1.0));
  } else {
    fail(ErrorKind::BadConfig,
         "unknown family '" + family + "' (exponential, poisson, normal)");
  }

  const auto errs = sweep(spec.n_grid, spec.seed, [&](int n, std::uint64_t) {
    double err = 0.0;
    auto zat = [&](int i) { return -zmax + 2.0 * zmax * i / double(zpts - 1); };
    if (family == "poisson") {
      const DiscPtr s = sum_law(make_poisson(spec.param("lambda", 1.0)), n);
      for (int i = 0; i < zpts; ++i) {
        const double z = zat(i);
        const double xv = n * mu1 + z * std::sqrt(double(n)) * sd1;
        const std::int64_t kid = std::int64_t(std::floor(xv));
        const double f = kid < s->kmin()
                             ? 0.0
                             : s->cdf_index(std::min(kid, s->kmax()));
        err = std::max(err, std::abs(f - normal_cdf(z)));
      }
    } else {
      const ContPtr base = family == "exponential"
                               ? make_exponential(spec.param("rate", 1.0))
                               : make_normal(spec.param("mu", 0.0),
                                             spec.param("sigma2", 1.0));
      const ContPtr s = sum_law(base, n);
      for (int i = 0; i < zpts; ++i) {
        const double z = zat(i);
        const double xv = n * mu1 + z * std::sqrt(double(n)) * sd1;
        err = std::max(err, std::abs(s->cdf(xv) - normal_cdf(z)));
      }
    }
    return err;
  });

  ConvergenceReport rep;
  rep.name = spec.name;
  rep.spec = spec;
  double max_err = 0.0;
  for (std::size_t i = 0; i < spec.n_grid.size(); ++i) {
    rep.rows.push_back({spec.n_grid[i], "sup_cdf_err", errs[i]});
    max_err = std::max(max_err, errs[i]);
  }
  const bool all_positive =
      std::all_of(errs.begin(), errs.end(), [](double e) { return e > 0.0; });
  if (all_positive) {
    const FitResult fit = fit_loglog(rep.metric_series("sup_cdf_err"));
    rep.fitted_slope = fit.slope;
    rep.slope_stderr = fit.stderr_;
    rep.r2 = fit.r2;
  } else {
    rep.fitted_slope = 0.0;
    rep.slope_stderr = 0.0;
    rep.r2 = 1.0;
    rep.notes.push_back(
        "distances sit at the floating-point floor; no decay fit");
  }
  bool ok;
  if (family == "normal") {
    ok = max_err <= spec.param("exact_tol", 1e-12);
  } else {
    const double lo =
        spec.param("slope_lo", family == "exponential" ? -0.65 : -0.7);
    const double hi =
        spec.param("slope_hi", family == "exponential" ? -0.35 : -0.3);
    ok = all_positive && rep.fitted_slope >= lo && rep.fitted_slope <= hi;
    rep.summary["slope_lo"] = lo;
    rep.summary["slope_hi"] = hi;
  }
  rep.verdict = verdict_of(ok);
  rep.summary["max_err"] = max_err;
  rep.summary["z_points"] = double(zpts);
  rep.summary["z_max"] = zmax;
  rep.notes.push_back(
      "sup_cdf_err is the largest gap between the standardized sum cdf and "
      "the normal limit over the z probe grid");
  return rep;
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {
      "exp_poisson_rate",  "exp_gauss_temperature",   "exp_ldp_temperature",
      "exp_gibbs_phase",   "exp_heatbath_invariance", "exp_clt_error"};
  return names;
}

ConvergenceReport run_experiment(const ExperimentSpec& spec) {
  if (spec.name == "exp_poisson_rate") return exp_poisson_rate(spec);
  if (spec.name == "exp_gauss_temperature") return exp_gauss_temperature(spec);
  if (spec.name == "exp_ldp_temperature") return exp_ldp_temperature(spec);
  if (spec.name == "exp_gibbs_phase") return exp_gibbs_phase(spec);
  if (spec.name == "exp_heatbath_invariance")
    return exp_heatbath_invariance(spec);
  if (spec.name == "exp_clt_error") return exp_clt_error(spec);
  std::string all;
  for (const auto& n : experiment_names()) {
    if (!all.empty()) all += ", ";
    all += n;
  }
  fail(ErrorKind::BadConfig,
       "unknown experiment '" + spec.name + "'; available: " + all);
}

}  // namespace canon

#include "canon/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "canon/quadrature.hpp"
#include "canon/scaling.hpp"

namespace canon {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kHuge = 1e308;
// Density threshold for the effective range: 1e-16 of the peak.
const double kTruncLog = -std::log(1e-16);
const double kTruncZ = std::sqrt(-2.0 * std::log(1e-16));

std::string fmt(const char* f, ...) {
  char buf[256];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return std::string(buf);
}

double lgam(double x) { return boost::math::lgamma(x); }

double log_normal_cdf_std(double t) {
  if (t > -8.0) return std::log(0.5 * std::erfc(-t / std::sqrt(2.0)));
  // Mills asymptotics for the deep lower tail.
  double t2 = t * t;
  return -0.5 * t2 - std::log(-t * std::sqrt(2.0 * M_PI)) +
         std::log1p(-1.0 / t2 + 3.0 / (t2 * t2));
}

double mills_ratio_inv(double t) {
  // phi(t)/Phi(t)
  if (t > -8.0) return normal_density(t) / (0.5 * std::erfc(-t / std::sqrt(2.0)));
  double t2 = t * t;
  return -t / (1.0 - 1.0 / t2 + 3.0 / (t2 * t2));
}

// log integral_a^b e^{t x} dx, stable for any t.
double window_log_integral(double t, double a, double b) {
  double u = t * (b - a);
  if (std::abs(u) < 1e-8) {
    return std::log(b - a) + 0.5 * u + u * u / 24.0;
  }
  if (t > 0.0) return t * b + std::log1p(-std::exp(-u)) - std::log(t);
  return t * a + std::log1p(-std::exp(u)) - std::log(-t);
}

// Mean of the density proportional to e^{t x} on [a, b]:
// (b e^u - a) / (e^u - 1) - 1/t with u = t(b-a).
double window_tilted_mean(double t, double a, double b) {
  double u = t * (b - a);
  if (std::abs(u) < 1e-6) return 0.5 * (a + b) + t * (b - a) * (b - a) / 12.0;
  if (u > 500.0) return b - 1.0 / t;
  if (u < -500.0) return a - 1.0 / t;
  return (b * std::exp(u) - a) / std::expm1(u) - 1.0 / t;
}

// Variance of the same window law: 1/t^2 - w^2 e^u / (e^u - 1)^2, which is
// symmetric in u.
double window_tilted_var(double t, double a, double b) {
  double w = b - a;
  double u = t * w;
  if (std::abs(u) < 1e-3) return w * w / 12.0 - u * u * w * w / 240.0;
  if (std::abs(u) > 500.0) return 1.0 / (t * t);
  double em = std::expm1(std::abs(u));
  double ratio = std::exp(std::abs(u)) / (em * em);
  return 1.0 / (t * t) - w * w * ratio;
}

struct Tab {
  // Per-segment cubic y + b t + c t^2 + d t^3, t = x - xs[i].
  std::vector<double> xs, y, b, c, d, F;  // F: cdf at nodes
};

void build_linear(Tab& t) {
  std::size_t n = t.xs.size() - 1;
  t.b.resize(n);
  t.c.assign(n, 0.0);
  t.d.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    t.b[i] = (t.y[i + 1] - t.y[i]) / (t.xs[i + 1] - t.xs[i]);
}

void build_spline(Tab& t) {
  std::size_t n = t.xs.size() - 1;
  std::vector<double> h(n), m(t.xs.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) h[i] = t.xs[i + 1] - t.xs[i];
  if (n >= 2) {
    std::vector<double> diag(n - 1), rhs(n - 1), sub(n - 1), sup(n - 1);
    for (std::size_t i = 1; i < n; ++i) {
      diag[i - 1] = 2.0 * (h[i - 1] + h[i]);
      rhs[i - 1] = 6.0 * ((t.y[i + 1] - t.y[i]) / h[i] -
                          (t.y[i] - t.y[i - 1]) / h[i - 1]);
      sub[i - 1] = h[i - 1];
      sup[i - 1] = h[i];
    }
    for (std::size_t i = 1; i < n - 1; ++i) {
      double w = sub[i] / diag[i - 1];
      diag[i] -= w * sup[i - 1];
      rhs[i] -= w * rhs[i - 1];
    }
    m[n - 1] = rhs[n - 2] / diag[n - 2];
    for (std::size_t i = n - 2; i >= 1; --i)
      m[i] = (rhs[i - 1] - sup[i - 1] * m[i + 1]) / diag[i - 1];
  }
  t.b.resize(n);
  t.c.resize(n);
  t.d.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    t.b[i] = (t.y[i + 1] - t.y[i]) / h[i] - h[i] * (2.0 * m[i] + m[i + 1]) / 6.0;
    t.c[i] = 0.5 * m[i];
    t.d[i] = (m[i + 1] - m[i]) / (6.0 * h[i]);
  }
}

void build_cdf(Tab& t) {
  std::size_t n = t.xs.size() - 1;
  t.F.assign(t.xs.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double h = t.xs[i + 1] - t.xs[i];
    double seg = h * (t.y[i] + h * (t.b[i] / 2.0 +
                                    h * (t.c[i] / 3.0 + h * t.d[i] / 4.0)));
    t.F[i + 1] = t.F[i] + seg;
  }
}

std::size_t segment_of(const Tab& t, double x) {
  auto it = std::upper_bound(t.xs.begin(), t.xs.end(), x);
  std::size_t i = (it == t.xs.begin()) ? 0 : (it - t.xs.begin() - 1);
  return std::min(i, t.xs.size() - 2);
}

double tab_density(const Tab& t, double x) {
  if (x < t.xs.front() || x > t.xs.back()) return 0.0;
  std::size_t i = segment_of(t, x);
  double u = x - t.xs[i];
  double v = t.y[i] + u * (t.b[i] + u * (t.c[i] + u * t.d[i]));
  return v > 0.0 ? v : 0.0;
}

double tab_cdf(const Tab& t, double x) {
  if (x <= t.xs.front()) return 0.0;
  if (x >= t.xs.back()) return 1.0;
  std::size_t i = segment_of(t, x);
  double u = x - t.xs[i];
  double part = u * (t.y[i] + u * (t.b[i] / 2.0 +
                                   u * (t.c[i] / 3.0 + u * t.d[i] / 4.0)));
  double v = t.F[i] + part;
  return std::clamp(v, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Families

class UniformDist final : public ContinuousDist {
 public:
  UniformDist(double a, double b) : a_(a), b_(b) {
    if (!std::isfinite(a) || !std::isfinite(b) || !(b > a))
      fail(ErrorKind::BadConfig, "uniform needs finite a < b");
  }
  double density(double x) const override {
    return (x >= a_ && x <= b_) ? 1.0 / (b_ - a_) : 0.0;
  }
  double cdf(double x) const override {
    if (x <= a_) return 0.0;
    if (x >= b_) return 1.0;
    return (x - a_) / (b_ - a_);
  }
  double support_lower() const override { return a_; }
  double support_upper() const override { return b_; }
  double trunc_lower() const override { return a_; }
  double trunc_upper() const override { return b_; }
  double truncated_mass() const override { return 0.0; }
  double moment(int k) const override {
    if (k < 0 || k > 4) fail(ErrorKind::BadConfig, "moment order must be 0..4");
    // E[X^k] = (1/(k+1)) sum_{j=0}^{k} a^j b^{k-j}
    double s = 0.0;
    for (int j = 0; j <= k; ++j) s += std::pow(a_, j) * std::pow(b_, k - j);
    return s / (k + 1);
  }
  double sample(RngStream& rng) const override { return rng.uniform(a_, b_); }
  double log_mgf(double lam) const override {
    return window_log_integral(lam, a_, b_) - std::log(b_ - a_);
  }
  double tilted_mean(double lam) const override {
    return window_tilted_mean(lam, a_, b_);
  }
  double tilted_variance(double lam) const override {
    return window_tilted_var(lam, a_, b_);
  }
  std::pair<double, double> mgf_domain() const override {
    return {-kHuge, kHuge};
  }
  ContPtr tilted_family(double lam) const override {
    if (std::abs(lam) * (b_ - a_) > 600.0) return nullptr;
    return make_exp_window(-lam, a_, b_);
  }
  std::string family() const override { return "uniform"; }
  std::string describe() const override {
    return fmt("uniform(a=%g, b=%g)", a_, b_);
  }
  double a_, b_;
};

class ExponentialDist final : public ContinuousDist {
 public:
  explicit ExponentialDist(double rate) : rate_(rate) {
    if (!(rate > 0.0) || !std::isfinite(rate))
      fail(ErrorKind::BadConfig, "exponential rate must be positive");
  }
  double density(double x) const override {
    return x >= 0.0 ? rate_ * std::exp(-rate_ * x) : 0.0;
  }
  double cdf(double x) const override {
    return x > 0.0 ? -std::expm1(-rate_ * x) : 0.0;
  }
  double support_lower() const override { return 0.0; }
  double support_upper() const override { return kInf; }
  double trunc_lower() const override { return 0.0; }
  double trunc_upper() const override { return kTruncLog / rate_; }
  double moment(int k) const override {
    if (k < 0 || k > 4) fail(ErrorKind::BadConfig, "moment order must be 0..4");
    double m = 1.0;
    for (int j = 1; j <= k; ++j) m *= j / rate_;
    return m;
  }
  double sample(RngStream& rng) const override {
    return rng.exponential(rate_);
  }
  double log_mgf(double lam) const override {
    if (lam >= rate_)
      fail(ErrorKind::DivergentMGF,
           fmt("exponential MGF diverges at lambda >= %g", rate_));
    return -std::log1p(-lam / rate_);
  }
  double tilted_mean(double lam) const override { return 1.0 / (rate_ - lam); }
  double tilted_variance(double lam) const override {
    return 1.0 / ((rate_ - lam) * (rate_ - lam));
  }
  std::pair<double, double> mgf_domain() const override {
    return {-kHuge, rate_};
  }
  ContPtr tilted_family(double lam) const override {
    return rate_ + lam > 0.0 ? make_exponential(rate_ + lam) : nullptr;
  }
  std::string family() const override { return "exponential"; }
  std::string describe() const override {
    return fmt("exponential(rate=%g)", rate_);
  }
  double rate_;
};

class GammaDist final : public ContinuousDist {
 public:
  GammaDist(double shape, double rate) : shape_(shape), rate_(rate) {
    if (!(shape > 0.0) || !(rate > 0.0) || !std::isfinite(shape) ||
        !std::isfinite(rate))
      fail(ErrorKind::BadConfig, "gamma needs positive shape and rate");
    double mode = shape_ > 1.0 ? (shape_ - 1.0) / rate_ : mean_anchor();
    double log_peak = log_density(std::max(mode, 1e-12));
    double u = mean_anchor() + 8.0 * std::sqrt(shape_) / rate_;
    while (log_density(u) > log_peak - kTruncLog - 4.0) u *= 2.0;
    trunc_upper_ = u;
  }
  double mean_anchor() const { return shape_ / rate_; }
  double log_density(double x) const {
    if (x <= 0.0) return -kInf;
    return shape_ * std::log(rate_) + (shape_ - 1.0) * std::log(x) -
           rate_ * x - lgam(shape_);
  }
  double density(double x) const override {
    if (x < 0.0) return 0.0;
    if (x == 0.0) {
      if (shape_ > 1.0) return 0.0;
      if (shape_ == 1.0) return rate_;
      return kInf;
    }
    return std::exp(log_density(x));
  }
  double cdf(double x) const override {
    return x > 0.0 ? boost::math::gamma_p(shape_, rate_ * x) : 0.0;
  }
  double support_lower() const override { return 0.0; }
  double support_upper() const override { return kInf; }
  double trunc_lower() const override { return 0.0; }
  double trunc_upper() const override { return trunc_upper_; }
  double moment(int k) const override {
    if (k < 0 || k > 4) fail(ErrorKind::BadConfig, "moment order must be 0..4");
    double m = 1.0;
    for (int j = 0; j < k; ++j) m *= (shape_ + j) / rate_;
    return m;
  }
  double sample(RngStream& rng) const override {
    return rng.gamma(shape_, rate_);
  }
  double log_mgf(double lam) const override {
    if (lam >= rate_)
      fail(ErrorKind::DivergentMGF,
           fmt("gamma MGF diverges at lambda >= %g", rate_));
    return -shape_ * std::log1p(-lam / rate_);
  }
  double tilted_mean(double lam) const override {
    return shape_ / (rate_ - lam);
  }
  double tilted_variance(double lam) const override {
    return shape_ / ((rate_ - lam) * (rate_ - lam));
  }
  std::pair<double, double> mgf_domain() const override {
    return {-kHuge, rate_};
  }
  ContPtr tilted_family(double lam) const override {
    return rate_ + lam > 0.0 ? make_gamma(shape_, rate_ + lam) : nullptr;
  }
  std::string family() const override { return "gamma"; }
  std::string describe() const override {
    return fmt("gamma(shape=%g, rate=%g)", shape_, rate_);
  }
  double shape_, rate_, trunc_upper_;
};

class NormalDist final : public ContinuousDist {
 public:
  NormalDist(double mu, double sigma2) : mu_(mu), s2_(sigma2) {
    if (!std::isfinite(mu) || !(sigma2 > 0.0) || !std::isfinite(sigma2))
      fail(ErrorKind::BadConfig, "normal needs finite mu and positive sigma2");
    sd_ = std::sqrt(sigma2);
  }
  double density(double x) const override {
    return normal_density((x - mu_) / sd_) / sd_;
  }
  double cdf(double x) const override { return normal_cdf((x - mu_) / sd_); }
  double support_lower() const override { return -kInf; }
  double support_upper() const override { return kInf; }
  double trunc_lower() const override { return mu_ - kTruncZ * sd_; }
  double trunc_upper() const override { return mu_ + kTruncZ * sd_; }
  double moment(int k) const override {
    switch (k) {
      case 0: return 1.0;
      case 1: return mu_;
      case 2: return mu_ * mu_ + s2_;
      case 3: return mu_ * (mu_ * mu_ + 3.0 * s2_);
      case 4: return mu_ * mu_ * mu_ * mu_ + 6.0 * mu_ * mu_ * s2_ +
                     3.0 * s2_ * s2_;
      default: fail(ErrorKind::BadConfig, "moment order must be 0..4");
    }
  }
  double sample(RngStream& rng) const override {
    return mu_ + sd_ * rng.normal();
  }
  double log_mgf(double lam) const override {
    return mu_ * lam + 0.5 * s2_ * lam * lam;
  }
  double tilted_mean(double lam) const override { return mu_ + s2_ * lam; }
  double tilted_variance(double) const override { return s2_; }
  std::pair<double, double> mgf_domain() const override {
    return {-kHuge, kHuge};
  }
  ContPtr tilted_family(double lam) const override {
    return make_normal(mu_ - s2_ * lam, s2_);
  }
  std::string family() const override { return "normal"; }
  std::string describe() const override {
    return fmt("normal(mu=%g, sigma2=%g)", mu_, s2_);
  }
  double mu_, s2_, sd_;
};

class HalfNormalDist final : public ContinuousDist {
 public:
  explicit HalfNormalDist(double sigma) : sigma_(sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma))
      fail(ErrorKind::BadConfig, "half-normal sigma must be positive");
  }
  double density(double x) const override {
    return x >= 0.0 ? 2.0 * normal_density(x / sigma_) / sigma_ : 0.0;
  }
  double cdf(double x) const override {
    return x > 0.0 ? std::erf(x / (sigma_ * std::sqrt(2.0))) : 0.0;
  }
  double support_lower() const override { return 0.0; }
  double support_upper() const override { return kInf; }
  double trunc_lower() const override { return 0.0; }
  double trunc_upper() const override { return kTruncZ * sigma_; }
  double moment(int k) const override {
    double r = std::sqrt(2.0 / M_PI);
    switch (k) {
      case 0: return 1.0;
      case 1: return sigma_ * r;
      case 2: return sigma_ * sigma_;
      case 3: return 2.0 * sigma_ * sigma_ * sigma_ * r;
      case 4: return 3.0 * sigma_ * sigma_ * sigma_ * sigma_;
      default: fail(ErrorKind::BadConfig, "moment order must be 0..4");
    }
  }
  double sample(RngStream& rng) const override {
    return sigma_ * std::abs(rng.normal());
  }
  double log_mgf(double lam) const override {
    double t = sigma_ * lam;
    return std::log(2.0) + log_normal_cdf_std(t) + 0.5 * t * t;
  }
  double tilted_mean(double lam) const override {
    double t = sigma_ * lam;
    return sigma_ * (t + mills_ratio_inv(t));
  }
  double tilted_variance(double lam) const override {
    double t = sigma_ * lam;
    double m = mills_ratio_inv(t);
    return sigma_ * sigma_ * (1.0 - m * (t + m));
  }
  std::pair<double, double> mgf_domain() const override {
    return {-kHuge, kHuge};
  }
  std::string family() const override { return "half_normal"; }
  std::string describe() const override {
    return fmt("half_normal(sigma=%g)", sigma_);
  }
  double sigma_;
};

class ExpWindowDist final : public ContinuousDist {
 public:
  ExpWindowDist(double slope, double a, double b)
      : s_(slope), a_(a), b_(b) {
    if (!std::isfinite(slope) || !std::isfinite(a) || !std::isfinite(b) ||
        !(b > a))
      fail(ErrorKind::BadConfig, "exp window needs finite slope and a < b");
    if (std::abs(slope) * (b - a) > 600.0)
      fail(ErrorKind::BadConfig, "exp window slope*width too large");
    log_norm_ = window_log_integral(s_, a_, b_);
  }
  double density(double x) const override {
    if (x < a_ || x > b_) return 0.0;
    return std::exp(s_ * x - log_norm_);
  }
  double cdf(double x) const override {
    if (x <= a_) return 0.0;
    if (x >= b_) return 1.0;
    return std::exp(window_log_integral(s_, a_, x) - log_norm_);
  }
  double support_lower() const override { return a_; }
  double support_upper() const override { return b_; }
  double trunc_lower() const override { return a_; }
  double trunc_upper() const override { return b_; }
  double truncated_mass() const override { return 0.0; }
  double sample(RngStream& rng) const override {
    double u = rng.uniform();
    if (std::abs(s_) < 1e-12) return a_ + u * (b_ - a_);
    // invert F(x) = (e^{s x}-e^{s a})/(e^{s b}-e^{s a})
    double w = std::expm1(s_ * (b_ - a_));
    return a_ + std::log1p(u * w) / s_;
  }
  double log_mgf(double lam) const override {
    return window_log_integral(s_ + lam, a_, b_) - log_norm_;
  }
  double tilted_mean(double lam) const override {
    return window_tilted_mean(s_ + lam, a_, b_);
  }
  double tilted_variance(double lam) const override {
    return window_tilted_var(s_ + lam, a_, b_);
  }
  std::pair<double, double> mgf_domain() const override {
    return {-kHuge, kHuge};
  }
  ContPtr tilted_family(double lam) const override {
    if (std::abs(s_ - lam) * (b_ - a_) > 600.0) return nullptr;
    return make_exp_window(s_ - lam, a_, b_);
  }
  std::string family() const override { return "exp_window"; }
  std::string describe() const override {
    return fmt("exp_window(slope=%g, a=%g, b=%g)", s_, a_, b_);
  }
  double s_, a_, b_, log_norm_;
};

class PointMassDist final : public ContinuousDist {
 public:
  explicit PointMassDist(double c) : c_(c) {
    if (!std::isfinite(c)) fail(ErrorKind::BadConfig, "point mass must be finite");
  }
  bool has_density() const override { return false; }
  double density(double) const override {
    fail(ErrorKind::BadConfig, "point mass has no density");
  }
  double atom(double x) const override { return x == c_ ? 1.0 : 0.0; }
  double cdf(double x) const override { return x >= c_ ? 1.0 : 0.0; }
  double support_lower() const override { return c_; }
  double support_upper() const override { return c_; }
  double trunc_lower() const override { return c_; }
  double trunc_upper() const override { return c_; }
  double truncated_mass() const override { return 0.0; }
  double moment(int k) const override {
    if (k < 0 || k > 4) fail(ErrorKind::BadConfig, "moment order must be 0..4");
    return std::pow(c_, k);
  }
  double sample(RngStream&) const override { return c_; }
  double log_mgf(double lam) const override { return lam * c_; }
  double tilted_mean(double) const override { return c_; }
  double tilted_variance(double) const override { return 0.0; }
  std::pair<double, double> mgf_domain() const override {
    return {-kHuge, kHuge};
  }
  ContPtr tilted_family(double) const override { return make_point_mass(c_); }
  std::string family() const override { return "point_mass"; }
  std::string describe() const override { return fmt("point_mass(c=%g)", c_); }
  double c_;
};

class UniformSumDist final : public ContinuousDist {
 public:
  // Sum of m iid uniform(a,b); closed-form piecewise-polynomial density.
  UniformSumDist(double a, double b, int m) : a_(a), b_(b), m_(m) {
    lo_ = m * a;
    hi_ = m * b;
    w_ = b - a;
    logfact_ = lgam(m);
  }
  double ih_density(double s) const {
    // density of sum of m iid uniform(0,1) at s
    if (s <= 0.0 || s >= m_) return 0.0;
    double acc = 0.0;
    int jmax = static_cast<int>(std::floor(s));
    for (int j = 0; j <= jmax; ++j) {
      double term = std::exp(lgam(m_ + 1) - lgam(j + 1) - lgam(m_ - j + 1) +
                             (m_ - 1) * std::log(s - j) - logfact_);
      acc += (j % 2 == 0) ? term : -term;
    }
    return std::max(acc, 0.0);
  }
  double ih_cdf(double s) const {
    if (s <= 0.0) return 0.0;
    if (s >= m_) return 1.0;
    double acc = 0.0;
    int jmax = static_cast<int>(std::floor(s));
    for (int j = 0; j <= jmax; ++j) {
      if (s - j <= 0.0) continue;
      double term =
          std::exp(-lgam(j + 1) - lgam(m_ - j + 1) + m_ * std::log(s - j));
      acc += (j % 2 == 0) ? term : -term;
    }
    return std::clamp(acc, 0.0, 1.0);
  }
  double density(double x) const override {
    return ih_density((x - lo_) / w_) / w_;
  }
  double cdf(double x) const override { return ih_cdf((x - lo_) / w_); }
  double support_lower() const override { return lo_; }
  double support_upper() const override { return hi_; }
  double trunc_lower() const override { return lo_; }
  double trunc_upper() const override { return hi_; }
  double truncated_mass() const override { return 0.0; }
  double moment(int k) const override {
    if (k < 0 || k > 4) fail(ErrorKind::BadConfig, "moment order must be 0..4");
    double mu = m_ * 0.5 * (a_ + b_);
    double c2 = m_ * w_ * w_ / 12.0;
    double c4 = m_ * w_ * w_ * w_ * w_ / 80.0 +
                3.0 * m_ * (m_ - 1) * (w_ * w_ / 12.0) * (w_ * w_ / 12.0);
    switch (k) {
      case 0: return 1.0;
      case 1: return mu;
      case 2: return c2 + mu * mu;
      case 3: return mu * mu * mu + 3.0 * mu * c2;
      case 4: return mu * mu * mu * mu + 6.0 * mu * mu * c2 + c4;
      default: return 0.0;
    }
  }
  double sample(RngStream& rng) const override {
    double s = 0.0;
    for (int i = 0; i < m_; ++i) s += rng.uniform(a_, b_);
    return s;
  }
  double log_mgf(double lam) const override {
    return m_ * (window_log_integral(lam, a_, b_) - std::log(w_));
  }
  double tilted_mean(double lam) const override {
    return m_ * window_tilted_mean(lam, a_, b_);
  }
  double tilted_variance(double lam) const override {
    return m_ * window_tilted_var(lam, a_, b_);
  }
  std::pair<double, double> mgf_domain() const override {
    return {-kHuge, kHuge};
  }
  std::string family() const override { return "uniform_sum"; }
  std::string describe() const override {
    return fmt("uniform_sum(a=%g, b=%g, m=%d)", a_, b_, m_);
  }
  double a_, b_, lo_, hi_, w_, logfact_;
  int m_;
};

class TabulatedDensityDist final : public ContinuousDist {
 public:
  TabulatedDensityDist(std::vector<double> xs, std::vector<double> ps,
                       bool cubic) {
    if (xs.size() != ps.size() || xs.size() < 2)
      fail(ErrorKind::BadConfig, "table needs matching x,p columns, >= 2 rows");
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (!std::isfinite(xs[i]) || !std::isfinite(ps[i]) || ps[i] < 0.0)
        fail(ErrorKind::BadConfig, "table entries must be finite, p >= 0");
      if (i > 0 && !(xs[i] > xs[i - 1]))
        fail(ErrorKind::BadConfig, "table x column must be strictly increasing");
    }
    tab_.xs = std::move(xs);
    tab_.y = std::move(ps);
    if (cubic && tab_.xs.size() >= 4)
      build_spline(tab_);
    else
      build_linear(tab_);
    build_cdf(tab_);
    double total = tab_.F.back();
    if (!(total > 0.0) || !std::isfinite(total))
      fail(ErrorKind::DivergentNormalizer, "table has no positive mass");
    renorm_ = 1.0 / total;
    for (auto& v : tab_.y) v *= renorm_;
    for (auto& v : tab_.b) v *= renorm_;
    for (auto& v : tab_.c) v *= renorm_;
    for (auto& v : tab_.d) v *= renorm_;
    for (auto& v : tab_.F) v *= renorm_;
    tab_.F.back() = 1.0;
  }
  double density(double x) const override { return tab_density(tab_, x); }
  double cdf(double x) const override { return tab_cdf(tab_, x); }
  double support_lower() const override { return tab_.xs.front(); }
  double support_upper() const override { return tab_.xs.back(); }
  double trunc_lower() const override { return tab_.xs.front(); }
  double trunc_upper() const override { return tab_.xs.back(); }
  double truncated_mass() const override { return 0.0; }
  double moment(int k) const override {
    if (k < 0 || k > 4) fail(ErrorKind::BadConfig, "moment order must be 0..4");
    // 4-point Gauss-Legendre per segment: exact for x^k * cubic, k <= 4
    static const double gn[4] = {-0.8611363115940526, -0.3399810435848563,
                                 0.3399810435848563, 0.8611363115940526};
    static const double gw[4] = {0.3478548451374538, 0.6521451548625461,
                                 0.6521451548625461, 0.3478548451374538};
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < tab_.xs.size(); ++i) {
      double h = tab_.xs[i + 1] - tab_.xs[i];
      for (int g = 0; g < 4; ++g) {
        double u = 0.5 * h * (1.0 + gn[g]);
        double x = tab_.xs[i] + u;
        double f = tab_.y[i] + u * (tab_.b[i] + u * (tab_.c[i] + u * tab_.d[i]));
        acc += 0.5 * h * gw[g] * std::pow(x, k) * f;
      }
    }
    return acc;
  }
  std::pair<double, double> mgf_domain() const override {
    return {-kHuge, kHuge};
  }
  std::string family() const override { return "table"; }
  std::string describe() const override {
    return fmt("table(n=%zu, range=[%g, %g])", tab_.xs.size(),
               tab_.xs.front(), tab_.xs.back());
  }
  Tab tab_;
  double renorm_ = 1.0;
};

class AffineContDist final : public ContinuousDist {
 public:
  AffineContDist(ContPtr base, double scale, double shift)
      : base_(std::move(base)), s_(scale), t_(shift) {
    if (!base_) fail(ErrorKind::BadConfig, "affine base is null");
    if (!std::isfinite(scale) || scale == 0.0 || !std::isfinite(shift))
      fail(ErrorKind::BadConfig, "affine needs finite nonzero scale");
  }
  double u(double x) const { return (x - t_) / s_; }
  bool has_density() const override { return base_->has_density(); }
  double density(double x) const override {
    return base_->density(u(x)) / std::abs(s_);
  }
  double atom(double x) const override { return base_->atom(u(x)); }
  double cdf(double x) const override {
    if (s_ > 0.0) return base_->cdf(u(x));
    return 1.0 - base_->cdf(u(x)) + base_->atom(u(x));
  }
  double support_lower() const override {
    return s_ > 0.0 ? s_ * base_->support_lower() + t_
                    : s_ * base_->support_upper() + t_;
  }
  double support_upper() const override {
    return s_ > 0.0 ? s_ * base_->support_upper() + t_
                    : s_ * base_->support_lower() + t_;
  }
  double trunc_lower() const override {
    return s_ > 0.0 ? s_ * base_->trunc_lower() + t_
                    : s_ * base_->trunc_upper() + t_;
  }
  double trunc_upper() const override {
    return s_ > 0.0 ? s_ * base_->trunc_upper() + t_
                    : s_ * base_->trunc_lower() + t_;
  }
  double truncated_mass() const override { return base_->truncated_mass(); }
  double moment(int k) const override {
    if (k < 0 || k > 4) fail(ErrorKind::BadConfig, "moment order must be 0..4");
    double acc = 0.0;
    double ch = 1.0;
    for (int j = 0; j <= k; ++j) {  // sum C(k,j) s^j t^{k-j} E[V^j]
      acc += ch * std::pow(s_, j) * std::pow(t_, k - j) * base_->moment(j);
      ch = ch * (k - j) / (j + 1);
    }
    return acc;
  }
  double sample(RngStream& rng) const override {
    return s_ * base_->sample(rng) + t_;
  }
  double log_mgf(double lam) const override {
    return lam * t_ + base_->log_mgf(lam * s_);
  }
  double tilted_mean(double lam) const override {
    return t_ + s_ * base_->tilted_mean(lam * s_);
  }
  double tilted_variance(double lam) const override {
    return s_ * s_ * base_->tilted_variance(lam * s_);
  }
  std::pair<double, double> mgf_domain() const override {
    auto [lo, hi] = base_->mgf_domain();
    double a = lo / s_, b = hi / s_;
    if (a > b) std::swap(a, b);
    return {std::max(a, -kHuge), std::min(b, kHuge)};
  }
  ContPtr tilted_family(double lam) const override {
    // e^{-lam (sV+t)} reweights the base by e^{-(lam s) V}
    auto t = base_->tilted_family(lam * s_);
    return t ? affine_of(std::move(t), s_, t_) : nullptr;
  }
  std::string family() const override { return "affine"; }
  std::string describe() const override {
    return fmt("affine(scale=%g, shift=%g, base=%s)", s_, t_,
               base_->describe().c_str());
  }
  ContPtr base_;
  double s_, t_;
};

// ---------------------------------------------------------------------------
// Discrete families

class PoissonDist final : public DiscreteDist {
 public:
  explicit PoissonDist(double mean) : mu_(mean) {
    if (!(mean > 0.0) || !std::isfinite(mean))
      fail(ErrorKind::BadConfig, "poisson mean must be positive");
    kmax_ = static_cast<std::int64_t>(
        std::ceil(mu_ + 12.0 * std::sqrt(mu_) + 50.0));
  }
  double pmf(std::int64_t k) const override {
    if (k < 0) return 0.0;
    return std::exp(k * std::log(mu_) - mu_ - lgam(double(k) + 1.0));
  }
  double cdf_index(std::int64_t k) const override {
    if (k < 0) return 0.0;
    return boost::math::gamma_q(double(k) + 1.0, mu_);
  }
  std::int64_t kmin() const override { return 0; }
  std::int64_t kmax() const override { return kmax_; }
  double moment(int k) const override {
    double m = mu_;
    switch (k) {
      case 0: return 1.0;
      case 1: return m;
      case 2: return m + m * m;
      case 3: return m * m * m + 3.0 * m * m + m;
      case 4: return m * m * m * m + 6.0 * m * m * m + 7.0 * m * m + m;
      default: fail(ErrorKind::BadConfig, "moment order must be 0..4");
    }
  }
  std::int64_t sample_index(RngStream& rng) const override {
    return rng.poisson(mu_);
  }
  double log_mgf(double lam) const override { return mu_ * std::expm1(lam); }
  double tilted_mean(double lam) const override {
    return mu_ * std::exp(lam);
  }
  double tilted_variance(double lam) const override {
    return mu_ * std::exp(lam);
  }
  DiscPtr tilted_family(double lam) const override {
    return make_poisson(mu_ * std::exp(-lam));
  }
  std::string family() const override { return "poisson"; }
  std::string describe() const override { return fmt("poisson(mean=%g)", mu_); }
  double mu_;
  std::int64_t kmax_;
};

class BinomialDist final : public DiscreteDist {
 public:
  BinomialDist(std::int64_t n, double p) : n_(n), p_(p) {
    if (n < 1 || !(p > 0.0) || !(p < 1.0))
      fail(ErrorKind::BadConfig, "binomial needs n >= 1 and p in (0,1)");
  }
  double pmf(std::int64_t k) const override {
    if (k < 0 || k > n_) return 0.0;
    double lk = lgam(double(n_) + 1.0) - lgam(double(k) + 1.0) -
                lgam(double(n_ - k) + 1.0);
    return std::exp(lk + k * std::log(p_) + (n_ - k) * std::log1p(-p_));
  }
  double cdf_index(std::int64_t k) const override {
    if (k < 0) return 0.0;
    if (k >= n_) return 1.0;
    return boost::math::ibeta(double(n_ - k), double(k) + 1.0, 1.0 - p_);
  }
  std::int64_t kmin() const override { return 0; }
  std::int64_t kmax() const override { return n_; }
  double truncated_mass() const override { return 0.0; }
  double moment(int k) const override {
    double n1 = double(n_);
    double n2 = n1 * (n1 - 1.0);
    double n3 = n2 * (n1 - 2.0);
    double n4 = n3 * (n1 - 3.0);
    double p = p_;
    switch (k) {
      case 0: return 1.0;
      case 1: return n1 * p;
      case 2: return n2 * p * p + n1 * p;
      case 3: return n3 * p * p * p + 3.0 * n2 * p * p + n1 * p;
      case 4:
        return n4 * p * p * p * p + 6.0 * n3 * p * p * p + 7.0 * n2 * p * p +
               n1 * p;
      default: fail(ErrorKind::BadConfig, "moment order must be 0..4");
    }
  }
  std::int64_t sample_index(RngStream& rng) const override {
    return rng.binomial(n_, p_);
  }
  double log_mgf(double lam) const override {
    // n log(1 - p + p e^lam), stable for large lam
    if (lam > 0.0)
      return n_ * (lam + std::log1p((1.0 - p_) * (std::exp(-lam) - 1.0)));
    return n_ * std::log1p(p_ * std::expm1(lam));
  }
  double tilted_mean(double lam) const override {
    double w = p_ / (p_ + (1.0 - p_) * std::exp(-lam));
    return n_ * w;
  }
  double tilted_variance(double lam) const override {
    double w = p_ / (p_ + (1.0 - p_) * std::exp(-lam));
    return n_ * w * (1.0 - w);
  }
  DiscPtr tilted_family(double lam) const override {
    double q = p_ * std::exp(-lam) / (1.0 - p_ + p_ * std::exp(-lam));
    return make_binomial(n_, q);
  }
  std::string family() const override { return "binomial"; }
  std::string describe() const override {
    return fmt("binomial(n=%lld, p=%g)", static_cast<long long>(n_), p_);
  }
  std::int64_t n_;
  double p_;
};

class TabulatedPmfDist final : public DiscreteDist {
 public:
  TabulatedPmfDist(std::vector<double> masses, double origin, double spacing)
      : m_(std::move(masses)), origin_(origin), spacing_(spacing) {
    if (m_.empty()) fail(ErrorKind::BadConfig, "pmf table is empty");
    if (!(spacing > 0.0) || !std::isfinite(spacing) || !std::isfinite(origin))
      fail(ErrorKind::BadConfig, "pmf table needs finite origin, spacing > 0");
    double total = 0.0;
    for (double v : m_) {
      if (!std::isfinite(v) || v < 0.0)
        fail(ErrorKind::BadConfig, "pmf masses must be finite and >= 0");
      total += v;
    }
    if (!(total > 0.0))
      fail(ErrorKind::DivergentNormalizer, "pmf table has no positive mass");
    cum_.resize(m_.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < m_.size(); ++i) {
      m_[i] /= total;
      acc += m_[i];
      cum_[i] = acc;
    }
    cum_.back() = 1.0;
  }
  double pmf(std::int64_t k) const override {
    if (k < 0 || k >= std::int64_t(m_.size())) return 0.0;
    return m_[k];
  }
  double cdf_index(std::int64_t k) const override {
    if (k < 0) return 0.0;
    if (k >= std::int64_t(m_.size())) return 1.0;
    return cum_[k];
  }
  std::int64_t kmin() const override { return 0; }
  std::int64_t kmax() const override { return std::int64_t(m_.size()) - 1; }
  double truncated_mass() const override { return 0.0; }
  double origin() const override { return origin_; }
  double spacing() const override { return spacing_; }
  std::int64_t sample_index(RngStream& rng) const override {
    double u = rng.uniform();
    auto it = std::lower_bound(cum_.begin(), cum_.end(), u);
    return it == cum_.end() ? kmax() : (it - cum_.begin());
  }
  DiscPtr tilted_family(double lam) const override {
    std::vector<double> w(m_.size());
    double top = -kInf;
    for (std::size_t i = 0; i < m_.size(); ++i)
      if (m_[i] > 0.0)
        top = std::max(top, std::log(m_[i]) - lam * position(std::int64_t(i)));
    for (std::size_t i = 0; i < m_.size(); ++i)
      w[i] = m_[i] > 0.0
                 ? std::exp(std::log(m_[i]) - lam * position(std::int64_t(i)) -
                            top)
                 : 0.0;
    return make_tabulated_pmf(std::move(w), origin_, spacing_);
  }
  std::string family() const override { return "pmf_table"; }
  std::string describe() const override {
    return fmt("pmf_table(n=%zu, origin=%g, spacing=%g)", m_.size(), origin_,
               spacing_);
  }
  std::vector<double> m_, cum_;
  double origin_, spacing_;
};

class AffineLatticeDist final : public DiscreteDist {
 public:
  AffineLatticeDist(DiscPtr base, double scale, double shift)
      : base_(std::move(base)), s_(scale), t_(shift) {
    if (!base_) fail(ErrorKind::BadConfig, "affine base is null");
    if (!(scale > 0.0) || !std::isfinite(scale) || !std::isfinite(shift))
      fail(ErrorKind::BadConfig, "lattice affine needs finite scale > 0");
  }
  double pmf(std::int64_t k) const override { return base_->pmf(k); }
  double cdf_index(std::int64_t k) const override {
    return base_->cdf_index(k);
  }
  std::int64_t kmin() const override { return base_->kmin(); }
  std::int64_t kmax() const override { return base_->kmax(); }
  double truncated_mass() const override { return base_->truncated_mass(); }
  bool lattice() const override { return base_->lattice(); }
  double origin() const override { return s_ * base_->origin() + t_; }
  double spacing() const override { return s_ * base_->spacing(); }
  double position(std::int64_t k) const override {
    return s_ * base_->position(k) + t_;
  }
  double moment(int k) const override {
    if (k < 0 || k > 4) fail(ErrorKind::BadConfig, "moment order must be 0..4");
    double acc = 0.0;
    double ch = 1.0;
    for (int j = 0; j <= k; ++j) {
      acc += ch * std::pow(s_, j) * std::pow(t_, k - j) * base_->moment(j);
      ch = ch * (k - j) / (j + 1);
    }
    return acc;
  }
  std::int64_t sample_index(RngStream& rng) const override {
    return base_->sample_index(rng);
  }
  double log_mgf(double lam) const override {
    return lam * t_ + base_->log_mgf(lam * s_);
  }
  double tilted_mean(double lam) const override {
    return t_ + s_ * base_->tilted_mean(lam * s_);
  }
  double tilted_variance(double lam) const override {
    return s_ * s_ * base_->tilted_variance(lam * s_);
  }
  std::pair<double, double> mgf_domain() const override {
    auto [lo, hi] = base_->mgf_domain();
    return {std::max(lo / s_, -kHuge), std::min(hi / s_, kHuge)};
  }
  DiscPtr tilted_family(double lam) const override {
    auto t = base_->tilted_family(lam * s_);
    return t ? affine_of(std::move(t), s_, t_) : nullptr;
  }
  std::string family() const override { return "affine_lattice"; }
  std::string describe() const override {
    return fmt("affine_lattice(scale=%g, shift=%g, base=%s)", s_, t_,
               base_->describe().c_str());
  }
  DiscPtr base_;
  double s_, t_;
};

// Numeric convolution of two continuous laws on a spline table.
ContPtr conv_pair(const ContinuousDist& f, const ContinuousDist& g) {
  double lo = f.trunc_lower() + g.trunc_lower();
  double hi = f.trunc_upper() + g.trunc_upper();
  const std::size_t kPts = 8193;
  std::vector<double> xs(kPts), ps(kPts);
  double step = (hi - lo) / (kPts - 1);
  for (std::size_t i = 0; i < kPts; ++i) {
    double z = lo + step * i;
    double a = std::max(f.trunc_lower(), z - g.trunc_upper());
    double b = std::min(f.trunc_upper(), z - g.trunc_lower());
    xs[i] = z;
    ps[i] = (b > a)
                ? integrate([&](double x) { return f.density(x) * g.density(z - x); },
                            a, b, 1e-10)
                      .value
                : 0.0;
    if (ps[i] < 0.0) ps[i] = 0.0;
  }
  return make_tabulated_density(std::move(xs), std::move(ps), true);
}

}  // namespace

// ---------------------------------------------------------------------------
// Base-class defaults

double normal_density(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double ContinuousDist::truncated_mass() const {
  double kept = cdf(trunc_upper()) - cdf(trunc_lower()) + atom(trunc_lower());
  return std::max(0.0, 1.0 - kept);
}

double ContinuousDist::moment(int k) const {
  if (k < 0 || k > 4) fail(ErrorKind::BadConfig, "moment order must be 0..4");
  if (k == 0) return 1.0;
  return integrate(
             [&](double x) { return std::pow(x, k) * density(x); },
             trunc_lower(), trunc_upper())
      .value;
}

double ContinuousDist::variance() const {
  double m1 = moment(1);
  return moment(2) - m1 * m1;
}

double ContinuousDist::sample(RngStream& rng) const {
  return quantile(*this, rng.uniform());
}

namespace {

// log integral f(x) e^{lam x} dx over [lo, hi] with an exponent shift.
double shifted_log_integral(const ContinuousDist& d, double lam, double lo,
                            double hi, double* ratio1 = nullptr,
                            double* ratio2 = nullptr) {
  double shift = -kInf;
  const int kScan = 257;
  for (int i = 0; i < kScan; ++i) {
    double x = lo + (hi - lo) * i / (kScan - 1);
    double f = d.density(x);
    if (f > 0.0 && std::isfinite(f))
      shift = std::max(shift, std::log(f) + lam * x);
  }
  if (!std::isfinite(shift)) fail(ErrorKind::DivergentNormalizer,
                                  "tilted integrand vanishes everywhere");
  auto w = [&](double x) {
    double f = d.density(x);
    if (f <= 0.0) return 0.0;
    return std::exp(std::log(f) + lam * x - shift);
  };
  double z = integrate(w, lo, hi).value;
  if (ratio1) {
    double m1 = integrate([&](double x) { return x * w(x); }, lo, hi).value / z;
    *ratio1 = m1;
    if (ratio2) {
      double m2 =
          integrate([&](double x) { return (x - m1) * (x - m1) * w(x); }, lo,
                    hi)
              .value /
          z;
      *ratio2 = m2;
    }
  }
  return std::log(z) + shift;
}

}  // namespace

double ContinuousDist::log_mgf(double lam) const {
  return shifted_log_integral(*this, lam, trunc_lower(), trunc_upper());
}

double ContinuousDist::tilted_mean(double lam) const {
  double m1 = 0.0;
  shifted_log_integral(*this, lam, trunc_lower(), trunc_upper(), &m1);
  return m1;
}

double ContinuousDist::tilted_variance(double lam) const {
  double m1 = 0.0, v = 0.0;
  shifted_log_integral(*this, lam, trunc_lower(), trunc_upper(), &m1, &v);
  return v;
}

std::pair<double, double> ContinuousDist::mgf_domain() const {
  bool lo_inf = !std::isfinite(support_lower());
  bool hi_inf = !std::isfinite(support_upper());
  if (!lo_inf && !hi_inf) return {-kHuge, kHuge};
  // Probe the integrand tail geometrically, then refine the boundary to 1e-6
  // relative precision.
  double scale = std::max(1.0, (trunc_upper() - trunc_lower()) / 8.0);
  auto finite_side = [&](double lam, bool upper) {
    double edge = upper ? trunc_upper() : trunc_lower();
    double ref = -kInf;
    for (int i = 0; i < 65; ++i) {
      double x = trunc_lower() + (trunc_upper() - trunc_lower()) * i / 64.0;
      double f = density(x);
      if (f > 0.0) ref = std::max(ref, std::log(f) + lam * x);
    }
    double prev = kInf;
    for (int j = 0; j < 32; ++j) {
      double x = upper ? edge + scale * std::pow(2.0, j)
                       : edge - scale * std::pow(2.0, j);
      double f = density(x);
      double g = f > 0.0 ? std::log(f) + lam * x : -kInf;
      if (g > ref) return false;
      if (std::isfinite(g) && g > prev) return false;
      if (std::isfinite(g)) prev = g;
    }
    return true;
  };
  auto boundary = [&](bool upper) {
    double sgn = upper ? 1.0 : -1.0;
    if (upper && !hi_inf) return kHuge;
    if (!upper && !lo_inf) return -kHuge;
    double ok = 0.0, lam = sgn;
    for (int j = 0; j < 40; ++j) {
      if (!finite_side(lam, upper)) break;
      ok = lam;
      lam *= 2.0;
      if (std::abs(lam) > kHuge / 4.0) return sgn * kHuge;
    }
    double bad = lam;
    while (std::abs(bad - ok) > 1e-6 * std::max(1.0, std::abs(bad))) {
      double mid = 0.5 * (ok + bad);
      (finite_side(mid, upper) ? ok : bad) = mid;
    }
    return ok;
  };
  return {boundary(false), boundary(true)};
}

double DiscreteDist::cdf_index(std::int64_t k) const {
  if (k < kmin()) return 0.0;
  double acc = 0.0;
  std::int64_t hi = std::min(k, kmax());
  for (std::int64_t j = kmin(); j <= hi; ++j) acc += pmf(j);
  return std::min(acc, 1.0);
}

double DiscreteDist::truncated_mass() const {
  return std::max(0.0, 1.0 - cdf_index(kmax()));
}

double DiscreteDist::moment(int k) const {
  if (k < 0 || k > 4) fail(ErrorKind::BadConfig, "moment order must be 0..4");
  double acc = 0.0;
  for (std::int64_t j = kmin(); j <= kmax(); ++j)
    acc += std::pow(position(j), k) * pmf(j);
  return acc;
}

double DiscreteDist::variance() const {
  double m1 = moment(1);
  return moment(2) - m1 * m1;
}

std::int64_t DiscreteDist::sample_index(RngStream& rng) const {
  double u = rng.uniform();
  double acc = 0.0;
  for (std::int64_t j = kmin(); j <= kmax(); ++j) {
    acc += pmf(j);
    if (acc >= u) return j;
  }
  return kmax();
}

double DiscreteDist::log_mgf(double lam) const {
  double shift = -kInf;
  for (std::int64_t j = kmin(); j <= kmax(); ++j) {
    double p = pmf(j);
    if (p > 0.0) shift = std::max(shift, std::log(p) + lam * position(j));
  }
  if (!std::isfinite(shift))
    fail(ErrorKind::DivergentNormalizer, "tilted pmf vanishes everywhere");
  double acc = 0.0;
  for (std::int64_t j = kmin(); j <= kmax(); ++j) {
    double p = pmf(j);
    if (p > 0.0) acc += std::exp(std::log(p) + lam * position(j) - shift);
  }
  return std::log(acc) + shift;
}

double DiscreteDist::tilted_mean(double lam) const {
  double lz = log_mgf(lam);
  double acc = 0.0;
  for (std::int64_t j = kmin(); j <= kmax(); ++j) {
    double p = pmf(j);
    if (p > 0.0)
      acc += position(j) * std::exp(std::log(p) + lam * position(j) - lz);
  }
  return acc;
}

double DiscreteDist::tilted_variance(double lam) const {
  double lz = log_mgf(lam);
  double m1 = tilted_mean(lam);
  double acc = 0.0;
  for (std::int64_t j = kmin(); j <= kmax(); ++j) {
    double p = pmf(j);
    if (p > 0.0) {
      double dx = position(j) - m1;
      acc += dx * dx * std::exp(std::log(p) + lam * position(j) - lz);
    }
  }
  return acc;
}

std::pair<double, double> DiscreteDist::mgf_domain() const {
  return {-kHuge, kHuge};
}

// ---------------------------------------------------------------------------
// Factories

ContPtr make_uniform(double a, double b) {
  return std::make_shared<UniformDist>(a, b);
}
ContPtr make_exponential(double rate) {
  return std::make_shared<ExponentialDist>(rate);
}
ContPtr make_gamma(double shape, double rate) {
  return std::make_shared<GammaDist>(shape, rate);
}
ContPtr make_normal(double mu, double sigma2) {
  return std::make_shared<NormalDist>(mu, sigma2);
}
ContPtr make_half_normal(double sigma) {
  return std::make_shared<HalfNormalDist>(sigma);
}
ContPtr make_exp_window(double slope, double a, double b) {
  return std::make_shared<ExpWindowDist>(slope, a, b);
}
ContPtr make_point_mass(double c) {
  return std::make_shared<PointMassDist>(c);
}
ContPtr make_tabulated_density(std::vector<double> xs, std::vector<double> ps,
                               bool cubic) {
  return std::make_shared<TabulatedDensityDist>(std::move(xs), std::move(ps),
                                                cubic);
}

double tabulated_renorm_factor(const ContinuousDist& d) {
  auto* t = dynamic_cast<const TabulatedDensityDist*>(&d);
  if (!t) fail(ErrorKind::BadConfig, "not a tabulated density");
  return t->renorm_;
}

ContPtr load_table_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IoError, "cannot open " + path);
  std::vector<double> xs, ps;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    double x, p;
    if (!(ss >> x >> p)) {
      if (lineno == 1) continue;  // header row
      fail(ErrorKind::IoError,
           fmt("%s: cannot parse line %zu", path.c_str(), lineno));
    }
    xs.push_back(x);
    ps.push_back(p);
  }
  return make_tabulated_density(std::move(xs), std::move(ps), false);
}

DiscPtr make_poisson(double mean) { return std::make_shared<PoissonDist>(mean); }
DiscPtr make_binomial(std::int64_t n, double p) {
  return std::make_shared<BinomialDist>(n, p);
}
DiscPtr make_tabulated_pmf(std::vector<double> masses, double origin,
                           double spacing) {
  return std::make_shared<TabulatedPmfDist>(std::move(masses), origin, spacing);
}

ContPtr affine_of(ContPtr base, double scale, double shift) {
  return std::make_shared<AffineContDist>(std::move(base), scale, shift);
}
DiscPtr affine_of(DiscPtr base, double scale, double shift) {
  return std::make_shared<AffineLatticeDist>(std::move(base), scale, shift);
}

// ---------------------------------------------------------------------------
// Free operations

double interval_prob(const ContinuousDist& d, const Interval& I) {
  double p = d.cdf(I.right()) - d.cdf(I.left()) + d.atom(I.left());
  return std::clamp(p, 0.0, 1.0);
}

double interval_prob(const DiscreteDist& d, const Interval& I) {
  if (!d.lattice()) {
    double acc = 0.0;
    for (std::int64_t k = d.kmin(); k <= d.kmax(); ++k) {
      double x = d.position(k);
      if (x >= I.left() && x <= I.right()) acc += d.pmf(k);
    }
    return std::min(acc, 1.0);
  }
  double sp = d.spacing(), org = d.origin();
  double tol = 1e-9;
  std::int64_t klo = static_cast<std::int64_t>(
      std::ceil((I.left() - org) / sp - tol));
  std::int64_t khi = static_cast<std::int64_t>(
      std::floor((I.right() - org) / sp + tol));
  klo = std::max(klo, d.kmin());
  if (khi < klo) return 0.0;
  double p = d.cdf_index(khi) - d.cdf_index(klo - 1);
  return std::clamp(p, 0.0, 1.0);
}

double log_interval_prob_slope(const ContinuousDist& d, const Interval& I) {
  if (!(I.delta > 0.0))
    fail(ErrorKind::ZeroInterval, "slope needs a window of positive width");
  double p = interval_prob(d, I);
  if (!(p > 0.0) || !std::isfinite(p))
    fail(ErrorKind::ZeroInterval,
         "interval probability vanishes at " + I.describe());
  if (d.has_density()) {
    double num = d.density(I.right()) - d.density(I.left());
    double slope = num / p;
    if (!std::isfinite(slope))
      fail(ErrorKind::NonFiniteSlope,
           "density difference is not finite at " + I.describe());
    return slope;
  }
  double e = std::min(I.delta, 1e-4) * 1e-2;
  double pp = interval_prob(d, Interval(I.h + e, I.delta));
  double pm = interval_prob(d, Interval(I.h - e, I.delta));
  if (!(pp > 0.0) || !(pm > 0.0))
    fail(ErrorKind::ZeroInterval,
         "shifted interval probability vanishes near " + I.describe());
  double slope = (std::log(pp) - std::log(pm)) / (2.0 * e);
  if (!std::isfinite(slope))
    fail(ErrorKind::NonFiniteSlope, "finite-difference slope is not finite");
  return slope;
}

ContPtr sum_law(const ContPtr& d, int m) {
  if (!d) fail(ErrorKind::BadConfig, "sum_law base is null");
  if (m < 1) fail(ErrorKind::BadConfig, "sum_law needs m >= 1");
  if (m == 1) return d;
  if (auto* e = dynamic_cast<const ExponentialDist*>(d.get()))
    return make_gamma(double(m), e->rate_);
  if (auto* g = dynamic_cast<const GammaDist*>(d.get()))
    return make_gamma(m * g->shape_, g->rate_);
  if (auto* n = dynamic_cast<const NormalDist*>(d.get()))
    return make_normal(m * n->mu_, m * n->s2_);
  if (auto* pm = dynamic_cast<const PointMassDist*>(d.get()))
    return make_point_mass(m * pm->c_);
  if (auto* u = dynamic_cast<const UniformDist*>(d.get())) {
    if (m <= 10) return std::make_shared<UniformSumDist>(u->a_, u->b_, m);
  }
  if (auto* us = dynamic_cast<const UniformSumDist*>(d.get())) {
    if (m * us->m_ <= 10)
      return std::make_shared<UniformSumDist>(us->a_, us->b_, m * us->m_);
  }
  if (auto* a = dynamic_cast<const AffineContDist*>(d.get()))
    return affine_of(sum_law(a->base_, m), a->s_, m * a->t_);
  if (!d->has_density())
    fail(ErrorKind::UnsupportedConvolution,
         "no density available for numeric convolution of " + d->describe());
  if (m > 64)
    fail(ErrorKind::UnsupportedConvolution,
         fmt("numeric convolution limited to m <= 64, got m = %d for ", m) +
             d->describe());
  // square-and-multiply on numeric convolutions
  ContPtr acc;
  ContPtr cur = d;
  int rem = m;
  while (rem > 0) {
    if (rem & 1) acc = acc ? conv_pair(*acc, *cur) : cur;
    rem >>= 1;
    if (rem > 0) cur = conv_pair(*cur, *cur);
  }
  return acc;
}

DiscPtr sum_law(const DiscPtr& d, int m) {
  if (!d) fail(ErrorKind::BadConfig, "sum_law base is null");
  if (m < 1) fail(ErrorKind::BadConfig, "sum_law needs m >= 1");
  if (m == 1) return d;
  if (auto* p = dynamic_cast<const PoissonDist*>(d.get()))
    return make_poisson(m * p->mu_);
  if (auto* b = dynamic_cast<const BinomialDist*>(d.get()))
    return make_binomial(m * b->n_, b->p_);
  if (auto* a = dynamic_cast<const AffineLatticeDist*>(d.get()))
    return affine_of(sum_law(a->base_, m), a->s_, m * a->t_);
  if (!d->lattice())
    fail(ErrorKind::UnsupportedConvolution,
         "numeric convolution needs a lattice support: " + d->describe());
  if (m > 64)
    fail(ErrorKind::UnsupportedConvolution,
         fmt("numeric convolution limited to m <= 64, got m = %d for ", m) +
             d->describe());
  // dense pmf convolution by doubling; indices start at m*kmin
  auto dense = [&](const DiscreteDist& x) {
    std::vector<double> v;
    for (std::int64_t k = x.kmin(); k <= x.kmax(); ++k) v.push_back(x.pmf(k));
    return v;
  };
  auto convolve = [](const std::vector<double>& a,
                     const std::vector<double>& b) {
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] == 0.0) continue;
      for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    }
    return out;
  };
  std::vector<double> base = dense(*d);
  if (double(base.size()) * m > double(1 << 20))
    fail(ErrorKind::UnsupportedConvolution,
         "convolved support too large for " + d->describe());
  std::vector<double> acc, cur = base;
  int rem = m;
  while (rem > 0) {
    if (rem & 1) acc = acc.empty() ? cur : convolve(acc, cur);
    rem >>= 1;
    if (rem > 0) cur = convolve(cur, cur);
  }
  double origin = m * (d->origin() + d->spacing() * d->kmin());
  return make_tabulated_pmf(std::move(acc), origin, d->spacing());
}

std::vector<double> sample(const ContinuousDist& d, std::size_t count,
                           std::uint64_t seed) {
  RngStream rng(seed);
  std::vector<double> out(count);
  for (auto& v : out) v = d.sample(rng);
  return out;
}

std::vector<double> sample(const DiscreteDist& d, std::size_t count,
                           std::uint64_t seed) {
  RngStream rng(seed);
  std::vector<double> out(count);
  for (auto& v : out) v = d.sample(rng);
  return out;
}

double quantile(const ContinuousDist& d, double p) {
  if (!(p > 0.0) || !(p < 1.0))
    fail(ErrorKind::BadConfig, "quantile level must lie in (0,1)");
  double lo = d.trunc_lower(), hi = d.trunc_upper();
  if (lo == hi) return lo;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    if (d.cdf(mid) < p)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-15 * std::max(1.0, std::abs(hi))) break;
  }
  return 0.5 * (lo + hi);
}

std::int64_t quantile_index(const DiscreteDist& d, double p) {
  if (!(p > 0.0) || !(p < 1.0))
    fail(ErrorKind::BadConfig, "quantile level must lie in (0,1)");
  std::int64_t lo = d.kmin(), hi = d.kmax();
  while (lo < hi) {
    std::int64_t mid = lo + (hi - lo) / 2;
    if (d.cdf_index(mid) >= p)
      hi = mid;
    else
      lo = mid + 1;
  }
  return lo;
}

// ---------------------------------------------------------------------------
// Scaling schemes

double ScalingScheme::beta_at(int n) const {
  if (!beta) fail(ErrorKind::BadConfig, "scaling scheme has no beta");
  double b = beta(n);
  if (!(b > 0.0) || !std::isfinite(b))
    fail(ErrorKind::BadConfig, fmt("beta_n must be positive, got %g at n=%d", b, n));
  return b;
}

double ScalingScheme::mu_at(int n) const {
  if (!mu) fail(ErrorKind::BadConfig, "scaling scheme has no mu");
  double m = mu(n);
  if (!std::isfinite(m))
    fail(ErrorKind::BadConfig, fmt("mu_n must be finite at n=%d", n));
  return m;
}

Interval ScalingScheme::condition_window(int n, const Interval& I) const {
  double b = beta_at(n);
  return Interval(mu_at(n) + I.h / b, I.delta / b);
}

ScalingScheme ScalingScheme::gaussian(double mean_per_summand) {
  ScalingScheme s;
  s.beta = [](int n) { return 1.0 / std::sqrt(double(n)); };
  s.mu = [mean_per_summand](int n) { return n * mean_per_summand; };
  s.name = "gaussian";
  return s;
}

ScalingScheme ScalingScheme::large_deviation() {
  ScalingScheme s;
  s.beta = [](int n) { return 1.0 / double(n); };
  s.mu = [](int) { return 0.0; };
  s.name = "large_deviation";
  return s;
}

ScalingScheme ScalingScheme::identity() {
  ScalingScheme s;
  s.beta = [](int) { return 1.0; };
  s.mu = [](int) { return 0.0; };
  s.name = "identity";
  return s;
}

ContPtr standardize(const ContPtr& d, const ScalingScheme& s, int n) {
  double b = s.beta_at(n);
  return affine_of(d, b, -b * s.mu_at(n));
}

DiscPtr standardize(const DiscPtr& d, const ScalingScheme& s, int n) {
  double b = s.beta_at(n);
  return affine_of(d, b, -b * s.mu_at(n));
}

}  // namespace canon

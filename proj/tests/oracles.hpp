#pragma once

// Reference numerics for the tests, kept deliberately independent of the
// library: composite Simpson instead of Gauss-Kronrod, erfc for the normal
// cdf, a Numerical-Recipes-style incomplete gamma, and a xorshift generator
// for randomized checks.

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

namespace oracle {

inline double simpson(const std::function<double(double)>& f, double a,
                      double b, int panels = 2000) {
  if (panels % 2) ++panels;
  double h = (b - a) / panels;
  double acc = f(a) + f(b);
  for (int i = 1; i < panels; ++i)
    acc += f(a + h * i) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

inline double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
}

// Regularized lower incomplete gamma P(a, x): series for x < a+1, Lentz
// continued fraction otherwise.
inline double gamma_p(double a, double x) {
  if (x <= 0.0) return 0.0;
  double gln = std::lgamma(a);
  if (x < a + 1.0) {
    double ap = a, sum = 1.0 / a, del = sum;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - gln);
  }
  double b = x + 1.0 - a, c = 1e300, d = 1.0 / b, h = d;
  for (int i = 1; i <= 500; ++i) {
    double an = -double(i) * (double(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < 1e-300) d = 1e-300;
    c = b + an / c;
    if (std::fabs(c) < 1e-300) c = 1e-300;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) break;
  }
  return 1.0 - std::exp(-x + a * std::log(x) - gln) * h;
}

inline double pois_pmf(double mean, std::int64_t k) {
  if (k < 0) return 0.0;
  return std::exp(-mean + double(k) * std::log(mean) -
                  std::lgamma(double(k) + 1.0));
}

// P(K <= k) = Q(k+1, mean) through the incomplete gamma.
inline double pois_cdf(double mean, std::int64_t k) {
  if (k < 0) return 0.0;
  return 1.0 - gamma_p(double(k) + 1.0, mean);
}

inline double binom_pmf(std::int64_t n, double p, std::int64_t k) {
  if (k < 0 || k > n) return 0.0;
  double lc = std::lgamma(double(n) + 1.0) - std::lgamma(double(k) + 1.0) -
              std::lgamma(double(n - k) + 1.0);
  return std::exp(lc + double(k) * std::log(p) +
                  double(n - k) * std::log1p(-p));
}

// xorshift64*, independent of the library's stream.
struct Xorshift {
  std::uint64_t s;
  explicit Xorshift(std::uint64_t seed) : s(seed ? seed : 0x9e3779b97f4a7c15ull) {}
  std::uint64_t next() {
    s ^= s >> 12;
    s ^= s << 25;
    s ^= s >> 27;
    return s * 0x2545f4914f6cdd1dull;
  }
  double u01() { return (next() >> 11) * 0x1.0p-53; }
};

inline std::vector<double> random_pmf(Xorshift& rng, int len) {
  std::vector<double> v(len);
  double tot = 0.0;
  for (auto& x : v) {
    x = -std::log(rng.u01() + 1e-300);
    tot += x;
  }
  for (auto& x : v) x /= tot;
  return v;
}

}  // namespace oracle

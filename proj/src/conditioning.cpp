#include "canon/conditioning.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <thread>

#include "canon/quadrature.hpp"

namespace canon {

namespace {

// Underflow guard only: window masses down at large-deviation scale (1e-17
// and below) are legitimate inputs, so anything above the denormal range
// passes.
constexpr double kMassTol = 1e-280;
constexpr std::size_t kCells = 2048;
constexpr std::size_t kScan = 8192;
constexpr unsigned kMcTasks = 16;

double cell_quad(const std::function<double(double)>& f, double a, double b) {
  return integrate(f, a, b).value;
}

// Adaptive cell edges: quantiles of an equal mixture of the scanned weight
// and the uniform law, so cells concentrate where the mass is without ever
// starving a subinterval.
std::vector<double> mixture_edges(const std::function<double(double)>& w,
                                  double xlo, double xhi) {
  std::vector<double> xs(kScan + 1), cum(kScan + 1, 0.0);
  double h = (xhi - xlo) / kScan;
  for (std::size_t i = 0; i <= kScan; ++i) xs[i] = xlo + h * i;
  std::vector<double> v(kScan + 1);
  for (std::size_t i = 0; i <= kScan; ++i) {
    double x = xs[i];
    if (i == 0) x = xlo + 1e-9 * (xhi - xlo);
    if (i == kScan) x = xhi - 1e-9 * (xhi - xlo);
    double val = w(x);
    if (!std::isfinite(val)) {
      if (i == 0 || i == kScan)
        val = 0.0;  // integrable endpoint singularities stay out of the scan
      else
        fail(ErrorKind::NonFiniteConditional,
             "conditional weight not finite at x=" + std::to_string(xs[i]));
    }
    if (val < 0.0)
      fail(ErrorKind::NonFiniteConditional,
           "conditional weight negative at x=" + std::to_string(xs[i]));
    v[i] = val;
  }
  for (std::size_t i = 1; i <= kScan; ++i)
    cum[i] = cum[i - 1] + 0.5 * (v[i - 1] + v[i]) * h;
  double total = cum.back();
  std::vector<double> edges(kCells + 1);
  edges[0] = xlo;
  edges[kCells] = xhi;
  std::size_t seg = 0;
  for (std::size_t j = 1; j < kCells; ++j) {
    double target = double(j) / kCells;
    // invert M(x) = 0.5*cum/total + 0.5*(x-xlo)/(xhi-xlo)
    auto mix = [&](std::size_t i) {
      double um = (xs[i] - xlo) / (xhi - xlo);
      double wm = total > 0.0 ? cum[i] / total : um;
      return 0.5 * wm + 0.5 * um;
    };
    while (seg < kScan && mix(seg + 1) < target) ++seg;
    double m0 = mix(seg), m1 = mix(seg + 1);
    double t = m1 > m0 ? (target - m0) / (m1 - m0) : 0.5;
    edges[j] = xs[seg] + t * (xs[seg + 1] - xs[seg]);
  }
  for (std::size_t j = 1; j <= kCells; ++j)
    if (!(edges[j] > edges[j - 1]))
      edges[j] = std::nextafter(edges[j - 1], xhi);
  return edges;
}

ConditionalLaw exact_from_weight(const std::function<double(double)>& w,
                                 double xlo, double xhi, const Interval& I) {
  if (!(xlo < xhi))
    fail(ErrorKind::EmptyWindow,
         "window " + I.describe() + " leaves no feasible subsystem values");
  ConditionalLaw law;
  law.kind = CondKind::Continuous;
  law.window = I;
  law.method = "bayes-exact";
  law.edges = mixture_edges(w, xlo, xhi);
  law.mass.resize(kCells);
  double z = 0.0;
  for (std::size_t i = 0; i < kCells; ++i) {
    law.mass[i] = cell_quad(w, law.edges[i], law.edges[i + 1]);
    z += law.mass[i];
  }
  if (!(z > kMassTol))
    fail(ErrorKind::EmptyWindow,
         "window " + I.describe() + " has mass " + std::to_string(z) +
             "; the weight underflows to zero");
  if (!std::isfinite(z))
    fail(ErrorKind::NonFiniteConditional, "window mass not finite");
  for (auto& m : law.mass) m /= z;
  law.mass_in_window = z;
  law.dens = [w, z](double x) { return w(x) / z; };
  return law;
}

unsigned env_thread_cap() {
  const char* s = std::getenv("CANON_TILT_THREADS");
  if (!s || !*s) return 0;
  char* end = nullptr;
  long v = std::strtol(s, &end, 10);
  if (end == s || *end != '\0' || v < 1)
    fail(ErrorKind::BadConfig,
         std::string("CANON_TILT_THREADS must be a positive integer, got ") +
             s);
  return unsigned(v);
}

struct McAccum {
  std::vector<std::uint64_t> counts;
  std::uint64_t accepted = 0;
};

// Runs kMcTasks logical tasks with per-task seed streams and merges counts
// in task order, so the histogram is independent of the thread count.
template <class TaskFn>
McAccum run_mc_tasks(std::size_t bins, std::uint64_t samples,
                     std::uint64_t seed, TaskFn&& task) {
  std::vector<McAccum> parts(kMcTasks);
  for (auto& p : parts) p.counts.assign(bins, 0);
  unsigned workers = worker_count(kMcTasks);
  auto run_slice = [&](unsigned w) {
    for (unsigned t = w; t < kMcTasks; t += workers) {
      std::uint64_t quota = samples / kMcTasks + (t < samples % kMcTasks);
      RngStream rng(derive_seed(seed, t));
      task(rng, quota, parts[t]);
    }
  };
  if (workers <= 1) {
    run_slice(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back(run_slice, w);
    for (auto& th : pool) th.join();
  }
  McAccum out;
  out.counts.assign(bins, 0);
  for (const auto& p : parts) {
    out.accepted += p.accepted;
    for (std::size_t i = 0; i < bins; ++i) out.counts[i] += p.counts[i];
  }
  return out;
}

void require_accepted(std::uint64_t accepted, std::uint64_t samples) {
  if (accepted < 100)
    fail(ErrorKind::TooFewAccepted,
         "only " + std::to_string(accepted) + " of " +
             std::to_string(samples) +
             " samples landed in the window; enlarge samples or the window");
}

}  // namespace

double ConditionalLaw::density(double x) const {
  if (kind != CondKind::Continuous)
    fail(ErrorKind::BadConfig, "density() on a discrete conditional");
  if (dens) return dens(x);
  if (x < edges.front() || x > edges.back()) return 0.0;
  auto it = std::upper_bound(edges.begin(), edges.end(), x);
  std::size_t i = std::min<std::size_t>(
      it == edges.begin() ? 0 : (it - edges.begin() - 1), cells() - 1);
  double w = edges[i + 1] - edges[i];
  return w > 0.0 ? mass[i] / w : 0.0;
}

double ConditionalLaw::pmf_at(std::int64_t kk) const {
  if (kind != CondKind::Discrete)
    fail(ErrorKind::BadConfig, "pmf_at() on a continuous conditional");
  if (k.empty() || kk < k.front() || kk > k.back()) return 0.0;
  return pk[std::size_t(kk - k.front())];
}

double ConditionalLaw::cdf(double x) const {
  if (kind == CondKind::Discrete) {
    double acc = 0.0;
    for (std::size_t i = 0; i < k.size(); ++i)
      if (pos[i] <= x) acc += pk[i];
    return std::min(acc, 1.0);
  }
  if (x <= edges.front()) return 0.0;
  if (x >= edges.back()) return 1.0;
  auto it = std::upper_bound(edges.begin(), edges.end(), x);
  std::size_t i = it - edges.begin() - 1;
  double acc = 0.0;
  for (std::size_t j = 0; j < i; ++j) acc += mass[j];
  if (dens) {
    acc += cell_quad(dens, edges[i], x);
  } else {
    double w = edges[i + 1] - edges[i];
    if (w > 0.0) acc += mass[i] * (x - edges[i]) / w;
  }
  return std::clamp(acc, 0.0, 1.0);
}

double ConditionalLaw::total_mass() const {
  double acc = 0.0;
  if (kind == CondKind::Discrete)
    for (double p : pk) acc += p;
  else
    for (double m : mass) acc += m;
  return acc;
}

double ConditionalLaw::mean() const {
  if (kind == CondKind::Discrete) {
    double acc = 0.0;
    for (std::size_t i = 0; i < k.size(); ++i) acc += pk[i] * pos[i];
    return acc;
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < cells(); ++i) {
    if (dens)
      acc += cell_quad([this](double x) { return x * dens(x); }, edges[i],
                       edges[i + 1]);
    else
      acc += mass[i] * 0.5 * (edges[i] + edges[i + 1]);
  }
  return acc;
}

double ConditionalLaw::variance() const {
  double m1 = mean();
  double acc = 0.0;
  if (kind == CondKind::Discrete) {
    for (std::size_t i = 0; i < k.size(); ++i)
      acc += pk[i] * (pos[i] - m1) * (pos[i] - m1);
    return acc;
  }
  for (std::size_t i = 0; i < cells(); ++i) {
    if (dens)
      acc += cell_quad(
          [this, m1](double x) { return (x - m1) * (x - m1) * dens(x); },
          edges[i], edges[i + 1]);
    else {
      double mid = 0.5 * (edges[i] + edges[i + 1]);
      acc += mass[i] * (mid - m1) * (mid - m1);
    }
  }
  return acc;
}

ConditionalLaw condition_exact(const ContPtr& x, const ContPtr& y,
                               const Interval& I) {
  if (!x || !y) fail(ErrorKind::BadConfig, "condition_exact needs two laws");
  double xlo = std::max(x->trunc_lower(), I.left() - y->trunc_upper());
  double xhi = std::min(x->trunc_upper(), I.right() - y->trunc_lower());
  // A zero-width window on a density bath means conditioning on the exact sum,
  // so the weight degenerates to the bath density and the normalizer to the
  // sum's density at h. Atom baths keep the interval probability, which picks
  // up the atom on its own.
  if (I.delta == 0.0 && y->has_density()) {
    auto w = [x, y, I](double t) {
      double fx = x->density(t);
      if (fx <= 0.0) return 0.0;
      return fx * y->density(I.h - t);
    };
    return exact_from_weight(w, xlo, xhi, I);
  }
  auto w = [x, y, I](double t) {
    double fx = x->density(t);
    if (fx <= 0.0) return 0.0;
    return fx * interval_prob(*y, Interval(I.h - t, I.delta));
  };
  return exact_from_weight(w, xlo, xhi, I);
}

ConditionalLaw condition_exact(const DiscPtr& x, const DiscPtr& y,
                               const Interval& I) {
  if (!x || !y) fail(ErrorKind::BadConfig, "condition_exact needs two laws");
  ConditionalLaw law;
  law.kind = CondKind::Discrete;
  law.window = I;
  law.method = "bayes-exact";
  double z = 0.0;
  for (std::int64_t kk = x->kmin(); kk <= x->kmax(); ++kk) {
    double px = x->pmf(kk);
    double v = 0.0;
    if (px > 0.0) {
      double xv = x->position(kk);
      v = px * interval_prob(*y, Interval(I.h - xv, I.delta));
    }
    law.k.push_back(kk);
    law.pos.push_back(x->position(kk));
    law.pk.push_back(v);
    z += v;
  }
  if (!(z > kMassTol))
    fail(ErrorKind::EmptyWindow,
         "window " + I.describe() +
             " has no mass; the weight underflows to zero");
  for (auto& p : law.pk) p /= z;
  law.mass_in_window = z;
  return law;
}

ConditionalLaw condition_exact_dependent(const ContPtr& x,
                                         const BathGivenX& bath_given_x,
                                         const Interval& I) {
  if (!x || !bath_given_x)
    fail(ErrorKind::BadConfig,
         "condition_exact_dependent needs a marginal and a conditional bath");
  auto w = [x, bath_given_x, I](double t) {
    double fx = x->density(t);
    if (fx <= 0.0) return 0.0;
    double g = bath_given_x(t, Interval(I.h - t, I.delta));
    if (!std::isfinite(g) || g < 0.0 || g > 1.0 + 1e-12)
      fail(ErrorKind::NonFiniteConditional,
           "conditional bath returned " + std::to_string(g) + " at x=" +
               std::to_string(t) + ", outside [0,1]");
    return fx * g;
  };
  return exact_from_weight(w, x->trunc_lower(), x->trunc_upper(), I);
}

ConditionalLaw condition_mc(const ContPtr& x_marginal, const JointSampler& joint,
                            const Interval& I, std::uint64_t samples,
                            std::uint64_t seed) {
  if (!x_marginal || !joint)
    fail(ErrorKind::BadConfig, "condition_mc needs a marginal and a sampler");
  if (samples < 10000)
    fail(ErrorKind::BadConfig, "condition_mc needs at least 10^4 samples");
  const std::size_t bins = 64;
  std::vector<double> edges(bins + 1);
  edges[0] = x_marginal->trunc_lower();
  edges[bins] = x_marginal->trunc_upper();
  for (std::size_t j = 1; j < bins; ++j)
    edges[j] = quantile(*x_marginal, double(j) / bins);
  for (std::size_t j = 1; j <= bins; ++j)
    if (!(edges[j] > edges[j - 1]))
      edges[j] = std::nextafter(edges[j - 1], edges.back() + 1.0);

  auto task = [&](RngStream& rng, std::uint64_t quota, McAccum& acc) {
    for (std::uint64_t i = 0; i < quota; ++i) {
      auto [xs, ys] = joint(rng);
      if (!I.contains(xs + ys)) continue;
      auto it = std::upper_bound(edges.begin(), edges.end(), xs);
      std::size_t b = it == edges.begin() ? 0 : (it - edges.begin() - 1);
      acc.counts[std::min(b, bins - 1)]++;
      acc.accepted++;
    }
  };
  McAccum merged = run_mc_tasks(bins, samples, seed, task);
  require_accepted(merged.accepted, samples);

  ConditionalLaw law;
  law.kind = CondKind::Continuous;
  law.window = I;
  law.method = "mc-rejection";
  law.edges = edges;
  law.mass.resize(bins);
  law.mass_se.resize(bins);
  double na = double(merged.accepted);
  for (std::size_t i = 0; i < bins; ++i) {
    double p = merged.counts[i] / na;
    law.mass[i] = p;
    law.mass_se[i] = std::sqrt(std::max(p * (1.0 - p), 0.0) / na);
  }
  law.mass_in_window = na / double(samples);
  law.mc = McMeta{samples, merged.accepted, seed};
  return law;
}

ConditionalLaw condition_mc(const ContPtr& x, const ContPtr& y,
                            const Interval& I, std::uint64_t samples,
                            std::uint64_t seed) {
  if (!x || !y) fail(ErrorKind::BadConfig, "condition_mc needs two laws");
  JointSampler joint = [x, y](RngStream& rng) {
    double xs = x->sample(rng);
    double ys = y->sample(rng);
    return std::make_pair(xs, ys);
  };
  return condition_mc(x, joint, I, samples, seed);
}

ConditionalLaw condition_mc(const DiscPtr& x, const DiscPtr& y,
                            const Interval& I, std::uint64_t samples,
                            std::uint64_t seed) {
  if (!x || !y) fail(ErrorKind::BadConfig, "condition_mc needs two laws");
  if (samples < 10000)
    fail(ErrorKind::BadConfig, "condition_mc needs at least 10^4 samples");
  std::size_t bins = std::size_t(x->kmax() - x->kmin() + 1);
  std::int64_t k0 = x->kmin();
  auto task = [&](RngStream& rng, std::uint64_t quota, McAccum& acc) {
    for (std::uint64_t i = 0; i < quota; ++i) {
      std::int64_t kx = x->sample_index(rng);
      std::int64_t ky = y->sample_index(rng);
      if (!I.contains(x->position(kx) + y->position(ky))) continue;
      acc.counts[std::size_t(kx - k0)]++;
      acc.accepted++;
    }
  };
  McAccum merged = run_mc_tasks(bins, samples, seed, task);
  require_accepted(merged.accepted, samples);

  ConditionalLaw law;
  law.kind = CondKind::Discrete;
  law.window = I;
  law.method = "mc-rejection";
  double na = double(merged.accepted);
  for (std::size_t i = 0; i < bins; ++i) {
    law.k.push_back(k0 + std::int64_t(i));
    law.pos.push_back(x->position(k0 + std::int64_t(i)));
    double p = merged.counts[i] / na;
    law.pk.push_back(p);
    law.pk_se.push_back(std::sqrt(std::max(p * (1.0 - p), 0.0) / na));
  }
  law.mass_in_window = na / double(samples);
  law.mc = McMeta{samples, merged.accepted, seed};
  return law;
}

ConditionalLaw finite_n_conditional(
    const ContPtr& x, const std::function<ContPtr(int)>& bath_family,
    const ScalingScheme& scheme, const Interval& I, int n) {
  if (n < 1) fail(ErrorKind::BadConfig, "finite_n_conditional needs n >= 1");
  if (!bath_family) fail(ErrorKind::BadConfig, "bath family is empty");
  Interval en = scheme.condition_window(n, I);
  ConditionalLaw law = condition_exact(x, bath_family(n - 1), en);
  law.n = n;
  law.beta_n = scheme.beta_at(n);
  law.mu_n = scheme.mu_at(n);
  law.scheme_name = scheme.name;
  return law;
}

ConditionalLaw finite_n_conditional(
    const DiscPtr& x, const std::function<DiscPtr(int)>& bath_family,
    const ScalingScheme& scheme, const Interval& I, int n) {
  if (n < 1) fail(ErrorKind::BadConfig, "finite_n_conditional needs n >= 1");
  if (!bath_family) fail(ErrorKind::BadConfig, "bath family is empty");
  Interval en = scheme.condition_window(n, I);
  ConditionalLaw law = condition_exact(x, bath_family(n - 1), en);
  law.n = n;
  law.beta_n = scheme.beta_at(n);
  law.mu_n = scheme.mu_at(n);
  law.scheme_name = scheme.name;
  return law;
}

ContPtr canonical_approx(const ContPtr& x, const TiltParam& p) {
  if (!std::isfinite(p.lambda))
    fail(ErrorKind::BadConfig, "tilt parameter is not finite");
  return tilt(x, p.lambda);
}

DiscPtr canonical_approx(const DiscPtr& x, const TiltParam& p) {
  if (!std::isfinite(p.lambda))
    fail(ErrorKind::BadConfig, "tilt parameter is not finite");
  return tilt(x, p.lambda);
}

ContPtr canonical_approx(const ContPtr& x, const TiltField& f) {
  return tilt_field(x, f);
}

DiscPtr canonical_approx(const DiscPtr& x, const TiltField& f) {
  return tilt_field(x, f);
}

unsigned worker_count(unsigned tasks) {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  unsigned cap = env_thread_cap();
  unsigned w = std::min(tasks, hw);
  if (cap > 0) w = std::min(w, cap);
  return std::max(w, 1u);
}

}  // namespace canon

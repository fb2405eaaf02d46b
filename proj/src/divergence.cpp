#include "canon/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "canon/quadrature.hpp"

namespace canon {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_continuous(const ConditionalLaw& c) {
  if (c.kind != CondKind::Continuous)
    fail(ErrorKind::GridMismatch,
         "discrete conditional compared against a continuous law");
}

void require_discrete(const ConditionalLaw& c) {
  if (c.kind != CondKind::Discrete)
    fail(ErrorKind::GridMismatch,
         "continuous conditional compared against a discrete law");
}

// Paired probability vectors on a shared comparison grid. Both sides are
// normalized over the grid, so KL and TV obey their usual inequalities.
struct MassPair {
  std::vector<double> p, q;
};

void normalize(std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  if (s > 0.0)
    for (double& x : v) x /= s;
}

double kl_of(const MassPair& m) {
  double acc = 0.0;
  for (std::size_t i = 0; i < m.p.size(); ++i) {
    double p = m.p[i], q = m.q[i];
    if (p <= 0.0) continue;  // 0*log(0/q) = 0
    if (q <= 0.0) return kInf;
    acc += p * std::log(p / q);
  }
  if (acc < 0.0 && acc > -1e-9) acc = 0.0;
  return acc;
}

double tv_of(const MassPair& m) {
  double acc = 0.0;
  for (std::size_t i = 0; i < m.p.size(); ++i)
    acc += std::abs(m.p[i] - m.q[i]);
  return std::clamp(0.5 * acc, 0.0, 1.0);
}

double sup_of(const MassPair& m) {
  double s = 0.0;
  for (std::size_t i = 0; i < m.p.size(); ++i)
    s = std::max(s, std::abs(m.p[i] - m.q[i]));
  return s;
}

// Continuous conditional vs analytic density: the conditional contributes
// its exact cell masses, the analytic law midpoint masses on the same grid.
MassPair cells_cond_cont(const ConditionalLaw& c, const ContinuousDist& d) {
  require_continuous(c);
  MassPair m;
  std::size_t nc = c.cells();
  m.p = c.mass;
  m.q.resize(nc);
  for (std::size_t i = 0; i < nc; ++i) {
    double w = c.edges[i + 1] - c.edges[i];
    double mid = 0.5 * (c.edges[i] + c.edges[i + 1]);
    double dv = d.density(mid);
    m.q[i] = (std::isfinite(dv) && dv > 0.0 ? dv : 0.0) * w;
  }
  normalize(m.p);
  normalize(m.q);
  return m;
}

MassPair swap_pair(MassPair m) {
  std::swap(m.p, m.q);
  return m;
}

// Aligned pmf lookup: mass of d at a value-space point, zero off-lattice.
double pmf_at_value(const DiscreteDist& d, double pos, bool* aligned) {
  if (d.lattice()) {
    double t = (pos - d.origin()) / d.spacing();
    std::int64_t k = std::llround(t);
    if (std::abs(t - double(k)) > 1e-6) {
      *aligned = false;
      return 0.0;
    }
    if (k < d.kmin() || k > d.kmax()) return 0.0;
    return d.pmf(k);
  }
  for (std::int64_t k = d.kmin(); k <= d.kmax(); ++k)
    if (std::abs(d.position(k) - pos) <= 1e-9 * (1.0 + std::abs(pos)))
      return d.pmf(k);
  *aligned = false;
  return 0.0;
}

MassPair cells_cond_disc(const ConditionalLaw& c, const DiscreteDist& d) {
  require_discrete(c);
  MassPair m;
  m.p = c.pk;
  for (std::size_t i = 0; i < c.k.size(); ++i) {
    bool aligned = true;
    double qv = pmf_at_value(d, c.pos[i], &aligned);
    if (!aligned && c.pk[i] > 0.0)
      fail(ErrorKind::GridMismatch,
           "conditional support does not align with " + d.describe());
    m.q.push_back(qv);
  }
  normalize(m.p);
  normalize(m.q);
  return m;
}

MassPair cells_cond_cond(const ConditionalLaw& a, const ConditionalLaw& b) {
  if (a.kind != b.kind)
    fail(ErrorKind::GridMismatch, "conditional laws of different kind");
  MassPair m;
  if (a.kind == CondKind::Discrete) {
    if (a.k.size() != b.k.size() ||
        (!a.k.empty() && a.k.front() != b.k.front()))
      fail(ErrorKind::GridMismatch,
           "conditional supports differ; cannot align");
    m.p = a.pk;
    m.q = b.pk;
    return m;
  }
  if (a.edges.size() != b.edges.size())
    fail(ErrorKind::GridMismatch, "conditional grids differ in size");
  double span = a.edges.back() - a.edges.front();
  for (std::size_t i = 0; i < a.edges.size(); ++i)
    if (std::abs(a.edges[i] - b.edges[i]) > 1e-9 * (1.0 + span))
      fail(ErrorKind::GridMismatch, "conditional grids differ; cannot align");
  m.p = a.mass;
  m.q = b.mass;
  return m;
}

MassPair cells_disc_disc(const DiscreteDist& p, const DiscreteDist& q) {
  if (p.lattice() && q.lattice()) {
    double rel = std::abs(p.spacing() - q.spacing()) /
                 std::max(p.spacing(), q.spacing());
    if (rel > 1e-9)
      fail(ErrorKind::GridMismatch,
           "lattice spacings differ: " + p.describe() + " vs " + q.describe());
    double off = (p.origin() - q.origin()) / q.spacing();
    if (std::abs(off - std::round(off)) > 1e-6)
      fail(ErrorKind::GridMismatch,
           "lattice origins incompatible: " + p.describe() + " vs " +
               q.describe());
  }
  MassPair m;
  for (std::int64_t k = p.kmin(); k <= p.kmax(); ++k) {
    double pv = p.pmf(k);
    bool aligned = true;
    double qv = pmf_at_value(q, p.position(k), &aligned);
    if (!aligned && pv > 0.0)
      fail(ErrorKind::GridMismatch,
           "supports cannot be aligned: " + p.describe() + " vs " +
               q.describe());
    m.p.push_back(pv);
    m.q.push_back(qv);
  }
  return m;
}

double kl_cont_cont(const ContinuousDist& p, const ContinuousDist& q) {
  if (!p.has_density() || !q.has_density())
    fail(ErrorKind::GridMismatch, "KL needs densities on a shared support");
  double lo = p.trunc_lower(), hi = p.trunc_upper();
  bool qzero = false;
  auto f = [&](double x) {
    double pv = p.density(x);
    if (pv <= 0.0 || !std::isfinite(pv)) return 0.0;
    double qv = q.density(x);
    if (qv <= 0.0) {
      qzero = true;
      return 0.0;
    }
    return pv * std::log(pv / qv);
  };
  const int cells = 256;
  double acc = 0.0, h = (hi - lo) / cells;
  for (int i = 0; i < cells; ++i)
    acc += integrate(f, lo + i * h, lo + (i + 1) * h).value;
  if (qzero) return kInf;
  if (acc < 0.0 && acc > -1e-12) acc = 0.0;
  return acc;
}

double tv_cont_cont(const ContinuousDist& p, const ContinuousDist& q) {
  if (!p.has_density() || !q.has_density())
    fail(ErrorKind::GridMismatch, "TV needs densities on a shared support");
  double lo = std::min(p.trunc_lower(), q.trunc_lower());
  double hi = std::max(p.trunc_upper(), q.trunc_upper());
  auto f = [&](double x) {
    double pv = std::max(p.density(x), 0.0);
    double qv = std::max(q.density(x), 0.0);
    if (!std::isfinite(pv)) pv = 0.0;  // integrable spikes carry no width
    if (!std::isfinite(qv)) qv = 0.0;
    return std::abs(pv - qv);
  };
  const int cells = 512;
  double acc = 0.0, h = (hi - lo) / cells;
  for (int i = 0; i < cells; ++i)
    acc += integrate(f, lo + i * h, lo + (i + 1) * h).value;
  return std::clamp(0.5 * acc, 0.0, 1.0);
}

DivergenceReport build_report(double klv, double tvv, bool has_sup,
                              double sup, double scale) {
  if (!(scale > 0.0))
    fail(ErrorKind::BadConfig,
         "divergence scale must be positive, got " + std::to_string(scale));
  DivergenceReport r;
  r.kl = klv;
  r.tv = tvv;
  r.has_sup = has_sup;
  r.sup_dist = sup;
  r.pinsker_bound =
      std::isinf(klv) ? kInf : std::sqrt(std::max(klv, 0.0) / 2.0);
  r.scale = scale;
  r.scaled_kl = scale * klv;
  if (!(r.tv <= r.pinsker_bound + 1e-12))
    fail(ErrorKind::BadConfig,
         "total variation " + std::to_string(r.tv) +
             " exceeds the KL bound " + std::to_string(r.pinsker_bound));
  return r;
}

}  // namespace

double kl(const ContinuousDist& p, const ContinuousDist& q) {
  return kl_cont_cont(p, q);
}
double kl(const DiscreteDist& p, const DiscreteDist& q) {
  return kl_of(cells_disc_disc(p, q));
}
double kl(const ConditionalLaw& p, const ContinuousDist& q) {
  return kl_of(cells_cond_cont(p, q));
}
double kl(const ContinuousDist& p, const ConditionalLaw& q) {
  return kl_of(swap_pair(cells_cond_cont(q, p)));
}
double kl(const ConditionalLaw& p, const DiscreteDist& q) {
  return kl_of(cells_cond_disc(p, q));
}
double kl(const DiscreteDist& p, const ConditionalLaw& q) {
  return kl_of(swap_pair(cells_cond_disc(q, p)));
}
double kl(const ConditionalLaw& p, const ConditionalLaw& q) {
  return kl_of(cells_cond_cond(p, q));
}

double total_variation(const ContinuousDist& p, const ContinuousDist& q) {
  return tv_cont_cont(p, q);
}
double total_variation(const DiscreteDist& p, const DiscreteDist& q) {
  return tv_of(cells_disc_disc(p, q));
}
double total_variation(const ConditionalLaw& p, const ContinuousDist& q) {
  return tv_of(cells_cond_cont(p, q));
}
double total_variation(const ContinuousDist& p, const ConditionalLaw& q) {
  return tv_of(swap_pair(cells_cond_cont(q, p)));
}
double total_variation(const ConditionalLaw& p, const DiscreteDist& q) {
  return tv_of(cells_cond_disc(p, q));
}
double total_variation(const DiscreteDist& p, const ConditionalLaw& q) {
  return tv_of(swap_pair(cells_cond_disc(q, p)));
}
double total_variation(const ConditionalLaw& p, const ConditionalLaw& q) {
  return tv_of(cells_cond_cond(p, q));
}

double sup_distance(const DiscreteDist& p, const DiscreteDist& q) {
  return sup_of(cells_disc_disc(p, q));
}
double sup_distance(const ConditionalLaw& p, const DiscreteDist& q) {
  return sup_of(cells_cond_disc(p, q));
}
double sup_distance(const DiscreteDist& p, const ConditionalLaw& q) {
  return sup_of(cells_cond_disc(q, p));
}
double sup_distance(const ConditionalLaw& p, const ConditionalLaw& q) {
  if (p.kind != CondKind::Discrete)
    fail(ErrorKind::GridMismatch, "sup distance is defined on pmfs");
  return sup_of(cells_cond_cond(p, q));
}

DivergenceReport scaled_divergence(const ContinuousDist& p,
                                   const ContinuousDist& q, double scale) {
  return build_report(kl(p, q), total_variation(p, q), false, 0.0, scale);
}
DivergenceReport scaled_divergence(const DiscreteDist& p,
                                   const DiscreteDist& q, double scale) {
  MassPair m = cells_disc_disc(p, q);
  return build_report(kl_of(m), tv_of(m), true, sup_of(m), scale);
}
DivergenceReport scaled_divergence(const ConditionalLaw& p,
                                   const ContinuousDist& q, double scale) {
  MassPair m = cells_cond_cont(p, q);
  return build_report(kl_of(m), tv_of(m), false, 0.0, scale);
}
DivergenceReport scaled_divergence(const ContinuousDist& p,
                                   const ConditionalLaw& q, double scale) {
  MassPair m = swap_pair(cells_cond_cont(q, p));
  return build_report(kl_of(m), tv_of(m), false, 0.0, scale);
}
DivergenceReport scaled_divergence(const ConditionalLaw& p,
                                   const DiscreteDist& q, double scale) {
  MassPair m = cells_cond_disc(p, q);
  return build_report(kl_of(m), tv_of(m), true, sup_of(m), scale);
}
DivergenceReport scaled_divergence(const DiscreteDist& p,
                                   const ConditionalLaw& q, double scale) {
  MassPair m = swap_pair(cells_cond_disc(q, p));
  return build_report(kl_of(m), tv_of(m), true, sup_of(m), scale);
}
DivergenceReport scaled_divergence(const ConditionalLaw& p,
                                   const ConditionalLaw& q, double scale) {
  MassPair m = cells_cond_cond(p, q);
  bool has_sup = p.kind == CondKind::Discrete;
  return build_report(kl_of(m), tv_of(m), has_sup, has_sup ? sup_of(m) : 0.0,
                      scale);
}

}  // namespace canon

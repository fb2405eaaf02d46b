#include <cmath>

#include "canon/distribution.hpp"
#include "canon/tilting.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace canon;

TEST_CASE("zero tilt is the identity") {
  for (auto base : {make_exponential(1.3), make_gamma(2.0, 1.0),
                    make_normal(0.5, 1.5), make_half_normal(1.0)}) {
    auto t = tilt(base, 0.0);
    for (double x : {0.1, 0.7, 2.0})
      CHECK(t->density(x) == doctest::Approx(base->density(x)).epsilon(1e-12));
  }
  auto p = make_poisson(2.0);
  auto tp = tilt(p, 0.0);
  for (std::int64_t k : {0, 2, 6})
    CHECK(tp->pmf(k) == doctest::Approx(p->pmf(k)).epsilon(1e-12));
}

TEST_CASE("tilts compose additively") {
  for (auto base : {make_exponential(2.0), make_gamma(1.7, 1.2),
                    make_normal(0.0, 1.0)}) {
    auto once = tilt(tilt(base, 0.4), 0.3);
    auto direct = tilt(base, 0.7);
    for (double x : {0.2, 0.9, 1.8})
      CHECK(once->density(x) == doctest::Approx(direct->density(x)).epsilon(1e-12));
  }
}

TEST_CASE("closed tilted families") {
  // density ratio e^{-lambda x} maps Exp(r) to Exp(r+lambda)
  auto e = tilt(make_exponential(1.0), 1.0);
  auto e2 = make_exponential(2.0);
  for (double x : {0.1, 0.5, 1.5})
    CHECK(e->density(x) == doctest::Approx(e2->density(x)).epsilon(1e-11));
  CHECK(e->mean() == doctest::Approx(0.5).epsilon(1e-11));

  auto g = tilt(make_gamma(2.5, 1.0), 0.8);
  auto g2 = make_gamma(2.5, 1.8);
  for (double x : {0.3, 1.2, 3.0})
    CHECK(g->density(x) == doctest::Approx(g2->density(x)).epsilon(1e-11));

  // normal keeps its variance and shifts its mean by -lambda sigma^2
  auto n = tilt(make_normal(0.4, 2.2), 0.6);
  CHECK(n->mean() == doctest::Approx(0.4 - 0.6 * 2.2).epsilon(1e-10));
  CHECK(n->variance() == doctest::Approx(2.2).epsilon(1e-8));

  // Poisson mean scales by e^{-lambda}
  auto p = tilt(make_poisson(3.0), 0.5);
  double m = 3.0 * std::exp(-0.5);
  for (std::int64_t k : {0, 2, 5})
    CHECK(p->pmf(k) == doctest::Approx(oracle::pois_pmf(m, k)).epsilon(1e-11));
}

TEST_CASE("normalizer is at least one on the positive axis") {
  for (double lam : {0.1, 0.7, 1.9}) {
    auto t = tilt(make_exponential(1.0), lam);
    double a = tilt_normalizer(*t);
    CHECK(a == doctest::Approx((1.0 + lam) / 1.0).epsilon(1e-10));
    CHECK(a >= 1.0);
  }
  for (double lam : {0.2, 1.1}) {
    auto t = tilt(make_gamma(2.0, 1.5), lam);
    CHECK(tilt_normalizer(*t) >= 1.0);
  }
  auto tp = tilt(make_poisson(2.0), 0.4);
  CHECK(tilt_normalizer(*tp) == doctest::Approx(std::exp(-2.0 * std::expm1(-0.4))).epsilon(1e-10));

  CHECK_THROWS_AS((void)tilt_normalizer(*make_exponential(1.0)), Error);
}

TEST_CASE("slope-derived parameter") {
  TiltParam tp = bath_slope_param(*make_normal(0.0, 1.0), Interval(-2.0, 0.5));
  CHECK(tp.lambda == doctest::Approx(1.714290812286374).epsilon(1e-10));
  CHECK(tp.provenance == TiltRoute::BathSlope);
  CHECK(tp.window.h == -2.0);
  CHECK(tp.window.delta == 0.5);

  TiltParam scaled = bath_slope_param(*make_normal(0.0, 1.0), Interval(-2.0, 0.5), 0.25);
  CHECK(scaled.lambda == doctest::Approx(0.25 * 1.714290812286374).epsilon(1e-10));
  CHECK(scaled.scale == doctest::Approx(0.25));
}

TEST_CASE("constant field reduces to scalar tilt") {
  TiltField field;
  field.zeta = [](double) { return 0.8; };
  field.bound = 0.8;
  auto a = tilt_field(make_exponential(1.0), field);
  auto b = tilt(make_exponential(1.0), 0.8);
  for (double x : {0.1, 0.6, 2.0})
    CHECK(a->density(x) == doctest::Approx(b->density(x)).epsilon(1e-10));

  // nonconstant field against direct renormalization
  TiltField quad;
  quad.zeta = [](double x) { return 0.5 + 0.1 * std::min(x, 3.0); };
  quad.bound = 0.8;
  auto base = make_exponential(1.0);
  auto q = tilt_field(base, quad);
  double z = oracle::simpson(
      [&](double x) { return base->density(x) * std::exp(-quad.zeta(x) * x); },
      0.0, 60.0, 8000);
  for (double x : {0.2, 1.0, 2.5}) {
    double expect = base->density(x) * std::exp(-quad.zeta(x) * x) / z;
    CHECK(q->density(x) == doctest::Approx(expect).epsilon(1e-6));
  }
}

TEST_CASE("reflection swaps the sign of the parameter") {
  auto base = make_uniform(-1.0, 2.0);
  auto lhs = tilt(reflect_transform(base), 0.7);
  auto rhs = tilt(base, -0.7);
  for (double x : {-1.5, 0.0, 0.9})
    CHECK(lhs->density(x) == doctest::Approx(rhs->density(-x)).epsilon(1e-9));
  // an unbounded top end has nothing to reflect onto the positive axis
  CHECK_THROWS_AS((void)reflect_transform(make_normal(0.3, 1.1)), Error);
}

TEST_CASE("shift moves support onto the positive axis") {
  auto base = make_uniform(-2.0, -1.0);
  auto shifted = shift_transform(base);
  CHECK(shifted->support_lower() == doctest::Approx(0.0));
  CHECK(shifted->mean() == doctest::Approx(base->mean() - base->support_lower()).epsilon(1e-10));
}

TEST_CASE("interaction corrections adjust the parameter") {
  TiltParam base;
  base.lambda = 1.2;
  InteractionModel model;
  model.G = [](double, const Interval&) { return 1.0; };
  model.R = [](double, const Interval&) { return 1.0; };
  model.dlogG0 = 0.3;
  model.dlogR0 = -0.1;
  CHECK(corrected_param(base, model, CorrectionMode::Smooth).lambda ==
        doctest::Approx(0.9).epsilon(1e-12));
  CHECK(corrected_param(base, model, CorrectionMode::Ldp).lambda ==
        doctest::Approx(1.3).epsilon(1e-12));
}

TEST_CASE("route names round trip") {
  for (auto r : {TiltRoute::BathSlope, TiltRoute::RateFunction,
                 TiltRoute::MaxEntropy, TiltRoute::User})
    CHECK(tilt_route_from_string(to_string(r)) == r);
  CHECK_THROWS_AS((void)tilt_route_from_string("nonsense"), Error);
}

TEST_CASE("parameter serialization round trips") {
  TiltParam tp;
  tp.lambda = 1.234567890123;
  tp.provenance = TiltRoute::RateFunction;
  tp.window = Interval(0.4, 0.1);
  tp.scale = 0.25;
  tp.note = "ystar=0.5";
  TiltParam back = TiltParam::from_json(tp.to_json());
  CHECK(back.lambda == tp.lambda);
  CHECK(back.provenance == tp.provenance);
  CHECK(back.window.h == tp.window.h);
  CHECK(back.window.delta == tp.window.delta);
  CHECK(back.scale == tp.scale);
  CHECK(back.note == tp.note);
}

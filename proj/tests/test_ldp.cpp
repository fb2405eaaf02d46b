#include <cmath>

#include "canon/distribution.hpp"
#include "canon/ldp.hpp"
#include "canon/report_io.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace canon;

TEST_CASE("exponential rate function in closed form") {
  auto rf = rate_function(make_exponential(1.0));
  for (double y : {0.2, 0.5, 1.0, 1.7, 3.0}) {
    CHECK(rf.phi(y) == doctest::Approx(y - 1.0 - std::log(y)).epsilon(1e-9));
    CHECK(rf.dphi(y) == doctest::Approx(1.0 - 1.0 / y).epsilon(1e-8));
    CHECK(rf.d2phi(y) == doctest::Approx(1.0 / (y * y)).epsilon(1e-6));
  }
  CHECK(rf.mean == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rf.phi(-0.5) == std::numeric_limits<double>::infinity());
}

TEST_CASE("normal rate function is the half parabola") {
  auto rf = rate_function(make_normal(0.4, 2.2));
  for (double y : {-1.0, 0.0, 0.4, 1.3, 2.5})
    CHECK(rf.phi(y) ==
          doctest::Approx((y - 0.4) * (y - 0.4) / (2.0 * 2.2)).epsilon(1e-9));
}

TEST_CASE("poisson rate function in closed form") {
  auto rf = rate_function(make_poisson(2.0));
  for (double y : {0.5, 1.0, 2.0, 3.7})
    CHECK(rf.phi(y) ==
          doctest::Approx(y * std::log(y / 2.0) - y + 2.0).epsilon(1e-8));
}

TEST_CASE("legendre reciprocity on a grid") {
  {
    auto rf = rate_function(make_exponential(1.0));
    for (int i = 0; i < 50; ++i) {
      double y = 0.3 + 2.2 * i / 49.0;
      ReciprocityResidual r = reciprocity_check(rf, y);
      CHECK(r.r1 < 1e-8);
      CHECK(r.r2 < 1e-6);
    }
  }
  {
    auto rf = rate_function(make_normal(0.4, 2.2));
    for (int i = 0; i < 50; ++i) {
      double y = -2.0 + 5.0 * i / 49.0;
      ReciprocityResidual r = reciprocity_check(rf, y);
      CHECK(r.r1 < 1e-8);
      CHECK(r.r2 < 1e-6);
    }
  }
}

TEST_CASE("zero minimum curvature match and convexity") {
  std::vector<ContPtr> cont = {make_exponential(1.3), make_gamma(2.5, 1.3),
                               make_normal(0.4, 2.2), make_uniform(-1.0, 2.0)};
  for (auto& d : cont) {
    auto rf = rate_function(d);
    CHECK(std::abs(rf.phi(rf.mean)) < 1e-10);
    CHECK(std::abs(rf.d2phi(rf.mean) * rf.variance - 1.0) < 1e-6);
    double lo = rf.domain.first, hi = rf.domain.second;
    double a = std::isfinite(lo) ? lo + 0.02 * (rf.mean - lo) : rf.mean - 4.0;
    double b = std::isfinite(hi) ? hi - 0.02 * (hi - rf.mean) : rf.mean + 4.0;
    double prev = rf.dphi(a);
    for (int i = 1; i < 100; ++i) {
      double y = a + (b - a) * i / 99.0;
      double cur = rf.dphi(y);
      CHECK(cur >= prev - 1e-7);
      CHECK(rf.phi(y) >= -1e-12);
      prev = cur;
    }
  }
  auto rp = rate_function(make_poisson(2.7));
  CHECK(std::abs(rp.phi(2.7)) < 1e-10);
  CHECK(std::abs(rp.d2phi(2.7) * 2.7 - 1.0) < 1e-6);
}

TEST_CASE("tilt parameter from the rate function") {
  auto rf = rate_function(make_exponential(1.0));
  // window [0.4, 0.5] below the mean: the closest point is the right edge,
  // ystar = 0.5, and lambda = -phi'(0.5) = 1
  TiltParam tp = ldp_tilt_param(rf, Interval(0.4, 0.1));
  CHECK(tp.lambda == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(tp.provenance == TiltRoute::RateFunction);
  CHECK(tp.note.find("ystar=0.5") != std::string::npos);

  // window above the mean: the left edge is the closest point, ystar = 2.0,
  // phi'(2) = 1 - 1/2
  TiltParam up = ldp_tilt_param(rf, Interval(2.0, 0.5));
  CHECK(up.lambda == doctest::Approx(-0.5).epsilon(1e-8));

  CHECK_THROWS_AS((void)ldp_tilt_param(rf, Interval(0.9, 0.4)), Error);
  try {
    (void)ldp_tilt_param(rf, Interval(0.9, 0.4));
  } catch (const Error& err) {
    CHECK(err.kind() == ErrorKind::MeanInsideWindow);
  }

  // mean on the boundary: ystar is the mean itself and the tilt vanishes
  TiltParam edge = ldp_tilt_param(rf, Interval(1.0, 0.3));
  CHECK(std::abs(edge.lambda) < 1e-8);
}

TEST_CASE("maximum entropy parameter") {
  MaxEntSolution s = maxent_lambda(make_exponential(1.0), 0.5);
  CHECK(s.lambda == doctest::Approx(-1.0).epsilon(1e-8));
  CHECK(s.constraint_mean == 0.5);
  CHECK(s.c_lambda == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(std::abs(s.residual) < 1e-8);

  // constraint mean outside the reachable range
  CHECK_THROWS_AS((void)maxent_lambda(make_uniform(0.0, 1.0), 1.5), Error);
  try {
    (void)maxent_lambda(make_uniform(0.0, 1.0), 1.5);
  } catch (const Error& err) {
    CHECK(err.kind() == ErrorKind::InfeasibleMean);
  }
}

TEST_CASE("maxent and rate-function routes agree up to sign") {
  CHECK(maxent_ldp_equivalence(make_exponential(1.0), Interval(0.5, 0.1)) < 1e-8);
  CHECK(maxent_ldp_equivalence(make_exponential(1.0), Interval(2.0, 0.5)) < 1e-8);
  CHECK(maxent_ldp_equivalence(make_normal(0.0, 1.0), Interval(1.5, 0.2)) < 1e-8);
  // discrete: Pois(1) conditioned above its mean, lambda = -phi'(2) = -ln 2
  double res = maxent_ldp_equivalence(make_poisson(1.0), Interval(2.0, 0.5));
  CHECK(res < 1e-8);
  TiltParam tp = ldp_tilt_param(rate_function(make_poisson(1.0)), Interval(2.0, 0.5));
  CHECK(tp.lambda == doctest::Approx(-std::log(2.0)).epsilon(1e-8));
}

TEST_CASE("assembled rate functions carry only what they are given") {
  auto rf = rate_function_from([](double y) { return y * y; },
                               [](double y) { return 2.0 * y; }, 0.0,
                               {-10.0, 10.0});
  CHECK(rf.phi(1.5) == doctest::Approx(2.25));
  CHECK(rf.dphi(1.5) == doctest::Approx(3.0));
  CHECK(rf.mean == 0.0);
  CHECK_FALSE(static_cast<bool>(rf.aprime));
  CHECK_THROWS_AS((void)reciprocity_check(rf, 1.0), Error);
}

TEST_CASE("rate table sampling") {
  auto rf = rate_function(make_exponential(1.0));
  RateTable t = tabulate(rf, 0.4, 0.6, 5);
  CHECK(t.y.size() == 5);
  CHECK(t.y.front() == doctest::Approx(0.4));
  CHECK(t.y.back() == doctest::Approx(0.6));
  CHECK(t.phi[0] == doctest::Approx(0.4 - 1.0 - std::log(0.4)).epsilon(1e-9));
  CHECK(t.mean == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS((void)tabulate(rf, 0.6, 0.4, 5), Error);
  CHECK_THROWS_AS((void)tabulate(rf, 0.4, 0.6, 1), Error);
}

TEST_CASE("mgf domain checks on the free function") {
  CHECK(log_mgf(*make_exponential(1.0), 0.5) ==
        doctest::Approx(-std::log(0.5)).epsilon(1e-12));
  CHECK_THROWS_AS((void)log_mgf(*make_exponential(1.0), 1.5), Error);
}

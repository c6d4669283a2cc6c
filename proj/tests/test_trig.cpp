#include <catch_amalgamated.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <random>

#include "nhsteer/canonical.hpp"
#include "nhsteer/sim.hpp"
#include "nhsteer/steer.hpp"
#include "nhsteer/trig.hpp"

using namespace nhsteer;
using Series = TrigSeries<double>;

namespace {

Series random_series(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> c(-1, 1);
  std::uniform_int_distribution<int> k(0, 4), q(0, 3);
  Series s;
  for (int t = 0; t < 3; ++t) s += Series::cosine(c(rng), k(rng), q(rng));
  return s;
}

}  // namespace

TEST_CASE("cosine with quarter phases", "[trig]") {
  for (int q = 0; q < 4; ++q) {
    Series s = Series::cosine(1.5, 3, q);
    for (double t : {0.0, 0.4, 2.0}) CHECK(s.eval(t) == Catch::Approx(1.5 * std::cos(3 * t - q * M_PI / 2)).margin(1e-14));
  }
  CHECK(Series::cosine(2.0, 0, 1).empty());  // sin(0) vanishes
}

TEST_CASE("products agree pointwise", "[trig][property]") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    Series a = random_series(rng), b = random_series(rng);
    Series ab = a * b;
    for (double t : {0.0, 0.7, 1.9, 5.5}) CHECK(ab.eval(t) == Catch::Approx(a.eval(t) * b.eval(t)).margin(1e-12));
  }
}

TEST_CASE("integration against quadrature", "[trig][property]") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 30; ++trial) {
    Series a = random_series(rng) * random_series(rng);
    a.add(1, 2, true, 0.3);  // a secular term
    Series ia = a.integrate();
    CHECK(ia.eval(0) == Catch::Approx(0).margin(1e-14));
    for (double t : {0.5, 3.0, 2 * M_PI}) {
      double q = boost::math::quadrature::gauss_kronrod<double, 31>::integrate([&](double s) { return a.eval(s); }, 0, t,
                                                                               10, 1e-13);
      CHECK(ia.eval(t) == Catch::Approx(q).margin(1e-11));
    }
  }
}

TEST_CASE("exact series and full-period values", "[trig]") {
  ExactTrig c = ExactTrig::cosine(Rational(1), 1, 0);
  ExactTrig s = ExactTrig::cosine(Rational(1), 1, 1);
  // int_0^t cos(s) sin(s) ds over a full period is zero; int cos^2 = pi.
  auto v1 = (c * s).integrate().at_full_period();
  CHECK(v1.empty());
  auto v2 = (c * c).integrate().at_full_period();
  REQUIRE(v2.size() == 1);
  CHECK(v2.at(1) == Rational(1, 2));  // value = (1/2) * 2 pi
  CHECK((c * c).mean_coefficient() == Rational(1, 2));
  CHECK((c * c).integrate().has_secular_terms());
  CHECK_FALSE(c.integrate().has_secular_terms());
}

TEST_CASE("canonical trig solution matches numerical integration", "[trig][sim]") {
  CanonicalSystem sys = canonical_fields(2, 3);
  DriftlessSystem dyn = DriftlessSystem::from_poly(sys.fields);
  Period p(2);
  p.channels[0] = {{0.7, 1, 0}, {0.2, 2, 1}};
  p.channels[1] = {{-0.4, 1, 1}, {0.5, 3, 0}};
  ControlLaw law;
  law.m = 2;
  law.periods = {p};
  RationalVector v0{Rational(1, 4), Rational(-1, 2), 0, Rational(1, 8), 0};
  auto exact = canonical_trig_solution(sys, period_series(p, 2), v0, sys.dim());
  std::vector<double> x0(5);
  for (std::size_t k = 0; k < 5; ++k) x0[k] = v0[k].get_d();
  IntegratorOptions opts;
  opts.tolerance = 1e-12;
  auto x = integrate_endpoint(dyn, x0, law, opts);
  for (std::size_t k = 0; k < 5; ++k)
    CHECK(static_cast<double>(value_at_full_period(exact[k])) == Catch::Approx(x[k]).margin(1e-10));
}

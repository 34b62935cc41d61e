#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "qwalk/harness.hpp"

using namespace qwalk;

TEST_CASE("order estimates") {
  CHECK(observed_order(4.0, 1.0, 0.2, 0.1) == doctest::Approx(2.0));
  const std::vector<double> h{0.4, 0.2, 0.1, 0.05};
  const std::vector<double> e{1.6, 0.4, 0.1, 0.025};
  for (double q : pairwise_orders(h, e)) CHECK(q == doctest::Approx(2.0));
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);

  ConvergenceReport r;
  r.h = h;
  r.errors = {1.0, 0.5, 0.26, 0.13};
  r.finalize();
  CHECK(r.orders.size() == 3);
  CHECK(r.tail_orders(3).size() == 2);
  CHECK(r.tail_in_band(0.8, 1.2));
  CHECK_FALSE(r.tail_at_least(1.5));
}

TEST_CASE("ladders and domains") {
  EpsilonLadder l = EpsilonLadder::standard();
  CHECK(l.steps(1.0) == std::vector<std::size_t>{50, 100, 200, 400, 800});
  const EpsilonLadder f = EpsilonLadder::fixed_coin_default();
  CHECK(f.steps(1.0) == std::vector<std::size_t>{50, 101, 203, 405, 811});
  l.eps = {0.01, 0.02};
  CHECK_THROWS_AS(l.steps(1.0), std::invalid_argument);
  l.eps = {0.3};
  CHECK_THROWS_AS(l.steps(1.0), std::invalid_argument);

  StudyDomain d;
  CHECK(d.sites(0.01) == 800);
  CHECK_THROWS_AS(d.sites(0.03), std::invalid_argument);
  CHECK(d.wrap(4.5) == doctest::Approx(-3.5));
  CHECK(d.wrap(-4.0) == -4.0);
}

TEST_CASE("analytic transport reference") {
  const WalkJet j = oracle::jet("0", "1", "0");
  CHECK(has_transport_reference(j));
  CHECK_FALSE(has_transport_reference(oracle::jet("0.1", "1", "0")));
  auto psi0 = [](double x) {
    return std::pair<cplx, cplx>{std::exp(-x * x), cplx(0, 0.5) * std::exp(-x * x)};
  };
  const SpinorField r = transport_reference(j, psi0, 0.7, StudyDomain{}, 0.01);
  for (std::size_t i = 0; i < r.size(); i += 37) {
    const double x = -4.0 + 0.01 * static_cast<double>(i);
    const auto [m, p] = oracle::transport([&](double y) { return psi0(StudyDomain{}.wrap(y)).first; },
                                          [&](double y) { return psi0(StudyDomain{}.wrap(y)).second; },
                                          1.0, 1.0, 1.0, 0.7, x);
    CHECK(std::abs(r.minus[i] - m) < 1e-12);
    CHECK(std::abs(r.plus[i] - p) < 1e-12);
  }
}

TEST_CASE("walk converges to the transport solution at first order") {
  InitialProfile p;
  p.width = 0.25;
  p.w_minus = {0.6, 0};
  p.w_plus = {0.8, 0};
  EpsilonLadder l = EpsilonLadder::standard();
  l.reference = Reference::analytic;
  const ConvergenceReport r = convergence_study(oracle::jet("0", "1 + 0.5*sin(pi*x/4)", "0"), l, p);
  CHECK(r.reference == "analytic");
  CHECK(r.tail_in_band(0.9, 1.1));
  for (std::size_t i = 0; i < r.h.size(); ++i) {
    CHECK(r.even_errors[i] == doctest::Approx(r.errors[i]).epsilon(1e-6));
    CHECK(r.walk_drift[i] < 1e-12);
  }
}

TEST_CASE("hadamard with one rung") {
  EpsilonLadder l;
  l.eps = {0.02};
  const HadamardReport r = hadamard_nolimit_demo(l, InitialProfile{.width = 0.25});
  CHECK(r.insufficient_rungs);
  CHECK(r.fixed_distances.empty());
  CHECK_FALSE(r.passed());
}

TEST_CASE("KG study on zero data") {
  GridLadder gl;
  gl.n_sites = {32, 64};
  const ConvergenceReport r = kg_order_study(
      oracle::jet("1", "0", "0"), [](double) { return std::pair<cplx, cplx>{0.0, 0.0}; }, gl);
  for (double e : r.errors) CHECK(e == 0.0);
}
